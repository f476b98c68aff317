import zlib
from typing import List, Tuple, Union

import numpy as np

from .errors import ParameterError

# samples per random block; a block's stream never depends on the thread count
BLOCK_SIZE = 1 << 16

_BLOCK_BITS = 40


def stream_id(name: Union[str, int]) -> int:
    """stable 24-bit identifier for a named stream"""
    if isinstance(name, int):
        if not 0 <= name < (1 << 24):
            raise ParameterError(f"stream id must fit in 24 bits, got {name!r}")
        return name
    return zlib.crc32(name.encode("utf-8")) & 0xFFFFFF


class StreamFactory:
    """
    counter-based random generators keyed by (seed, stream, block)

    every generator is a Philox stream whose key encodes the experiment seed, the stream
    name and the block index, so block b of a stream is the same whatever order or thread
    it is drawn on

    Attributes:
        seed: experiment seed
    """

    def __init__(self, seed: int) -> None:
        if seed < 0:
            raise ParameterError(f"seed must be nonnegative, got {seed!r}")
        self.seed: int = int(seed)

    def generator(self, stream: Union[str, int], block: int = 0) -> np.random.Generator:
        if not 0 <= block < (1 << _BLOCK_BITS):
            raise ParameterError(f"block index out of range: {block!r}")
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF, (stream_id(stream) << _BLOCK_BITS) | block],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: Union[str, int]) -> "StreamFactory":
        """a factory whose seed is derived from this one and the stream name"""
        derived = int(self.generator(stream).integers(0, 1 << 62))
        return StreamFactory(derived)


def block_layout(n: int, block_size: int = BLOCK_SIZE) -> List[Tuple[int, int]]:
    """
    splits n samples into (block index, size) pairs

    Returns:
        list of blocks in sample order, the last one possibly short
    """
    if n < 0:
        raise ParameterError(f"sample count must be nonnegative, got {n!r}")
    return [(b, min(block_size, n - start)) for b, start in enumerate(range(0, n, block_size))]
