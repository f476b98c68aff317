from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
from bitarray import bitarray

from .errors import ParameterError

# extra digits drawn beyond any truncation depth; contraction < 1/2 puts their weight below 2^-64
DIGIT_MARGIN = 64


def horner_value(contraction: float, digits: Iterable[int]) -> float:
    """(1 - c) * sum_i c^i b_i, evaluated from the last digit inward"""
    value = 0.0
    for bit in reversed(list(digits)):
        value = (1.0 - contraction) * bit + contraction * value
    return value


@dataclass(frozen=True)
class CantorPoint:
    """
    point of the Cantor set C_contraction with its digit expansion

    Attributes:
        contraction: ratio in (0, 1/2)
        digits: b_0 b_1 ... b_{depth-1}
        value: (1 - c) * sum_i c^i b_i over the stored digits
    """
    contraction: float
    digits: bitarray
    value: float

    @classmethod
    def from_digits(cls, contraction: float, digits: Union[bitarray, Iterable[int]]) -> CantorPoint:
        if not 0.0 < contraction < 0.5:
            raise ParameterError(f"contraction must lie in (0, 1/2), got {contraction!r}")
        bits = digits if isinstance(digits, bitarray) else bitarray([int(b) for b in digits])
        return cls(contraction, bits, horner_value(contraction, bits.tolist()))

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def truncation_error(self) -> float:
        """distance to any point of the set sharing the stored digits is at most c^depth"""
        return self.contraction ** self.depth


def sample_cantor(contraction: float, digit_source: Union[np.random.Generator, Iterable[int]],
                  depth: int) -> CantorPoint:
    """
    draws a point of C_contraction from the Bernoulli(1/2) digit measure

    Args:
        contraction: ratio in (0, 1/2)
        digit_source: generator, or any iterable of 0/1 values
        depth: number of digits to take

    Raises:
        ParameterError: on depth < 1, a bad contraction, or an exhausted digit source
    """
    if depth < 1:
        raise ParameterError(f"depth must be at least 1, got {depth!r}")
    if isinstance(digit_source, np.random.Generator):
        bits = bitarray(digit_source.integers(0, 2, size=depth).tolist())
    else:
        bits = bitarray()
        for bit in digit_source:
            bits.append(int(bit))
            if len(bits) == depth:
                break
        if len(bits) < depth:
            raise ParameterError(f"digit source ran out after {len(bits)} of {depth} digits")
    return CantorPoint.from_digits(contraction, bits)


def random_digits(rng: np.random.Generator, n: int, depth: int) -> np.ndarray:
    """(n, depth) uint8 array of fair bits"""
    return rng.integers(0, 2, size=(n, depth), dtype=np.uint8)


def suffix_values(contraction: float, digits: np.ndarray, count: int) -> np.ndarray:
    """
    Cantor values of the digit suffixes b_k b_{k+1} ... for k = 0 .. count-1

    row r of the result holds y_{-k} = (1 - c) * sum_i c^i b_{k+i} for each k, computed
    by the same recursion as horner_value so column 0 matches it bitwise

    Args:
        contraction: ratio in (0, 1/2)
        digits: (n, depth) array of bits
        count: number of leading suffixes to keep, at most depth + 1
    """
    n, depth = digits.shape
    if not 0 < count <= depth + 1:
        raise ParameterError(f"can keep between 1 and {depth + 1} suffixes, asked for {count!r}")
    out = np.empty((n, count), dtype=float)
    value = np.zeros(n, dtype=float)
    if count == depth + 1:
        out[:, depth] = value
    for k in range(depth - 1, -1, -1):
        value = (1.0 - contraction) * digits[:, k] + contraction * value
        if k < count:
            out[:, k] = value
    return out


def cantor_values(contraction: float, digits: np.ndarray) -> np.ndarray:
    return suffix_values(contraction, digits, 1)[:, 0]
