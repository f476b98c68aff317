from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from bitarray import bitarray

from .baker_map import Params, State2, State4, baker_inverse
from .cantor import horner_value, suffix_values
from .coupling import CouplingFunction
from .errors import ParameterError, SlabEscapeError

DEFAULT_TOLERANCE = 1e-12
MAX_DEPTH = 2000
_LAST_BELOW_ONE = float(np.nextafter(1.0, 0.0))


class PastHistory:
    """
    backward orbit (x_{-k}, y_{-k}) for k = 1 .. n of a drive point

    Attributes:
        contraction: alpha of the drive map
        entries: list of State2, entries[k-1] is the k-th preimage
        digits: the y digits the history was built from, None if built by inverse steps
    """

    def __init__(self, contraction: float, entries: Sequence[State2], digits: Optional[bitarray] = None) -> None:
        self.contraction = contraction
        self.entries: List[State2] = list(entries)
        self.digits = digits

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> State2:
        return self.entries[index]

    def __iter__(self):
        return iter(self.entries)

    @classmethod
    def from_digits(cls, p: Params, x: float, digits: Union[bitarray, Iterable[int]],
                    n: Optional[int] = None) -> PastHistory:
        """
        builds the history of (x, y) where y has the given Cantor digits

        x_{-k} = (x_{-k+1} + b_{k-1}) / 2 and y_{-k} is the value of the digit suffix starting
        at b_k, so the history is exact up to the weight of the digits not supplied

        Args:
            p: contraction rates
            x: current drive coordinate
            digits: y digits b_0 b_1 ...
            n: history length, at most len(digits); defaults to len(digits)
        """
        bits = digits if isinstance(digits, bitarray) else bitarray([int(b) for b in digits])
        depth = len(bits)
        n = depth if n is None else n
        if not 0 <= n <= depth:
            raise ParameterError(f"history length {n} needs 0 <= n <= {depth} digits")

        values = bits.tolist()
        entries = []
        x_k = x
        for k in range(1, n + 1):
            x_k = min((x_k + values[k - 1]) / 2.0, _LAST_BELOW_ONE)
            entries.append(State2(x_k, horner_value(p.alpha, values[k:])))
        return cls(p.alpha, entries, bits)


@dataclass(frozen=True)
class ConjugacyResult:
    """
    image of a point under the conjugacy (or its inverse)

    Attributes:
        image: the mapped state
        truncation_depth: number of history terms summed
        tail_bound: bound on the omitted part of the series
        shift: the amount added to w
    """
    image: State4
    truncation_depth: int
    tail_bound: float
    shift: float


def truncation_depth(beta: float, sup_norm: float, tolerance: float = DEFAULT_TOLERANCE) -> int:
    """
    smallest N with sup_norm * beta^N / (1 - beta) <= tolerance, at least 1 and at most MAX_DEPTH
    """
    if not 0.0 < tolerance:
        raise ParameterError(f"tolerance must be positive, got {tolerance!r}")
    scale = max(sup_norm, np.finfo(float).eps)
    depth = math.ceil(math.log(tolerance * (1.0 - beta) / scale) / math.log(beta))
    return int(min(max(depth, 1), MAX_DEPTH))


def tail_bound(beta: float, sup_norm: float, depth: int) -> float:
    return sup_norm * beta ** depth / (1.0 - beta)


def past_history(p: Params, s: State2, n: int) -> PastHistory:
    """
    the first n preimages of s under B_alpha

    Raises:
        SlabEscapeError: when round-off drives y out of the slab; .index is the failing step
            and .partial holds the history up to it
    """
    if n < 0:
        raise ParameterError(f"history length must be nonnegative, got {n!r}")
    entries = []
    current = s
    for k in range(n):
        try:
            current = baker_inverse(p.alpha, current)
        except SlabEscapeError as e:
            raise SlabEscapeError(f"history left the slab at step {k + 1}: {e}", index=k,
                                  partial=PastHistory(p.alpha, entries)) from e
        entries.append(current)
    return PastHistory(p.alpha, entries)


def _history_shift(p: Params, g: CouplingFunction, history: PastHistory, depth: int) -> float:
    # sum_{i<N} beta^i g(x_{-i-1}, y_{-i-1}), accumulated from the deepest term
    shift = 0.0
    for i in range(depth - 1, -1, -1):
        entry = history[i]
        shift = float(g.eval(entry.x, entry.y)) + p.beta * shift
    return shift


def conjugacy_map(p: Params, g: CouplingFunction, s: State4, history: PastHistory,
                  depth: Optional[int] = None, tolerance: float = DEFAULT_TOLERANCE) -> ConjugacyResult:
    """
    h(x, y, z, w) = (x, y, z, w + sum_{i<N} beta^i g(x_{-i-1}, y_{-i-1}))

    maps the uncoupled product measure to the coupled invariant measure

    Args:
        p: contraction rates
        g: response coupling
        s: point to map; history must be the past of (s.x, s.y)
        history: at least depth preimages
        depth: number of terms, derived from tolerance when omitted
        tolerance: target bound on the omitted tail

    Raises:
        ParameterError: if the history is shorter than the truncation depth
    """
    return _conjugate(p, g, s, history, depth, tolerance, 1.0)


def conjugacy_inverse(p: Params, g: CouplingFunction, s: State4, history: PastHistory,
                      depth: Optional[int] = None, tolerance: float = DEFAULT_TOLERANCE) -> ConjugacyResult:
    """subtracts the same shift conjugacy_map adds"""
    return _conjugate(p, g, s, history, depth, tolerance, -1.0)


def _conjugate(p: Params, g: CouplingFunction, s: State4, history: PastHistory,
               depth: Optional[int], tolerance: float, sign: float) -> ConjugacyResult:
    n = truncation_depth(p.beta, g.sup_norm, tolerance) if depth is None else depth
    if n < 0:
        raise ParameterError(f"depth must be nonnegative, got {n!r}")
    if len(history) < n:
        raise ParameterError(f"history holds {len(history)} preimages, {n} are needed")
    shift = _history_shift(p, g, history, n)
    image = State4(s.x, s.y, s.z, s.w + sign * shift)
    return ConjugacyResult(image, n, tail_bound(p.beta, g.sup_norm, n), shift)


def history_arrays(p: Params, x: np.ndarray, digits: np.ndarray, depth: int):
    """
    vectorised PastHistory.from_digits

    Args:
        p: contraction rates
        x: (n,) current drive coordinates
        digits: (n, D) y digits, D > depth
        depth: number of preimages

    Returns:
        (y, xs, ys): y of the current point, and (n, depth) arrays of x_{-k}, y_{-k}
    """
    n, total = digits.shape
    if depth >= total + 1:
        raise ParameterError(f"{total} digits cannot carry a history of {depth} preimages")
    suffixes = suffix_values(p.alpha, digits, depth + 1)
    xs = np.empty((n, depth), dtype=float)
    x_k = np.asarray(x, dtype=float)
    for k in range(depth):
        x_k = np.minimum((x_k + digits[:, k]) / 2.0, _LAST_BELOW_ONE)
        xs[:, k] = x_k
    return suffixes[:, 0], xs, suffixes[:, 1:]


def conjugacy_shift_batch(p: Params, g: CouplingFunction, x: np.ndarray, digits: np.ndarray,
                          depth: int) -> np.ndarray:
    """
    conjugacy shifts for a batch of drive points given by x and their y digits

    same recursions as the scalar path; entries agree with conjugacy_map to round-off in g
    """
    if depth == 0 or g.is_zero:
        return np.zeros(len(x), dtype=float)
    _, xs, ys = history_arrays(p, x, digits, depth)
    values = np.asarray(g.eval(xs, ys), dtype=float)
    shift = np.zeros(len(x), dtype=float)
    for i in range(depth - 1, -1, -1):
        shift = values[:, i] + p.beta * shift
    return shift
