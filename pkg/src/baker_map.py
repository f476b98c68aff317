from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from .errors import BranchBoundaryError, ParameterError, SlabEscapeError

if TYPE_CHECKING:
    from .coupling import CouplingFunction

HALF = 0.5
MANTISSA_BITS = 53
_MANTISSA_MASK = np.uint64((1 << MANTISSA_BITS) - 1)
_HALF_BITS = np.uint64(1 << (MANTISSA_BITS - 1))
_BIT_SCALE = 2.0 ** -MANTISSA_BITS


@dataclass(frozen=True)
class Params:
    """
    contraction rates of the coupled skinny baker's map

    Attributes:
        alpha: contraction rate of the drive (x, y) map
        beta: contraction rate of the response (z, w) map
    """
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not 0.0 < value < HALF:
                raise ParameterError(f"{name} must lie in (0, 1/2), got {value!r}")

    def swapped(self) -> Params:
        """the same system with drive and response exchanged"""
        return Params(self.beta, self.alpha)


@dataclass(frozen=True)
class State2:
    """point (x, y) of M = [0,1) x R"""
    x: float
    y: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.x < 1.0:
            raise ParameterError(f"x must lie in [0, 1), got {self.x!r}")


@dataclass(frozen=True)
class State4:
    """point (x, y, z, w) of M x M"""
    x: float
    y: float
    z: float
    w: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x < 1.0 and 0.0 <= self.z < 1.0):
            raise ParameterError(f"x and z must lie in [0, 1), got x={self.x!r}, z={self.z!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.w], dtype=float)

    @classmethod
    def from_array(cls, values) -> State4:
        x, y, z, w = (float(v) for v in values)
        return cls(x, y, z, w)

    def drive(self) -> State2:
        return State2(self.x, self.y)

    def response(self) -> State2:
        return State2(self.z, self.w)


@dataclass(frozen=True)
class Jacobian4:
    """
    derivative of the coupled map on one of the four open pieces of M x M

    with f = 0 only the diagonal (2, alpha, 2, beta) and the (w, x), (w, y) entries are nonzero
    """
    matrix: np.ndarray

    # entries allowed to be nonzero when f = 0
    PATTERN = np.array([
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [1, 1, 0, 1],
    ], dtype=bool)

    def diagonal(self) -> Tuple[float, float, float, float]:
        return tuple(float(v) for v in np.diag(self.matrix))

    def respects_pattern(self) -> bool:
        """True if every entry outside the f = 0 pattern is zero"""
        return bool(np.all(self.matrix[~self.PATTERN] == 0.0))


@dataclass(frozen=True)
class AbsorbingSet:
    """
    forward-invariant box V for the coupled map

    Attributes:
        y_interval: closed bounds on y
        w_interval: closed bounds on w
    """
    y_interval: Tuple[float, float]
    w_interval: Tuple[float, float]

    def contains(self, states: np.ndarray) -> np.ndarray:
        """membership test for an (n, 4) array (or a single 4-vector)"""
        s = np.atleast_2d(np.asarray(states, dtype=float))
        return ((s[:, 0] >= 0.0) & (s[:, 0] < 1.0)
                & (s[:, 2] >= 0.0) & (s[:, 2] < 1.0)
                & (s[:, 1] >= self.y_interval[0]) & (s[:, 1] <= self.y_interval[1])
                & (s[:, 3] >= self.w_interval[0]) & (s[:, 3] <= self.w_interval[1]))


def baker_step(contraction: float, s: State2) -> State2:
    """
    one step of the skinny baker's map B_contraction

    the branch is decided by x < 1/2, so x = 1/2 takes the right branch
    """
    if s.x < HALF:
        return State2(2.0 * s.x, contraction * s.y)
    return State2(2.0 * s.x - 1.0, contraction * s.y + (1.0 - contraction))


def baker_inverse(contraction: float, s: State2) -> State2:
    """
    inverse of B_contraction on the attractor slab [0, c] u [1 - c, 1]

    Raises:
        SlabEscapeError: if y lies outside the slab
    """
    if not (0.0 <= s.y <= contraction or 1.0 - contraction <= s.y <= 1.0):
        raise SlabEscapeError(f"y={s.y!r} is outside the invertibility slab for contraction {contraction!r}",
                              index=0)
    if s.y <= HALF:
        return State2(s.x / 2.0, s.y / contraction)
    return State2((s.x + 1.0) / 2.0, (s.y - (1.0 - contraction)) / contraction)


def _coupling_value(coupling: Optional[CouplingFunction], a, b):
    if coupling is None:
        return 0.0
    return coupling.eval(a, b)


def coupled_step(p: Params, f: Optional[CouplingFunction], g: Optional[CouplingFunction], s: State4) -> State4:
    """
    one step of the coupled system; both coupling terms use the pre-step state

    Args:
        p: contraction rates
        f: coupling of (z, w) into the y equation, None for zero
        g: coupling of (x, y) into the w equation, None for zero
        s: current state
    """
    drive = baker_step(p.alpha, State2(s.x, s.y))
    response = baker_step(p.beta, State2(s.z, s.w))
    y = drive.y + float(_coupling_value(f, s.z, s.w))
    w = response.y + float(_coupling_value(g, s.x, s.y))
    return State4(drive.x, y, response.x, w)


def coupled_step_batch(p: Params, f: Optional[CouplingFunction], g: Optional[CouplingFunction],
                       states: np.ndarray) -> np.ndarray:
    """vectorised coupled_step over an (n, 4) array, same arithmetic as the scalar version"""
    s = np.asarray(states, dtype=float)
    x, y, z, w = s[:, 0], s[:, 1], s[:, 2], s[:, 3]
    left_x = x < HALF
    left_z = z < HALF

    out = np.empty_like(s)
    out[:, 0] = np.where(left_x, 2.0 * x, 2.0 * x - 1.0)
    out[:, 1] = np.where(left_x, p.alpha * y, p.alpha * y + (1.0 - p.alpha)) + _coupling_value(f, z, w)
    out[:, 2] = np.where(left_z, 2.0 * z, 2.0 * z - 1.0)
    out[:, 3] = np.where(left_z, p.beta * w, p.beta * w + (1.0 - p.beta)) + _coupling_value(g, x, y)
    return out


def jacobian(p: Params, g: Optional[CouplingFunction], s: State4,
             f: Optional[CouplingFunction] = None) -> Jacobian4:
    """
    derivative of the coupled map at s

    with f given, the y row carries (f_z, f_w) in the z and w columns

    Raises:
        BranchBoundaryError: if x or z sits exactly on the branch boundary 1/2
    """
    if s.x == HALF or s.z == HALF:
        raise BranchBoundaryError(f"jacobian undefined on the branch boundary: x={s.x!r}, z={s.z!r}")

    m = np.zeros((4, 4), dtype=float)
    m[0, 0] = 2.0
    m[1, 1] = p.alpha
    m[2, 2] = 2.0
    m[3, 3] = p.beta
    if g is not None:
        g_x, g_y = g.grad(s.x, s.y)
        m[3, 0] = float(g_x)
        m[3, 1] = float(g_y)
    if f is not None:
        f_z, f_w = f.grad(s.z, s.w)
        m[1, 2] = float(f_z)
        m[1, 3] = float(f_w)
    return Jacobian4(m)


def absorbing_bounds(p: Params, g: Optional[CouplingFunction], delta: float = 0.0,
                     f: Optional[CouplingFunction] = None) -> AbsorbingSet:
    """
    forward-invariant box for the coupled map, padded by delta

    Raises:
        ParameterError: if delta is negative
    """
    if delta < 0.0:
        raise ParameterError(f"padding delta must be nonnegative, got {delta!r}")
    g_pad = (g.sup_norm if g is not None else 0.0) / (1.0 - p.beta)
    f_pad = (f.sup_norm if f is not None else 0.0) / (1.0 - p.alpha)
    return AbsorbingSet(
        y_interval=(-delta - f_pad, 1.0 + delta + f_pad),
        w_interval=(-delta - g_pad, 1.0 + delta + g_pad),
    )


class BitOrbit:
    """
    orbits of Lebesgue-random initial points with exactly tracked doubling coordinates

    x and z are stored as 53-bit integers; each doubling shifts the binary expansion left and
    appends a fresh random bit, which reveals the next digit of the random initial point.
    plain float doubling reaches x = 0 after at most 53 steps, this never does.

    Attributes:
        params: contraction rates
        f: drive coupling (None for zero)
        g: response coupling (None for zero)
        x_bits: uint64 mantissas of x
        z_bits: uint64 mantissas of z
        y: float array of y values
        w: float array of w values
        restarts: number of walkers perturbed off a branch boundary
    """

    def __init__(self, params: Params, g: Optional[CouplingFunction], rng: np.random.Generator,
                 start: np.ndarray, f: Optional[CouplingFunction] = None) -> None:
        """
        initializes the walkers

        Args:
            params: contraction rates
            g: response coupling
            rng: source of the appended bits
            start: (n, 4) or (4,) array of initial states, x and z in [0, 1)
            f: drive coupling
        """
        s = np.atleast_2d(np.asarray(start, dtype=float))
        self.params = params
        self.f = f
        self.g = g
        self.rng = rng
        self.x_bits: np.ndarray = np.floor(s[:, 0] * 2.0 ** MANTISSA_BITS).astype(np.uint64)
        self.z_bits: np.ndarray = np.floor(s[:, 2] * 2.0 ** MANTISSA_BITS).astype(np.uint64)
        self.y: np.ndarray = s[:, 1].copy()
        self.w: np.ndarray = s[:, 3].copy()
        self.restarts: int = 0

    def __len__(self) -> int:
        return len(self.y)

    @property
    def x(self) -> np.ndarray:
        return self.x_bits.astype(float) * _BIT_SCALE

    @property
    def z(self) -> np.ndarray:
        return self.z_bits.astype(float) * _BIT_SCALE

    def states(self) -> np.ndarray:
        return np.column_stack([self.x, self.y, self.z, self.w])

    def on_boundary(self) -> np.ndarray:
        """walkers sitting exactly on x = 1/2 or z = 1/2"""
        return (self.x_bits == _HALF_BITS) | (self.z_bits == _HALF_BITS)

    def perturb_boundary(self) -> int:
        """re-draws the low half of the mantissas of walkers on a branch boundary"""
        hit = self.on_boundary()
        count = int(np.count_nonzero(hit))
        if count:
            low = np.uint64((1 << 26) - 1)
            noise = self.rng.integers(1, 1 << 26, size=(2, count), dtype=np.uint64)
            self.x_bits[hit] = (self.x_bits[hit] & ~low) | noise[0]
            self.z_bits[hit] = (self.z_bits[hit] & ~low) | noise[1]
            self.restarts += count
        return count

    def step(self) -> None:
        """advances every walker by one step of the coupled map"""
        p = self.params
        n = len(self)
        x, y, z, w = self.x, self.y, self.z, self.w

        right_x = (self.x_bits >> np.uint64(MANTISSA_BITS - 1)).astype(bool)
        right_z = (self.z_bits >> np.uint64(MANTISSA_BITS - 1)).astype(bool)

        new_y = np.where(right_x, p.alpha * y + (1.0 - p.alpha), p.alpha * y) + _coupling_value(self.f, z, w)
        new_w = np.where(right_z, p.beta * w + (1.0 - p.beta), p.beta * w) + _coupling_value(self.g, x, y)

        fresh = self.rng.integers(0, 2, size=(2, n), dtype=np.uint64)
        self.x_bits = ((self.x_bits << np.uint64(1)) & _MANTISSA_MASK) | fresh[0]
        self.z_bits = ((self.z_bits << np.uint64(1)) & _MANTISSA_MASK) | fresh[1]
        self.y = np.asarray(new_y, dtype=float)
        self.w = np.asarray(new_w, dtype=float)
