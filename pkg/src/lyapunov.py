from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from .baker_map import BitOrbit, Params, State4, jacobian
from .coupling import CouplingFunction
from .errors import ParameterError

# (w, z, y, x): with f = 0 the cocycle is upper triangular in this order
FIBER_FIRST = [3, 2, 1, 0]
CONVERGENCE_TOLERANCE = 1e-4


@dataclass
class ExponentSpectrum:
    """
    Lyapunov exponents in nonincreasing order

    Attributes:
        values: the exponents, in nats per step
        orbit_length: steps used, 0 for closed forms
        convergence_history: running estimates at each renormalisation
        restarts: walkers perturbed off a branch boundary
        converged: False if the last two running estimates differ by more than the tolerance
    """
    values: Tuple[float, ...]
    orbit_length: int = 0
    convergence_history: List[Tuple[float, ...]] = field(default_factory=list)
    restarts: int = 0
    converged: bool = True

    def __post_init__(self) -> None:
        if any(a < b for a, b in zip(self.values, self.values[1:])):
            raise ParameterError(f"exponents must be sorted in nonincreasing order, got {self.values!r}")


@dataclass(frozen=True)
class DimensionValue:
    """
    a dimension with the Kaplan-Yorke index it came from

    Attributes:
        value: the dimension
        j_index: largest j with a nonnegative partial sum of exponents
    """
    value: float
    j_index: int


def lyapunov_exact(p: Params) -> ExponentSpectrum:
    """(log 2, log 2, log alpha, log beta) sorted, for every coupling with f = 0"""
    values = sorted([math.log(2.0), math.log(2.0), math.log(p.alpha), math.log(p.beta)], reverse=True)
    return ExponentSpectrum(tuple(values))


def _frame(matrix: np.ndarray) -> np.ndarray:
    return matrix[np.ix_(FIBER_FIRST, FIBER_FIRST)]


def lyapunov_numerical(p: Params, g: Optional[CouplingFunction], start: State4, n_iters: int = 10_000,
                       renorm_every: int = 8, rng: Optional[np.random.Generator] = None,
                       f: Optional[CouplingFunction] = None) -> ExponentSpectrum:
    """
    Lyapunov exponents along the orbit of start by QR-renormalised tangent propagation

    the tangent cocycle is carried in the (w, z, y, x) order, where it is upper triangular
    when f = 0; the QR factor is then the identity and the diagonal of R collects the exact
    per-step logs. the orbit tracks x and z bit-exactly and perturbs the low bits of a walker
    that lands exactly on x = 1/2 or z = 1/2

    Args:
        p: contraction rates
        g: response coupling
        start: initial state
        n_iters: orbit length
        renorm_every: steps between QR renormalisations
        rng: source of the revealed bits, a fixed Philox stream when omitted
        f: optional drive coupling

    Returns:
        ExponentSpectrum sorted in nonincreasing order
    """
    if n_iters < 1 or renorm_every < 1:
        raise ParameterError(f"need n_iters >= 1 and renorm_every >= 1, got {n_iters}, {renorm_every}")
    rng = rng if rng is not None else np.random.Generator(np.random.Philox(0))
    orbit = BitOrbit(p, g, rng, start.as_array(), f)

    basis = np.eye(4)
    log_sums = np.zeros(4)
    history: List[Tuple[float, ...]] = []
    for step in range(1, n_iters + 1):
        orbit.perturb_boundary()
        state = State4.from_array(orbit.states()[0])
        basis = _frame(jacobian(p, g, state, f).matrix) @ basis
        orbit.step()

        if step % renorm_every == 0 or step == n_iters:
            q, r = np.linalg.qr(basis)
            diag = np.diag(r)
            signs = np.where(diag < 0.0, -1.0, 1.0)
            log_sums += np.log(np.abs(diag))
            basis = q * signs
            history.append(tuple(sorted((log_sums / step).tolist(), reverse=True)))

    values = tuple(sorted((log_sums / n_iters).tolist(), reverse=True))
    converged = True
    if len(history) >= 2:
        drift = max(abs(a - b) for a, b in zip(history[-1], history[-2]))
        converged = drift <= CONVERGENCE_TOLERANCE
        if not converged:
            logger.warning(f"[lyapunov] running estimates still moving by {drift:.2e} after {n_iters} steps")
    if orbit.restarts:
        logger.info(f"[lyapunov] perturbed the orbit off a branch boundary {orbit.restarts} times")
    return ExponentSpectrum(values, n_iters, history, orbit.restarts, converged)


def kaplan_yorke(exponents: Union[ExponentSpectrum, Sequence[float]]) -> DimensionValue:
    """
    Lyapunov (Kaplan-Yorke) dimension j + (chi_1 + ... + chi_j) / |chi_{j+1}|

    j is the largest index whose partial sum is nonnegative; a partial sum of exactly 0
    counts as nonnegative

    Raises:
        ParameterError: if the exponents are empty or not sorted nonincreasingly
    """
    values = list(exponents.values if isinstance(exponents, ExponentSpectrum) else exponents)
    if not values:
        raise ParameterError("no exponents given")
    if any(a < b for a, b in zip(values, values[1:])):
        raise ParameterError(f"exponents must be sorted in nonincreasing order, got {values!r}")

    partial = 0.0
    j = 0
    best = 0.0
    for i, chi in enumerate(values, start=1):
        partial += chi
        if partial >= 0.0:
            j = i
            best = partial
    if j == len(values):
        return DimensionValue(float(j), j)
    return DimensionValue(j + best / abs(values[j]), j)


def dl_uncoupled_closed_form(p: Params) -> DimensionValue:
    """
    Lyapunov dimension of the product system

    with a = min(alpha, beta) and b = max(alpha, beta): 2 - 2 log 2 / log b when b < 1/4,
    else 3 - 2 log 2 / log a - log b / log a; the branches meet at b = 1/4
    """
    a, b = min(p.alpha, p.beta), max(p.alpha, p.beta)
    if b < 0.25:
        return DimensionValue(2.0 - 2.0 * math.log(2.0) / math.log(b), 2)
    return DimensionValue(3.0 - 2.0 * math.log(2.0) / math.log(a) - math.log(b) / math.log(a), 3)


def d1_uncoupled_closed_form(p: Params) -> float:
    """information dimension of mu: 2 - log 2 / log alpha - log 2 / log beta"""
    return 2.0 - math.log(2.0) / math.log(p.alpha) - math.log(2.0) / math.log(p.beta)


def skew_product_dimension(p: Params) -> float:
    """
    sum of the Lyapunov dimensions of the two factors, each computed from its own exponents

    equals d1_uncoupled_closed_form since log 2 + log c < 0 for c < 1/2
    """
    drive = kaplan_yorke([math.log(2.0), math.log(p.alpha)]).value
    response = kaplan_yorke([math.log(2.0), math.log(p.beta)]).value
    return drive + response


def typical_coupled_dimension(p: Params) -> float:
    """
    information dimension of mu_g for a typical response coupling g (f = 0)

    the Lyapunov dimension of the whole system when alpha < beta, the factor sum otherwise
    """
    if p.alpha < p.beta:
        return dl_uncoupled_closed_form(p).value
    return skew_product_dimension(p)


def entropy_closed_form() -> float:
    """metric entropy of mu_g, 2 log 2, the sum of the positive exponents"""
    return 2.0 * math.log(2.0)
