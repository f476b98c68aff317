from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .baker_map import HALF, Params
from .errors import ParameterError

ArrayLike = Union[float, np.ndarray]


def _zeros_like(x: ArrayLike) -> ArrayLike:
    # [()] turns a 0-d array back into a numpy scalar
    return np.zeros_like(np.asarray(x, dtype=float))[()]


class CouplingFunction(ABC):
    """
    bounded C^1 scalar field g(x, y) on [0,1) x R

    eval and grad accept floats or numpy arrays of matching shape
    """

    @abstractmethod
    def eval(self, x: ArrayLike, y: ArrayLike) -> ArrayLike:
        ...

    @abstractmethod
    def grad(self, x: ArrayLike, y: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        ...

    @property
    @abstractmethod
    def sup_norm(self) -> float:
        """an upper bound on |g| over [0,1) x R"""

    @property
    @abstractmethod
    def lip_const(self) -> float:
        """an upper bound on the Lipschitz constant of g"""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """json-ready record of the parameters, used in result manifests"""

    @property
    def is_zero(self) -> bool:
        return self.sup_norm == 0.0

    def __call__(self, x: ArrayLike, y: ArrayLike) -> ArrayLike:
        return self.eval(x, y)

    def __add__(self, other: CouplingFunction) -> LinearCombination:
        return LinearCombination([(1.0, self), (1.0, other)])

    def scaled(self, factor: float) -> LinearCombination:
        return LinearCombination([(factor, self)])


class ZeroCoupling(CouplingFunction):
    """g = 0, the uncoupled system"""

    def eval(self, x, y):
        return _zeros_like(x)

    def grad(self, x, y):
        return _zeros_like(x), _zeros_like(x)

    @property
    def sup_norm(self) -> float:
        return 0.0

    @property
    def lip_const(self) -> float:
        return 0.0

    def describe(self) -> Dict[str, Any]:
        return {"kind": "zero"}


@dataclass(frozen=True)
class TrigTerm:
    """one term c * cos(a*pi*x + phi) * sin(b*pi*y + psi)"""
    coefficient: float
    a: float
    b: float
    phi: float = 0.0
    psi: float = 0.0


class TrigCoupling(CouplingFunction):
    """
    finite sum of trigonometric products

    Attributes:
        terms: tuple of TrigTerm
    """

    def __init__(self, terms: Sequence[TrigTerm]) -> None:
        self.terms: Tuple[TrigTerm, ...] = tuple(terms)

    def eval(self, x, y):
        total = _zeros_like(x)
        for t in self.terms:
            total = total + t.coefficient * np.cos(t.a * math.pi * x + t.phi) * np.sin(t.b * math.pi * y + t.psi)
        return total

    def grad(self, x, y):
        g_x = _zeros_like(x)
        g_y = _zeros_like(x)
        for t in self.terms:
            cx = np.cos(t.a * math.pi * x + t.phi)
            sx = np.sin(t.a * math.pi * x + t.phi)
            cy = np.cos(t.b * math.pi * y + t.psi)
            sy = np.sin(t.b * math.pi * y + t.psi)
            g_x = g_x - t.coefficient * t.a * math.pi * sx * sy
            g_y = g_y + t.coefficient * t.b * math.pi * cx * cy
        return g_x, g_y

    @property
    def sup_norm(self) -> float:
        return float(sum(abs(t.coefficient) for t in self.terms))

    @property
    def lip_const(self) -> float:
        return float(sum(abs(t.coefficient) * math.pi * max(abs(t.a), abs(t.b)) for t in self.terms))

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "trig",
            "terms": [[t.coefficient, t.a, t.b, t.phi, t.psi] for t in self.terms],
        }


class ProbeCoupling(CouplingFunction):
    """
    p(x, y) = y on [0, 1], extended to a bounded C^1 function of y

    above 1 the cubic ramp 1 + t - t^3/3 (t = y - 1) saturates at 5/3 for y >= 2, below 0
    the cubic ramp y - y^3/3 saturates at -2/3 for y <= -1
    """

    def eval(self, x, y):
        yc = np.clip(y, -1.0, 2.0)
        t = yc - 1.0
        value = np.where(yc > 1.0, 1.0 + t - t ** 3 / 3.0, np.where(yc < 0.0, yc - yc ** 3 / 3.0, yc))
        return (value + _zeros_like(x))[()]

    def grad(self, x, y):
        yc = np.clip(y, -1.0, 2.0)
        t = yc - 1.0
        slope = np.where(yc > 1.0, 1.0 - t * t, np.where(yc < 0.0, 1.0 - yc * yc, 1.0))
        return _zeros_like(x), (slope + _zeros_like(x))[()]

    @property
    def sup_norm(self) -> float:
        return 5.0 / 3.0

    @property
    def lip_const(self) -> float:
        return 1.0

    def describe(self) -> Dict[str, Any]:
        return {"kind": "probe"}


class Sin2TanhCoupling(CouplingFunction):
    """g(x, y) = sin^2(2 pi x) tanh(y)"""

    def eval(self, x, y):
        return np.sin(2.0 * math.pi * x) ** 2 * np.tanh(y)

    def grad(self, x, y):
        g_x = 2.0 * math.pi * np.sin(4.0 * math.pi * x) * np.tanh(y)
        g_y = np.sin(2.0 * math.pi * x) ** 2 / np.cosh(y) ** 2
        return g_x, g_y

    @property
    def sup_norm(self) -> float:
        return 1.0

    @property
    def lip_const(self) -> float:
        return 2.0 * math.pi + 1.0

    def describe(self) -> Dict[str, Any]:
        return {"kind": "sin2tanh"}


class CohomologousCoupling(CouplingFunction):
    """
    g = gtilde o B_alpha - beta * gtilde

    the conjugacy shift of such a g telescopes, so mu_g is a smooth image of mu

    Attributes:
        params: contraction rates (alpha drives B, beta scales gtilde)
        gtilde: the potential being differenced
    """

    def __init__(self, params: Params, gtilde: CouplingFunction) -> None:
        self.params = params
        self.gtilde = gtilde

    def _baker_image(self, x, y):
        alpha = self.params.alpha
        left = np.asarray(x) < HALF
        bx = np.where(left, 2.0 * x, 2.0 * x - 1.0)
        by = np.where(left, alpha * y, alpha * y + (1.0 - alpha))
        return bx[()], by[()]

    def eval(self, x, y):
        bx, by = self._baker_image(x, y)
        return self.gtilde.eval(bx, by) - self.params.beta * self.gtilde.eval(x, y)

    def grad(self, x, y):
        bx, by = self._baker_image(x, y)
        img_x, img_y = self.gtilde.grad(bx, by)
        own_x, own_y = self.gtilde.grad(x, y)
        beta = self.params.beta
        return 2.0 * img_x - beta * own_x, self.params.alpha * img_y - beta * own_y

    @property
    def sup_norm(self) -> float:
        return (1.0 + self.params.beta) * self.gtilde.sup_norm

    @property
    def lip_const(self) -> float:
        return (2.0 + self.params.beta) * self.gtilde.lip_const

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "cohomologous",
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "gtilde": self.gtilde.describe(),
        }


class LinearCombination(CouplingFunction):
    """
    sum of weighted couplings, e.g. g0 + lambda * p for prevalence probes

    Attributes:
        terms: tuple of (weight, CouplingFunction)
    """

    def __init__(self, terms: Sequence[Tuple[float, CouplingFunction]]) -> None:
        self.terms: Tuple[Tuple[float, CouplingFunction], ...] = tuple((float(w), g) for w, g in terms)

    def eval(self, x, y):
        total = _zeros_like(x)
        for weight, g in self.terms:
            total = total + weight * g.eval(x, y)
        return total

    def grad(self, x, y):
        g_x = _zeros_like(x)
        g_y = _zeros_like(x)
        for weight, g in self.terms:
            tx, ty = g.grad(x, y)
            g_x = g_x + weight * tx
            g_y = g_y + weight * ty
        return g_x, g_y

    @property
    def sup_norm(self) -> float:
        return float(sum(abs(w) * g.sup_norm for w, g in self.terms))

    @property
    def lip_const(self) -> float:
        return float(sum(abs(w) * g.lip_const for w, g in self.terms))

    def describe(self) -> Dict[str, Any]:
        return {"kind": "sum", "terms": [[w, g.describe()] for w, g in self.terms]}


def make_trig_coupling(coeffs: Sequence[Tuple[float, float, float]],
                       phases: Optional[Sequence[Tuple[float, float]]] = None) -> CouplingFunction:
    """
    builds a finite trigonometric coupling

    Args:
        coeffs: (c, a, b) per term
        phases: optional (phi, psi) per term, zero when omitted

    Returns:
        a TrigCoupling, or ZeroCoupling for an empty list
    """
    if phases is not None and len(phases) != len(coeffs):
        raise ParameterError(f"got {len(coeffs)} coefficients but {len(phases)} phase pairs")
    if not coeffs:
        return ZeroCoupling()

    terms = []
    for i, (c, a, b) in enumerate(coeffs):
        phi, psi = phases[i] if phases is not None else (0.0, 0.0)
        values = (c, a, b, phi, psi)
        if not all(math.isfinite(v) for v in values):
            raise ParameterError(f"term {i} has a non-finite entry: {values!r}")
        terms.append(TrigTerm(float(c), float(a), float(b), float(phi), float(psi)))
    return TrigCoupling(terms)


def make_figure1_coupling() -> CouplingFunction:
    """g(x, y) = cos(pi x / 2) sin(3 pi y / 2)"""
    return make_trig_coupling([(1.0, 0.5, 1.5)])


def random_trig_coupling(rng: np.random.Generator, sigma: float = 0.5, max_frequency: int = 4) -> CouplingFunction:
    """
    draws a member of the random trigonometric ensemble

    integer frequencies a, b in 0..max_frequency, amplitudes c_ab ~ N(0, (sigma / (1 + a^2 + b^2))^2)
    and phases uniform on [0, 2 pi)
    """
    if sigma < 0.0 or max_frequency < 0:
        raise ParameterError(f"need sigma >= 0 and max_frequency >= 0, got {sigma!r}, {max_frequency!r}")
    coeffs = []
    phases = []
    for a in range(max_frequency + 1):
        for b in range(max_frequency + 1):
            scale = sigma / (1.0 + a * a + b * b)
            coeffs.append((float(rng.normal(0.0, scale)), float(a), float(b)))
            phases.append((float(rng.uniform(0.0, 2.0 * math.pi)), float(rng.uniform(0.0, 2.0 * math.pi))))
    return make_trig_coupling(coeffs, phases)


def make_cohomologous_coupling(params: Params, gtilde: CouplingFunction) -> CouplingFunction:
    return CohomologousCoupling(params, gtilde)


def make_sin2_tanh_coupling() -> CouplingFunction:
    return Sin2TanhCoupling()


def make_probe() -> CouplingFunction:
    return ProbeCoupling()
