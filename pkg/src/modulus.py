from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from loguru import logger
from scipy import stats

from .baker_map import Params
from .cantor import DIGIT_MARGIN, random_digits, suffix_values
from .conjugacy import conjugacy_shift_batch, truncation_depth
from .coupling import CouplingFunction
from .errors import ParameterError
from .rng import StreamFactory

DEFAULT_K_MIN = 6

# shift accuracy used for the pairs; far below the smallest difference resolved
_PAIR_TOLERANCE = 1e-15


def expected_modulus_exponent(p: Params) -> float:
    """
    Hoelder exponent of the conjugacy in y: log(beta)/log(alpha) when alpha < beta, else 1
    """
    if p.alpha < p.beta:
        return math.log(p.beta) / math.log(p.alpha)
    return 1.0


@dataclass(frozen=True)
class ModulusRow:
    """
    statistics of one digit scale k

    Attributes:
        k: index of the first differing y digit
        n_pairs: pairs used
        delta_y_median: median |y - y'|
        max_delta_h: max |h_w(y) - h_w(y')|
        max_ratio: max |h_w(y) - h_w(y')| / |y - y'|^rho_test
    """
    k: int
    n_pairs: int
    delta_y_median: float
    max_delta_h: float
    max_ratio: float


@dataclass
class ModulusTable:
    """
    empirical modulus of continuity of the conjugacy along y

    Attributes:
        rows: one ModulusRow per digit scale
        rho_test: exponent used for the ratio column
        slope: fitted log-log slope of max |dh| against median |dy|, nan when degenerate
        slope_stderr: standard error of the slope
        intercept: fitted intercept
        r_squared: coefficient of determination
        degenerate: True when every |dh| is zero (g = 0)
    """
    rows: List[ModulusRow] = field(default_factory=list)
    rho_test: float = 1.0
    slope: float = math.nan
    slope_stderr: float = math.nan
    intercept: float = math.nan
    r_squared: float = math.nan
    degenerate: bool = False


def digit_scales(p: Params, scale_decades: float, k_min: int = DEFAULT_K_MIN) -> List[int]:
    """digit indices k_min .. k_min + ceil(decades * ln 10 / |ln alpha|)"""
    steps = math.ceil(scale_decades * math.log(10.0) / abs(math.log(p.alpha)))
    return list(range(k_min, k_min + steps + 1))


def _pair_digits(rng: np.random.Generator, n: int, k: int, total: int):
    first = random_digits(rng, n, total)
    second = first.copy()
    second[:, k] = 1 - first[:, k]
    second[:, k + 1:] = random_digits(rng, n, total - k - 1)
    return first, second


def empirical_modulus(p: Params, g: CouplingFunction, pairs_per_scale: int = 2000, scale_decades: float = 4.0,
                      seed: int = 0, k_min: int = DEFAULT_K_MIN, rho_test: Optional[float] = None) -> ModulusTable:
    """
    measures how h_w varies with y at fixed (x, z, w)

    pairs share x and the first k digits of y, differ in digit k and draw later digits
    independently, so |y - y'| is of order alpha^k

    Args:
        p: contraction rates
        g: response coupling
        pairs_per_scale: pairs drawn per digit scale
        scale_decades: decades of |y - y'| to cover
        seed: experiment seed
        k_min: first digit scale
        rho_test: exponent for the ratio column, defaults to the expected exponent

    Returns:
        ModulusTable whose slope estimates the Hoelder exponent
    """
    if pairs_per_scale < 2 or scale_decades <= 0.0 or k_min < 0:
        raise ParameterError("need pairs_per_scale >= 2, scale_decades > 0 and k_min >= 0")
    rho = expected_modulus_exponent(p) if rho_test is None else rho_test
    scales = digit_scales(p, scale_decades, k_min)
    depth = truncation_depth(p.beta, max(g.sup_norm, 1e-300), _PAIR_TOLERANCE)
    streams = StreamFactory(seed)

    table = ModulusTable(rho_test=rho)
    for k in scales:
        rng = streams.generator("modulus", k)
        total = max(k + 1, depth) + DIGIT_MARGIN
        x = rng.random(pairs_per_scale)
        first, second = _pair_digits(rng, pairs_per_scale, k, total)

        dy = np.abs(suffix_values(p.alpha, first, 1)[:, 0] - suffix_values(p.alpha, second, 1)[:, 0])
        dh = np.abs(conjugacy_shift_batch(p, g, x, first, depth) - conjugacy_shift_batch(p, g, x, second, depth))
        keep = dy > 0.0
        dy, dh = dy[keep], dh[keep]

        table.rows.append(ModulusRow(
            k=k,
            n_pairs=int(keep.sum()),
            delta_y_median=float(np.median(dy)),
            max_delta_h=float(dh.max()),
            max_ratio=float((dh / dy ** rho).max()),
        ))

    delta_y = np.array([r.delta_y_median for r in table.rows])
    delta_h = np.array([r.max_delta_h for r in table.rows])
    if np.all(delta_h == 0.0):
        table.degenerate = True
        logger.info("[modulus] every |dh| vanished, the conjugacy is the identity")
        return table

    usable = delta_h > 0.0
    if usable.sum() < 3:
        logger.warning(f"[modulus] only {int(usable.sum())} scales with nonzero |dh|, slope not fitted")
        return table

    fit = stats.linregress(np.log(delta_y[usable]), np.log(delta_h[usable]))
    table.slope = float(fit.slope)
    table.slope_stderr = float(fit.stderr)
    table.intercept = float(fit.intercept)
    table.r_squared = float(fit.rvalue ** 2)
    logger.info(f"[modulus] slope {table.slope:.4f} +- {table.slope_stderr:.4f} "
                f"over {len(scales)} scales, expected {expected_modulus_exponent(p):.4f}")
    return table
