from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from loguru import logger

from .baker_map import BitOrbit, Params, State4, absorbing_bounds
from .cantor import DIGIT_MARGIN, cantor_values, random_digits, sample_cantor
from .conjugacy import (DEFAULT_TOLERANCE, PastHistory, conjugacy_map, conjugacy_shift_batch,
                        truncation_depth)
from .coupling import CouplingFunction
from .errors import ParameterError
from .rng import BLOCK_SIZE, StreamFactory, block_layout

Window = Tuple[float, float]


def sample_uncoupled_measure(p: Params, rng: np.random.Generator, depth: int = DIGIT_MARGIN) -> State4:
    """
    one point of mu = (Leb x nu_alpha) x (Leb x nu_beta)

    Args:
        p: contraction rates
        rng: random source
        depth: Cantor digits drawn per coordinate, error at most max(alpha, beta)^depth
    """
    x = float(rng.random())
    y = sample_cantor(p.alpha, rng, depth).value
    z = float(rng.random())
    w = sample_cantor(p.beta, rng, depth).value
    return State4(x, y, z, w)


def sample_coupled_measure(p: Params, g: CouplingFunction, rng: np.random.Generator,
                           tolerance: float = DEFAULT_TOLERANCE) -> State4:
    """
    one point of mu_g, the image of a mu-distributed point under the conjugacy

    the y digits are drawn first and the past of (x, y) is read off them, so the history
    never goes through repeated inverse steps
    """
    depth = truncation_depth(p.beta, g.sup_norm, tolerance)
    x = float(rng.random())
    y_point = sample_cantor(p.alpha, rng, depth + DIGIT_MARGIN)
    z = float(rng.random())
    w = sample_cantor(p.beta, rng, DIGIT_MARGIN).value
    history = PastHistory.from_digits(p, x, y_point.digits, depth)
    return conjugacy_map(p, g, State4(x, y_point.value, z, w), history, depth).image


def _window_values(rng: np.random.Generator, size: int, window: Optional[Window]) -> np.ndarray:
    u = rng.random(size)
    if window is None:
        return u
    lo, hi = window
    return lo + (hi - lo) * u


@dataclass
class SampleBlock:
    """
    one block of samples with the digits they were built from

    Attributes:
        index: block index in sample order
        states: (m, 4) array
        y_digits: (m, Dy) uint8 digits of y
        w_digits: (m, Dw) uint8 digits of the uncoupled w
    """
    index: int
    states: np.ndarray
    y_digits: np.ndarray
    w_digits: np.ndarray


class MeasureSampler:
    """
    draws samples of mu (g = None) or mu_g in parallel blocks

    each block uses its own counter-based stream, blocks are merged in index order, so the
    output depends on the seed and never on the thread count

    Attributes:
        params: contraction rates
        coupling: response coupling, None for the uncoupled measure
        streams: StreamFactory for the experiment seed
        stream: stream name for this sampler
        tolerance: conjugacy tail tolerance
        depth: conjugacy truncation depth (0 when uncoupled)
        threads: worker threads
        x_window: optional [lo, hi) restricting x (exact conditional sampling)
        z_window: optional [lo, hi) restricting z
    """

    def __init__(self, params: Params, coupling: Optional[CouplingFunction] = None, seed: int = 0,
                 tolerance: float = DEFAULT_TOLERANCE, threads: int = 1, stream: str = "measure",
                 x_window: Optional[Window] = None, z_window: Optional[Window] = None) -> None:
        """
        initializes the sampler

        Raises:
            ParameterError: on a bad thread count or window
        """
        if threads < 1:
            raise ParameterError(f"need at least one thread, got {threads!r}")
        for name, window in (("x_window", x_window), ("z_window", z_window)):
            if window is not None and not 0.0 <= window[0] < window[1] <= 1.0:
                raise ParameterError(f"{name} must satisfy 0 <= lo < hi <= 1, got {window!r}")

        self.params = params
        self.coupling = None if coupling is None or coupling.is_zero else coupling
        self.streams = StreamFactory(seed)
        self.stream = stream
        self.tolerance = tolerance
        self.threads = threads
        self.x_window = x_window
        self.z_window = z_window

        if self.coupling is None:
            self.depth = 0
        else:
            self.depth = truncation_depth(params.beta, self.coupling.sup_norm, tolerance)

    @property
    def y_digit_count(self) -> int:
        return self.depth + DIGIT_MARGIN

    def sample_block(self, block: int, size: int) -> SampleBlock:
        """draws one block; fixed draw order x, y digits, z, w digits"""
        rng = self.streams.generator(self.stream, block)
        p = self.params

        x = _window_values(rng, size, self.x_window)
        y_digits = random_digits(rng, size, self.y_digit_count)
        z = _window_values(rng, size, self.z_window)
        w_digits = random_digits(rng, size, DIGIT_MARGIN)

        y = cantor_values(p.alpha, y_digits)
        w = cantor_values(p.beta, w_digits)
        if self.coupling is not None:
            w = w + conjugacy_shift_batch(p, self.coupling, x, y_digits, self.depth)
        return SampleBlock(block, np.column_stack([x, y, z, w]), y_digits, w_digits)

    def sample_blocks(self, n: int, block_size: int = BLOCK_SIZE) -> Dict[int, SampleBlock]:
        layout = block_layout(n, block_size)
        blocks: Dict[int, SampleBlock] = {}
        if self.threads == 1 or len(layout) == 1:
            for b, size in layout:
                blocks[b] = self.sample_block(b, size)
            return blocks

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            futures = {pool.submit(self.sample_block, b, size): b for b, size in layout}
            for future in as_completed(futures):
                blocks[futures[future]] = future.result()
        return blocks

    def sample(self, n: int) -> np.ndarray:
        """
        draws n samples

        Returns:
            (n, 4) array in block order
        """
        if n == 0:
            return np.empty((0, 4), dtype=float)
        blocks = self.sample_blocks(n)
        states = np.concatenate([blocks[b].states for b in sorted(blocks)], axis=0)
        logger.debug(f"[sampling] {n} samples from stream '{self.stream}', depth {self.depth}, "
                     f"{len(blocks)} blocks on {self.threads} threads")
        return states


def sample_orbit_measure(p: Params, g: Optional[CouplingFunction], n: int, seed: int = 0,
                         walkers: int = 64, transient: int = 100, f: Optional[CouplingFunction] = None,
                         stream: str = "orbit") -> np.ndarray:
    """
    samples of the invariant measure taken along forward orbits

    walkers start uniformly in the absorbing box, run `transient` steps, and are then
    recorded every step; covers f != 0 where no closed-form conjugacy exists

    Returns:
        (n, 4) array in time-major order (all walkers at step t, then step t + 1, ...)
    """
    if walkers < 1 or transient < 0 or n < 0:
        raise ParameterError(f"need walkers >= 1, transient >= 0, n >= 0; got {walkers}, {transient}, {n}")
    rng = StreamFactory(seed).generator(stream)
    box = absorbing_bounds(p, g, 0.0, f)
    start = np.column_stack([
        rng.random(walkers),
        rng.uniform(*box.y_interval, size=walkers),
        rng.random(walkers),
        rng.uniform(*box.w_interval, size=walkers),
    ])
    orbit = BitOrbit(p, g, rng, start, f)
    for _ in range(transient):
        orbit.step()

    steps = math.ceil(n / walkers) if n else 0
    frames = []
    for _ in range(steps):
        orbit.perturb_boundary()
        frames.append(orbit.states())
        orbit.step()
    if orbit.restarts:
        logger.info(f"[sampling] perturbed {orbit.restarts} walkers off a branch boundary")
    if not frames:
        return np.empty((0, 4), dtype=float)
    return np.concatenate(frames, axis=0)[:n]


def batch_means(values: np.ndarray, n_batches: int = 20) -> Tuple[float, float]:
    """
    mean and batch-means standard error of a correlated series

    Raises:
        ParameterError: if there are fewer values than batches
    """
    values = np.asarray(values, dtype=float)
    if n_batches < 2 or len(values) < n_batches:
        raise ParameterError(f"need at least {max(n_batches, 2)} values for {n_batches} batches, got {len(values)}")
    usable = len(values) - len(values) % n_batches
    means = values[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(values.mean()), float(means.std(ddof=1) / math.sqrt(n_batches))


def birkhoff_average(p: Params, g: Optional[CouplingFunction], observable: Callable[[np.ndarray], np.ndarray],
                     n_steps: int, seed: int = 0, transient: int = 100,
                     f: Optional[CouplingFunction] = None) -> Tuple[float, float]:
    """
    time average of observable along one forward orbit

    Args:
        observable: maps an (m, 4) array of states to m values

    Returns:
        (mean, standard error) from batch means
    """
    states = sample_orbit_measure(p, g, n_steps, seed=seed, walkers=1, transient=transient, f=f,
                                  stream="birkhoff")
    return batch_means(observable(states))


def ensemble_average(states: np.ndarray, observable: Callable[[np.ndarray], np.ndarray]) -> Tuple[float, float]:
    """mean and standard error of observable over independent samples"""
    values = np.asarray(observable(states), dtype=float)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values)))
