from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from .baker_map import Params, State4, absorbing_bounds
from .conjugacy import conjugacy_shift_batch, truncation_depth
from .cantor import DIGIT_MARGIN, random_digits, suffix_values
from .coupling import (CouplingFunction, ZeroCoupling, make_cohomologous_coupling, make_figure1_coupling,
                       make_probe, make_sin2_tanh_coupling, random_trig_coupling)
from .dimension import (DimensionEstimate, averaged_pointwise_dimension, box_dimension, correlation_dimension,
                        information_dimension_grid)
from .errors import BakerDimError, ConfigError, TelescopingError
from .experiment_config import ExperimentConfig
from .lyapunov import (d1_uncoupled_closed_form, dl_uncoupled_closed_form, entropy_closed_form, kaplan_yorke,
                       lyapunov_exact, lyapunov_numerical, skew_product_dimension, typical_coupled_dimension)
from .modulus import empirical_modulus, expected_modulus_exponent
from .plots import cross_section_svg, scaling_svg, sweep_svg
from .results import ResultManifest, ResultStorage
from .rng import StreamFactory
from .sampling import MeasureSampler, sample_orbit_measure

CROSS_SECTION_EPSILON = 2.0 ** -6
MIN_SURVIVORS = 500
SEAM_STEP = 1e-12


def build_coupling(kind: str, params: Params, streams: StreamFactory, sigma: float = 0.5,
                   max_frequency: int = 4, stream: str = "coupling") -> CouplingFunction:
    """
    coupling named in a config

    Raises:
        ConfigError: for an unknown kind
    """
    if kind == "zero":
        return ZeroCoupling()
    if kind == "figure1":
        return make_figure1_coupling()
    if kind == "trig-random":
        return random_trig_coupling(streams.generator(stream), sigma, max_frequency)
    if kind == "cohomologous":
        return make_cohomologous_coupling(params, make_sin2_tanh_coupling())
    if kind == "probe":
        return make_probe()
    if kind == "sin2tanh":
        return make_sin2_tanh_coupling()
    raise ConfigError(f"unknown coupling kind {kind!r}")


def w_cells_per_y_cell(section: np.ndarray, epsilon: float = CROSS_SECTION_EPSILON) -> np.ndarray:
    """
    number of distinct occupied w-cells inside each occupied y-cell

    Args:
        section: (n, 2) array of (y, w)
        epsilon: grid side
    """
    cells = np.floor(section / epsilon).astype(np.int64)
    unique_cells = np.unique(cells, axis=0)
    _, per_y = np.unique(unique_cells[:, 0], return_counts=True)
    return per_y


def conditional_mean_spread(section: np.ndarray, epsilon: float = CROSS_SECTION_EPSILON,
                            min_count: int = 5) -> float:
    """range of the mean of w over y-cells holding at least min_count points, nan if none do"""
    y_cells = np.floor(section[:, 0] / epsilon).astype(np.int64)
    keys, inverse, counts = np.unique(y_cells, return_inverse=True, return_counts=True)
    sums = np.bincount(inverse.reshape(-1), weights=section[:, 1], minlength=len(keys))
    means = sums[counts >= min_count] / counts[counts >= min_count]
    if len(means) == 0:
        return math.nan
    return float(means.max() - means.min())


class ExperimentRunner:
    """
    runs one configured scenario and writes its artifacts

    Attributes:
        config: validated ExperimentConfig
        params: contraction rates
        streams: StreamFactory keyed by the config seed
        storage: ResultStorage for the output directory
        manifest: ResultManifest filled in by the scenario
        coupling: response coupling g
        drive_coupling: drive coupling f, None when zero
        status: queued, running, done or failed
        started_on: unix time the run started, None before
        finished_on: unix time the run ended, None before
    """

    def __init__(self, config: ExperimentConfig, storage: Optional[ResultStorage] = None) -> None:
        """
        initializes the runner

        Args:
            config: validated ExperimentConfig
            storage: ResultStorage, created on config.output_dir when omitted
        """
        self.config = config
        self.params = Params(config.alpha, config.beta)
        self.streams = StreamFactory(config.seed)
        self.storage = storage if storage is not None else ResultStorage(config.output_dir)
        # threads and output_dir never change results, so they stay out of the manifest
        self.manifest = ResultManifest(scenario=config.scenario,
                                       config=config.model_dump(exclude={"threads", "output_dir"}))

        self.coupling: CouplingFunction = build_coupling(config.coupling, self.params, self.streams,
                                                         config.coupling_sigma, config.coupling_max_frequency)
        drive = build_coupling(config.drive_coupling, self.params.swapped(), self.streams,
                               config.coupling_sigma, config.coupling_max_frequency, stream="drive-coupling")
        self.drive_coupling: Optional[CouplingFunction] = None if drive.is_zero else drive

        self.manifest.couplings["g"] = self.coupling.describe()
        self.manifest.couplings["f"] = drive.describe()

        self.status: str = "queued"
        self.started_on: Optional[float] = None
        self.finished_on: Optional[float] = None

    def run(self) -> ResultManifest:
        """
        runs the configured scenario and writes manifest.json

        Raises:
            BakerDimError: on a hard failure; any exception leaves status "failed" and no .part files
        """
        handlers: Dict[str, Callable[[], None]] = {
            "cross-section": self.run_cross_section,
            "sweep": self.run_sweep,
            "prevalence": self.run_prevalence,
            "counterexample": self.run_counterexample,
            "lyapunov": self.run_lyapunov,
            "dimension": self.run_dimension,
        }
        self.status = "running"
        self.started_on = time.time()
        start = time.perf_counter()
        logger.info(f"[{self.config.scenario}] alpha={self.params.alpha} beta={self.params.beta} "
                    f"g={self.config.coupling} seed={self.config.seed}")
        try:
            handlers[self.config.scenario]()
            self.storage.write_manifest(self.manifest, wall_clock=time.perf_counter() - start)
        except TelescopingError:
            # a failed certificate is a verdict failure and keeps its manifest
            self.status = "failed"
            self.storage.write_manifest(self.manifest, wall_clock=time.perf_counter() - start)
            raise
        except Exception:
            self.status = "failed"
            raise
        finally:
            self.storage.cleanup()
            self.finished_on = time.time()

        self.status = "done"
        logger.info(f"[{self.config.scenario}] {'all verdicts pass' if self.manifest.passed else 'verdict failure'}, "
                    f"results in {self.storage.output_dir}")
        return self.manifest

    # sampling helpers

    def _sampler(self, coupling: Optional[CouplingFunction], stream: str, threads: Optional[int] = None,
                 x_window: Optional[Tuple[float, float]] = None,
                 z_window: Optional[Tuple[float, float]] = None) -> MeasureSampler:
        return MeasureSampler(self.params, coupling, seed=self.config.seed,
                              tolerance=self.config.conjugacy_tolerance,
                              threads=threads or self.config.threads, stream=stream,
                              x_window=x_window, z_window=z_window)

    def _sample_measure(self, coupling: Optional[CouplingFunction], stream: str,
                        threads: Optional[int] = None) -> np.ndarray:
        if self.drive_coupling is not None:
            return sample_orbit_measure(self.params, coupling, self.config.samples, seed=self.config.seed,
                                        f=self.drive_coupling, stream=stream)
        return self._sampler(coupling, stream, threads).sample(self.config.samples)

    def _correlation(self, points: np.ndarray, name: str) -> Optional[DimensionEstimate]:
        try:
            estimate = correlation_dimension(points, self.config.window(), self.config.target_pairs)
        except BakerDimError as e:
            self.manifest.failures.append(f"{name}: {e}")
            logger.warning(f"[{self.config.scenario}] {name} estimation failed: {e}")
            return None
        self._write_scales(name, estimate)
        return estimate

    def _write_scales(self, name: str, estimate: DimensionEstimate) -> None:
        lo, hi = estimate.scale_window
        rows = []
        for s in estimate.counts:
            fitted = lo <= s.epsilon <= hi and s.epsilon not in estimate.dropped
            rows.append([s.epsilon, s.statistic, s.count, s.support, int(fitted)])
        self.storage.write_csv(f"{name}_scales.csv", ["epsilon", "statistic", "count", "support", "fitted"], rows)

    @staticmethod
    def _fit_details(estimate: DimensionEstimate) -> dict:
        return {
            "r_squared": estimate.r_squared,
            "method": estimate.method,
            "scale_window": list(estimate.scale_window),
            "dropped_scales": estimate.dropped,
        }

    # scenarios

    def run_cross_section(self) -> None:
        """(y, w) cross-section of mu_g and mu over a small (x, z) window"""
        cfg = self.config
        x_window = (cfg.cross_section_x, cfg.cross_section_x + cfg.window_width)
        z_window = (cfg.cross_section_z, cfg.cross_section_z + cfg.window_width)

        coupled = self._sampler(self.coupling, "cross-section", x_window=x_window,
                                z_window=z_window).sample(cfg.samples)
        uncoupled = self._sampler(None, "cross-section", x_window=x_window, z_window=z_window).sample(cfg.samples)
        if len(coupled) < MIN_SURVIVORS:
            self.manifest.note(f"only {len(coupled)} points in the window, enlarge window_width or samples")

        sections = {"coupled": coupled[:, [1, 3]], "uncoupled": uncoupled[:, [1, 3]]}
        self.storage.write_points("cross_section.csv", sections["coupled"], ["y", "w"])
        self.storage.write_points("cross_section_uncoupled.csv", sections["uncoupled"], ["y", "w"])
        self.storage.write_bytes("cross_section.svg", cross_section_svg([
            (f"g = {cfg.coupling}", sections["coupled"]),
            ("g = 0", sections["uncoupled"]),
        ]))

        for label, section in sections.items():
            per_y = w_cells_per_y_cell(section)
            spread = conditional_mean_spread(section)
            details = {"epsilon": CROSS_SECTION_EPSILON, "median_w_cells": float(np.median(per_y)),
                       "survivors": len(section)}
            if label == "coupled" and not self.coupling.is_zero:
                self.manifest.check_at_least("max w-cells per y-cell (coupled)", float(per_y.max()),
                                             float(cfg.min_w_cells), **details)
            else:
                self.manifest.report(f"max w-cells per y-cell ({label})", float(per_y.max()), **details)
            self.manifest.report(f"conditional w-mean spread ({label})", spread, epsilon=CROSS_SECTION_EPSILON)

        self.manifest.references["D1(mu)"] = d1_uncoupled_closed_form(self.params)
        self.manifest.references["D_L"] = dl_uncoupled_closed_form(self.params).value
        if cfg.estimate_modulus:
            self._modulus()

    def _modulus(self) -> None:
        cfg = self.config
        table = empirical_modulus(self.params, self.coupling, cfg.modulus_pairs, cfg.modulus_decades, cfg.seed)
        self.storage.write_csv("modulus.csv", ["k", "pairs", "delta_y_median", "max_delta_h", "max_ratio"],
                               [[r.k, r.n_pairs, r.delta_y_median, r.max_delta_h, r.max_ratio] for r in table.rows])
        rho = expected_modulus_exponent(self.params)
        details = {"rho_test": table.rho_test, "r_squared": table.r_squared, "degenerate": table.degenerate}
        if table.degenerate or self.params.alpha == self.params.beta:
            self.manifest.report("modulus slope", table.slope, table.slope_stderr, **details)
        elif self.params.alpha < self.params.beta:
            self.manifest.check_close("modulus slope", table.slope, rho, cfg.modulus_tolerance,
                                      table.slope_stderr, **details)
        else:
            self.manifest.check_at_least("modulus slope", table.slope, 1.0 - cfg.modulus_tolerance, **details)

    def run_sweep(self) -> None:
        """closed-form D1, D_L and the factor sum over a beta grid at fixed alpha"""
        cfg = self.config
        alpha = cfg.alpha
        betas = np.round(np.linspace(cfg.beta_min, cfg.beta_max, cfg.beta_steps), 12)

        def row(beta: float) -> List[float]:
            p = Params(alpha, float(beta))
            dl = dl_uncoupled_closed_form(p)
            d2 = math.nan
            if cfg.sweep_samples > 0:
                label = repr(float(beta))
                sampler = MeasureSampler(p, None, seed=cfg.seed, threads=1, stream=f"sweep-{label}")
                estimate = self._correlation(sampler.sample(cfg.sweep_samples), f"sweep_{label}")
                d2 = estimate.value if estimate is not None else math.nan
            return [float(beta), d1_uncoupled_closed_form(p), dl.value, float(dl.j_index),
                    skew_product_dimension(p), typical_coupled_dimension(p), d2]

        rows: Dict[int, List[float]] = {}
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {pool.submit(row, beta): i for i, beta in enumerate(betas)}
            for future in as_completed(futures):
                rows[futures[future]] = future.result()
        table = np.array([rows[i] for i in range(len(betas))])

        self.storage.write_csv("sweep.csv", ["beta", "D1", "D_L", "j", "skew_product", "D1_typical_coupled",
                                             "D2_estimate"], table.tolist())
        self.storage.write_bytes("sweep.svg", sweep_svg(
            table[:, 0], {"D1": table[:, 1], "D_L": table[:, 2]}, {"D2 estimate": table[:, 6]},
            title=f"alpha = {alpha}"))

        self.manifest.check_below("max over beta of D1 - D_L", float(np.max(table[:, 1] - table[:, 2])), 1e-12)
        seam = abs(dl_uncoupled_closed_form(Params(alpha, 0.25 - SEAM_STEP)).value
                   - dl_uncoupled_closed_form(Params(alpha, 0.25 + SEAM_STEP)).value)
        self.manifest.check_below("D_L jump across beta = 1/4", seam, 1e-10)
        at_alpha = np.nonzero(np.isclose(betas, alpha, rtol=0.0, atol=1e-12))[0]
        if len(at_alpha):
            i = int(at_alpha[0])
            self.manifest.check_close("D_L - D1 at beta = alpha", float(table[i, 2] - table[i, 1]), 0.0, 1e-12)
        off_alpha = ~np.isclose(betas, alpha, rtol=0.0, atol=1e-12)
        if off_alpha.any():
            self.manifest.check_at_least("min over beta != alpha of D_L - D1",
                                         float(np.min(table[off_alpha, 2] - table[off_alpha, 1])), 1e-15)

    def run_prevalence(self) -> None:
        """D2 of mu_g over an ensemble of random trigonometric couplings, against D_L"""
        cfg = self.config
        p = self.params
        dl = dl_uncoupled_closed_form(p).value
        d1 = d1_uncoupled_closed_form(p)
        self.manifest.references.update({"D_L": dl, "D1(mu)": d1})
        self.manifest.couplings["ensemble"] = {
            "law": "c_ab ~ N(0, (sigma / (1 + a^2 + b^2))^2), phases uniform on [0, 2 pi)",
            "sigma": cfg.coupling_sigma,
            "max_frequency": cfg.coupling_max_frequency,
        }

        members = [random_trig_coupling(self.streams.generator("ensemble", i), cfg.coupling_sigma,
                                        cfg.coupling_max_frequency) for i in range(cfg.ensemble_size)]

        def estimate(i: int) -> Tuple[int, Optional[DimensionEstimate]]:
            points = self._sampler(members[i], f"member-{i}", threads=1).sample(cfg.samples)
            return i, self._correlation(points, f"member_{i}")

        results: Dict[int, Optional[DimensionEstimate]] = {}
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(estimate, i) for i in range(cfg.ensemble_size)]
            for future in as_completed(futures):
                i, value = future.result()
                results[i] = value

        rows = []
        within = 0
        for i in range(cfg.ensemble_size):
            est = results[i]
            value = est.value if est is not None else math.nan
            ok = est is not None and abs(value - dl) <= cfg.dimension_tolerance
            within += int(ok)
            rows.append([i, members[i].sup_norm, value, est.slope_stderr if est else math.nan,
                         est.r_squared if est else math.nan, int(ok)])
            if est is not None:
                self.manifest.report(f"D2(mu_g) member {i}", est.value, est.slope_stderr,
                                     reference_D_L=dl, **self._fit_details(est))
        self.storage.write_csv("prevalence.csv", ["member", "sup_norm", "D2", "stderr", "r_squared", "within"], rows)
        self.manifest.check_at_least("fraction of members with |D2 - D_L| <= tolerance",
                                     within / cfg.ensemble_size, cfg.pass_fraction,
                                     tolerance=cfg.dimension_tolerance)

        if cfg.include_uncoupled:
            est = self._correlation(self._sampler(None, "member-uncoupled").sample(cfg.samples), "member_uncoupled")
            if est is not None:
                self.manifest.check_close("D2(mu) uncoupled member", est.value, d1, cfg.dimension_tolerance,
                                          est.slope_stderr, **self._fit_details(est))

        probe = make_probe()
        for lam in cfg.probe_lambdas:
            g = members[0] + probe.scaled(lam)
            est = self._correlation(self._sampler(g, f"probe-{lam!r}").sample(cfg.samples), f"probe_{lam!r}")
            if est is not None:
                self.manifest.report(f"D2(mu_g) on g0 + {lam!r} p", est.value, est.slope_stderr,
                                     reference_D_L=dl, **self._fit_details(est))

    def run_counterexample(self) -> None:
        """cohomologous coupling: telescoping certificate, then D2 against D1(mu)"""
        cfg = self.config
        p = self.params
        gtilde = make_sin2_tanh_coupling() if cfg.gtilde == "sin2tanh" else ZeroCoupling()
        g = make_cohomologous_coupling(p, gtilde)
        self.manifest.couplings["g"] = g.describe()
        d1 = d1_uncoupled_closed_form(p)
        dl = dl_uncoupled_closed_form(p).value
        self.manifest.references.update({"D1(mu)": d1, "D_L": dl})

        residual, depth = self.telescoping_residual(g, gtilde)
        self.manifest.check_below("telescoping residual", residual, cfg.tolerance_telescoping,
                                  truncation_depth=depth, points=cfg.telescoping_points)
        if not residual <= cfg.tolerance_telescoping:
            raise TelescopingError(f"telescoping residual {residual:.3e} exceeds {cfg.tolerance_telescoping:.1e} "
                                   f"at depth {depth}")

        est = self._correlation(self._sampler(g, "counterexample").sample(cfg.samples), "counterexample")
        if est is None:
            return
        self.manifest.check_close("D2(mu_g)", est.value, d1, cfg.dimension_tolerance, est.slope_stderr,
                                  **self._fit_details(est))
        self.manifest.check_below("D2(mu_g) below D_L - gap_margin", est.value, dl - cfg.gap_margin)

    def telescoping_residual(self, g: CouplingFunction, gtilde: CouplingFunction) -> Tuple[float, int]:
        """
        max |shift - gtilde(x, y)| over sampled drive points

        the shift of g = gtilde o B - beta gtilde telescopes to gtilde(x, y) - beta^N gtilde(x_{-N}, y_{-N}),
        and N is taken from the tail bound so the second term is below a tenth of the tolerance
        """
        cfg = self.config
        p = self.params
        bound = max(g.sup_norm, gtilde.sup_norm)
        depth = truncation_depth(p.beta, bound, cfg.tolerance_telescoping / 10.0)
        rng = self.streams.generator("telescoping")
        x = rng.random(cfg.telescoping_points)
        digits = random_digits(rng, cfg.telescoping_points, depth + DIGIT_MARGIN)
        y = suffix_values(p.alpha, digits, 1)[:, 0]
        shift = conjugacy_shift_batch(p, g, x, digits, depth)
        expected = np.asarray(gtilde.eval(x, y), dtype=float)
        return float(np.max(np.abs(shift - expected))), depth

    def run_lyapunov(self) -> None:
        """numerical exponents against the closed forms, Kaplan-Yorke dimension and entropy"""
        cfg = self.config
        p = self.params
        exact = lyapunov_exact(p)
        spectrum = self._numerical_spectrum(p, self.coupling, self.drive_coupling, "lyapunov")

        rows = [[i + 1, num, ref] for i, (num, ref) in enumerate(zip(spectrum.values, exact.values))]
        self.storage.write_csv("exponents.csv", ["index", "numerical", "closed_form"], rows)
        self.storage.write_csv("convergence.csv", ["renormalisation", "chi1", "chi2", "chi3", "chi4"],
                               [[k + 1, *values] for k, values in enumerate(spectrum.convergence_history)])
        if not spectrum.converged:
            self.manifest.note("running exponent estimates had not settled")
        if spectrum.restarts:
            self.manifest.note(f"orbit perturbed off a branch boundary {spectrum.restarts} times")

        dl_numerical = kaplan_yorke(spectrum)
        entropy = sum(v for v in spectrum.values if v > 0.0)
        self.manifest.references.update({"D_L": dl_uncoupled_closed_form(p).value,
                                         "entropy": entropy_closed_form()})
        if self.drive_coupling is not None:
            # no closed form with f != 0, exploratory only
            for i, value in enumerate(spectrum.values):
                self.manifest.report(f"chi_{i + 1}", value)
            self.manifest.report("D_L (numerical)", dl_numerical.value, j_index=dl_numerical.j_index)
            self.manifest.report("entropy", entropy)
            return

        for i, (value, reference) in enumerate(zip(spectrum.values, exact.values)):
            self.manifest.check_close(f"chi_{i + 1}", value, reference, cfg.exponent_tolerance_nats)
        self.manifest.check_close("D_L (numerical)", dl_numerical.value, dl_uncoupled_closed_form(p).value,
                                  cfg.exponent_tolerance_nats, j_index=dl_numerical.j_index)
        self.manifest.check_close("entropy", entropy, entropy_closed_form(), cfg.exponent_tolerance_nats)

        for t in range(cfg.random_triples):
            rng = self.streams.generator("triples", t)
            triple = Params(float(rng.uniform(0.02, 0.48)), float(rng.uniform(0.02, 0.48)))
            g = random_trig_coupling(rng, cfg.coupling_sigma, cfg.coupling_max_frequency)
            numerical = self._numerical_spectrum(triple, g, None, f"triple-{t}")
            deviation = max(abs(a - b) for a, b in zip(numerical.values, lyapunov_exact(triple).values))
            self.manifest.check_close(f"triple {t} max |chi - closed form|", deviation, 0.0,
                                      cfg.exponent_tolerance_nats, alpha=triple.alpha, beta=triple.beta)

    def _numerical_spectrum(self, p: Params, g: CouplingFunction, f: Optional[CouplingFunction], stream: str):
        rng = self.streams.generator(stream)
        box = absorbing_bounds(p, g, 0.0, f)
        start = State4(float(rng.random()), float(rng.uniform(*box.y_interval)),
                       float(rng.random()), float(rng.uniform(*box.w_interval)))
        return lyapunov_numerical(p, g, start, self.config.lyapunov_iterations, self.config.renorm_every,
                                  rng=rng, f=f)

    def reference_dimension(self) -> Optional[float]:
        """value D2(mu_g) is checked against, None when no verdict applies"""
        if self.drive_coupling is not None:
            return None
        if self.coupling.is_zero or self.config.coupling == "cohomologous":
            return d1_uncoupled_closed_form(self.params)
        return typical_coupled_dimension(self.params)

    def run_dimension(self) -> None:
        """dimension estimates of mu_g with the closed-form reference"""
        cfg = self.config
        p = self.params
        self.manifest.references.update({
            "D1(mu)": d1_uncoupled_closed_form(p),
            "D_L": dl_uncoupled_closed_form(p).value,
            "D1(mu_g) typical": typical_coupled_dimension(p),
        })
        reference = self.reference_dimension()
        if reference is None:
            self.manifest.note("drive coupling f != 0: estimates are exploratory, no verdicts")

        points = self._sample_measure(self.coupling, "dimension")
        if cfg.dump_samples and self.drive_coupling is None:
            self._dump_samples()

        curves: Dict[str, np.ndarray] = {}
        log_eps = np.log(np.array(cfg.window()))
        estimate = self._correlation(points, "correlation")
        if estimate is not None:
            curves["log C"] = np.log([max(s.statistic, 1e-300) for s in estimate.counts])
            self._record("D2(mu_g)", estimate, reference)

        box = box_dimension(points, cfg.window())
        self._write_scales("box", box)
        if reference is None:
            self.manifest.report("box dimension of the sample", box.value, box.slope_stderr,
                                 **self._fit_details(box))
        else:
            # upper box dimension of the attractor is bounded by D_L
            self.manifest.check_below("box dimension of the sample below D_L + tolerance", box.value,
                                      dl_uncoupled_closed_form(p).value + cfg.dimension_tolerance,
                                      **self._fit_details(box))

        if cfg.estimate_information:
            info = information_dimension_grid(points, cfg.window())
            self._write_scales("information", info)
            curves["sum p log p"] = np.array([s.statistic for s in info.counts])
            self._record("D1(mu_g) grid", info, reference)

        if cfg.estimate_pointwise:
            pointwise = averaged_pointwise_dimension(points, self.streams.generator("pointwise"), cfg.window())
            self._write_scales("pointwise", pointwise)
            self._record("averaged pointwise dimension", pointwise, reference)

        if cfg.compare_uncoupled:
            baseline = self._correlation(self._sampler(None, "dimension-uncoupled").sample(cfg.samples),
                                         "correlation_uncoupled")
            if baseline is not None:
                self._record("D2(mu)", baseline, d1_uncoupled_closed_form(p))
                if estimate is not None and reference is not None:
                    self.manifest.check_close("D2(mu_g) - D2(mu)", estimate.value - baseline.value,
                                              reference - d1_uncoupled_closed_form(p), cfg.dimension_tolerance)

        if curves:
            self.storage.write_bytes("scaling.svg", scaling_svg(log_eps, curves, title=f"g = {cfg.coupling}"))

    def _record(self, quantity: str, estimate: DimensionEstimate, reference: Optional[float]) -> None:
        if reference is None:
            self.manifest.report(quantity, estimate.value, estimate.slope_stderr, **self._fit_details(estimate))
        else:
            self.manifest.check_close(quantity, estimate.value, reference, self.config.dimension_tolerance,
                                      estimate.slope_stderr, **self._fit_details(estimate))

    def _dump_samples(self) -> None:
        sampler = self._sampler(self.coupling, "dimension")
        block = sampler.sample_block(0, min(self.config.dump_samples, self.config.samples))
        rows = []
        for state, y_digits, w_digits in zip(block.states, block.y_digits, block.w_digits):
            rows.append([*state.tolist(), "".join(map(str, y_digits.tolist())),
                         "".join(map(str, w_digits.tolist()))])
        self.storage.write_csv("samples.csv", ["x", "y", "z", "w", "y_digits", "w_digits"], rows)
