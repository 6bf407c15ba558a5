"""Problem generators and ratio experiments.

Three instance families exercise the estimators and the structured
comparisons: Householder-rotated graded spectra (tunable condition number),
stacked orthogonal factors with exponentially graded diagonals, and stacked
random Toeplitz blocks.  run_experiment sweeps a grid of condition numbers
and residual norms, collects estimate/exact ratios per trial, and emits
deterministic CSV/JSON plus a printed summary table.
"""

import csv
import io
import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .estimate import SsceConfig, estimate_kappa2_pce, estimate_kappa2_ssce, \
    estimate_kappa_inf_ssce
from .exact import CondParams, kappa_2ils, kappa_componentwise, kappa_mixed
from .ils import IllConditionedWarning, IlsProblem, NotPositiveDefinite, SignatureSplit
from .structured import (
    StructuredParams,
    kappa_2ils_structured,
    kappa_componentwise_structured,
    kappa_mixed_structured,
    make_basis,
)

MAX_GENERATION_ATTEMPTS = 20


def _planted_xr(m, n, rho, rng):
    x = np.arange(1, n + 1, dtype=float) ** 2
    r = rng.standard_normal(m)
    r *= rho / np.linalg.norm(r)
    return x, r


def _householder(u):
    return np.eye(u.size) - 2.0 * np.outer(u, u)


def gen_example1(m, n, p, l, rho, seed):
    """Graded-spectrum instance: kappa(A) = n**l by construction.

    A applies Householder reflectors on both sides of [D; 0] with
    D = n^{-l} diag(n^l, (n-1)^l, ..., 1); the solution is planted as
    x = (1, 4, ..., n^2) and b = A x + r with ||r|| = rho.  Regenerates with
    fresh draws (up to 20) if rounding spoils definiteness.

    Returns (problem, planted_x, planted_r).
    """
    if p < n or p >= m:
        raise ValueError("need n <= p < m")
    q = m - p
    rng = np.random.default_rng(seed)
    last_exc = None
    for _ in range(MAX_GENERATION_ATTEMPTS):
        up = rng.standard_normal(p)
        up /= np.linalg.norm(up)
        uq = rng.standard_normal(q)
        uq /= np.linalg.norm(uq)
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        T = np.zeros((m, n))
        T[:n, :n] = np.diag(np.arange(n, 0, -1.0) ** l) / float(n) ** l
        T[:p] -= 2.0 * np.outer(up, up @ T[:p])
        T[p:] -= 2.0 * np.outer(uq, uq @ T[p:])
        A = T - 2.0 * np.outer(T @ v, v)
        x, r = _planted_xr(m, n, rho, rng)
        b = A @ x + r
        try:
            return IlsProblem(A, b, SignatureSplit(p, q)), x, r
        except NotPositiveDefinite as exc:
            last_exc = exc
    raise NotPositiveDefinite(
        f"no positive definite instance in {MAX_GENERATION_ATTEMPTS} attempts"
    ) from last_exc


def _orthonormal(rng, rows, cols):
    # orthonormal columns when rows >= cols, orthonormal rows otherwise
    if rows >= cols:
        Q, R = np.linalg.qr(rng.standard_normal((rows, cols)))
        return Q * np.sign(np.diag(R))
    Q, R = np.linalg.qr(rng.standard_normal((cols, rows)))
    return (Q * np.sign(np.diag(R))).T


def gen_example2(m, n, p, kappa, rho, seed):
    """Stacked orthogonal instance [Q1 D U; Q2 D U / 2] with graded D.

    The diagonal of D runs geometrically from 1/kappa up to 1, so
    kappa(A) = kappa.  Returns (problem, planted_x, planted_r).
    """
    if p < n or p >= m:
        raise ValueError("need n <= p < m")
    if n < 2:
        raise ValueError("need n >= 2")
    q = m - p
    rng = np.random.default_rng(seed)
    last_exc = None
    for _ in range(MAX_GENERATION_ATTEMPTS):
        Q1 = _orthonormal(rng, p, n)
        Q2 = _orthonormal(rng, q, n)
        Uo = _orthonormal(rng, n, n)
        d = kappa ** (-(n - 1.0 - np.arange(n)) / (n - 1.0))
        DU = d[:, None] * Uo
        A = np.vstack([Q1 @ DU, 0.5 * (Q2 @ DU)])
        x, r = _planted_xr(m, n, rho, rng)
        b = A @ x + r
        try:
            return IlsProblem(A, b, SignatureSplit(p, q)), x, r
        except NotPositiveDefinite as exc:
            last_exc = exc
    raise NotPositiveDefinite(
        f"no positive definite instance in {MAX_GENERATION_ATTEMPTS} attempts"
    ) from last_exc


def gen_example3(n, rho, seed):
    """Stacked Toeplitz instance A = [B; B/2] with Gaussian generators.

    B is a nonsymmetric random Toeplitz n x n block; p = q = n, so the
    normal matrix is (3/4) B^T B, positive definite whenever B is
    nonsingular.  Only A is structured; b keeps the full (unstructured)
    basis.  Returns (problem, structured_params, planted_x, planted_r).
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    m = 2 * n
    basis_a = make_basis("stacked_scaled", m, n, base_kind="toeplitz", scale=0.5)
    basis_b = make_basis("full", m)
    sparams = StructuredParams(basis_a, basis_b)
    last_exc = None
    for _ in range(MAX_GENERATION_ATTEMPTS):
        c = rng.standard_normal(n)
        row = rng.standard_normal(n)
        row[0] = c[0]
        B = scipy.linalg.toeplitz(c, row)
        A = np.vstack([B, 0.5 * B])
        x, r = _planted_xr(m, n, rho, rng)
        b = A @ x + r
        try:
            return IlsProblem(A, b, SignatureSplit(n, n)), sparams, x, r
        except NotPositiveDefinite as exc:
            last_exc = exc
    raise NotPositiveDefinite(
        f"no positive definite instance in {MAX_GENERATION_ATTEMPTS} attempts"
    ) from last_exc


@dataclass
class ExperimentConfig:
    """Grid, sizes and estimator settings for one ratio experiment."""

    example: str
    n: int
    m: int = 0
    p: int = 0
    kappa_grid: tuple = ()
    rho_grid: tuple = (1e-4, 1e-2, 1.0, 1e2, 1e4)
    trials: int = 100
    seed: int = 0
    delta: float = 1e-2
    epsilon: float = 1e-3
    k: int = 3

    def __post_init__(self):
        if self.example not in ("ex1", "ex2", "ex3"):
            raise ValueError("example must be 'ex1', 'ex2' or 'ex3'")
        if self.example == "ex3":
            self.m = 2 * self.n
            self.p = self.n
        else:
            if not (self.n <= self.p < self.m):
                raise ValueError("need n <= p < m")

    def cells(self):
        if self.example == "ex3":
            return [(None, rho) for rho in self.rho_grid]
        return [(kap, rho) for kap in self.kappa_grid for rho in self.rho_grid]


def table1_config(full=False, **overrides):
    """Ratio experiment for the 2-norm estimators (probabilistic + small-sample)."""
    base = dict(
        example="ex1", m=60, n=36, p=42, kappa_grid=(0, 3, 6),
        rho_grid=(1e-4, 1.0, 1e4), trials=100,
    )
    if full:
        base.update(m=200, n=120, p=140, kappa_grid=(0, 3, 6, 9),
                    rho_grid=(1e-4, 1e-2, 1.0, 1e2, 1e4), trials=500)
    base.update(overrides)
    return ExperimentConfig(**base)


def table2_config(full=False, **overrides):
    """Ratio experiment for the mixed/componentwise small-sample estimator.

    The scaled condition grid stops at 1e8: beyond that the normal matrix
    has condition above 1/eps and the definiteness certificate cannot pass
    in double precision.  The full grid keeps the published ladder; its top
    cells are then excluded trial by trial and reported as failures.
    """
    base = dict(
        example="ex2", m=60, n=25, p=35, kappa_grid=(1e2, 1e4, 1e6, 1e8),
        rho_grid=(1e-4, 1e-2, 1.0, 1e2, 1e4), trials=100,
    )
    if full:
        base.update(m=120, n=50, p=70, trials=200,
                    kappa_grid=(1e2, 1e6, 1e10, 1e12))
    base.update(overrides)
    return ExperimentConfig(**base)


def table3_config(full=False, **overrides):
    """Structured versus unstructured condition number comparison."""
    base = dict(example="ex3", n=24, rho_grid=(1e-4, 1e-2, 1.0, 1e2, 1e4),
                trials=100)
    if full:
        base.update(n=60, trials=200)
    base.update(overrides)
    return ExperimentConfig(**base)


@dataclass
class TrialRecord:
    """One generated instance: exact values, estimates, and their ratios."""

    example: str
    kappa_label: float | None
    rho: float
    trial: int
    values: dict
    elapsed: float = 0.0


_CSV_COLUMNS = {
    "ex1": ["kappa2_exact", "kappa2_pce", "kappa2_ssce", "r_p", "r_s"],
    "ex2": ["kappa_m_exact", "kappa_c_exact", "kappa_m_ssce", "kappa_c_ssce",
            "r_m", "r_c"],
    "ex3": ["kappa2", "kappa2_struct", "r_N", "kappa_m", "kappa_m_struct", "r_M",
            "kappa_c", "kappa_c_struct", "r_C"],
}

RATIO_NAMES = {"ex1": ("r_p", "r_s"), "ex2": ("r_m", "r_c"),
               "ex3": ("r_N", "r_M", "r_C")}


def _run_trial(config, kappa_label, rho, rng):
    params = CondParams()
    if config.example == "ex1":
        problem, _, _ = gen_example1(config.m, config.n, config.p,
                                     kappa_label, rho, rng)
        exact = kappa_2ils(problem, params)
        pce = estimate_kappa2_pce(problem, params, delta=config.delta,
                                  epsilon=config.epsilon, seed=rng)
        ssce = estimate_kappa2_ssce(problem, params,
                                    SsceConfig(k=config.k, rng=rng))
        return {
            "kappa2_exact": exact, "kappa2_pce": pce, "kappa2_ssce": ssce,
            "r_p": pce / exact, "r_s": ssce / exact,
        }
    if config.example == "ex2":
        problem, _, _ = gen_example2(config.m, config.n, config.p,
                                     kappa_label, rho, rng)
        km = kappa_mixed(problem, params)
        kc = kappa_componentwise(problem, params)
        sm, sc = estimate_kappa_inf_ssce(problem, params,
                                         SsceConfig(k=config.k, rng=rng))
        return {
            "kappa_m_exact": km, "kappa_c_exact": kc,
            "kappa_m_ssce": sm, "kappa_c_ssce": sc,
            "r_m": sm / km, "r_c": sc / kc,
        }
    problem, sparams, _, _ = gen_example3(config.n, rho, rng)
    k2 = kappa_2ils(problem, params)
    k2s = kappa_2ils_structured(problem, params, sparams)
    km = kappa_mixed(problem, params)
    kms = kappa_mixed_structured(problem, params, sparams)
    kc = kappa_componentwise(problem, params)
    kcs = kappa_componentwise_structured(problem, params, sparams)
    return {
        "kappa2": k2, "kappa2_struct": k2s, "r_N": k2 / k2s,
        "kappa_m": km, "kappa_m_struct": kms, "r_M": km / kms,
        "kappa_c": kc, "kappa_c_struct": kcs, "r_C": kc / kcs,
    }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def cell_records(self, kappa_label, rho):
        return [rec for rec in self.records
                if rec.kappa_label == kappa_label and rec.rho == rho]

    def cell_stats(self, kappa_label, rho):
        """Mean, variance and max of every ratio in one grid cell."""
        recs = self.cell_records(kappa_label, rho)
        stats = {}
        for name in RATIO_NAMES[self.config.example]:
            vals = np.array([rec.values[name] for rec in recs])
            if vals.size == 0:
                stats[name] = {"mean": np.nan, "var": np.nan, "max": np.nan,
                               "count": 0}
            else:
                stats[name] = {
                    "mean": float(vals.mean()),
                    "var": float(vals.var(ddof=1)) if vals.size > 1 else 0.0,
                    "max": float(vals.max()),
                    "count": int(vals.size),
                }
        return stats

    def to_csv(self, path_or_buf):
        """One row per trial, fixed column order, round-trip float formatting."""
        cols = _CSV_COLUMNS[self.config.example]
        close = False
        if isinstance(path_or_buf, (str, bytes)):
            fh = open(path_or_buf, "w", newline="")
            close = True
        else:
            fh = path_or_buf
        try:
            writer = csv.writer(fh, lineterminator="\n")
            header = ["example", "m", "n", "p", "kappa", "rho", "trial"] + cols
            writer.writerow(header)
            for rec in self.records:
                row = [
                    rec.example, self.config.m, self.config.n, self.config.p,
                    "" if rec.kappa_label is None else repr(float(rec.kappa_label)),
                    repr(float(rec.rho)), rec.trial,
                ]
                row += [repr(float(rec.values[c])) for c in cols]
                writer.writerow(row)
        finally:
            if close:
                fh.close()

    def to_json(self, path):
        cols = _CSV_COLUMNS[self.config.example]
        payload = {
            "config": {
                "example": self.config.example, "m": self.config.m,
                "n": self.config.n, "p": self.config.p,
                "kappa_grid": list(self.config.kappa_grid),
                "rho_grid": list(self.config.rho_grid),
                "trials": self.config.trials, "seed": self.config.seed,
                "delta": self.config.delta, "epsilon": self.config.epsilon,
                "k": self.config.k,
            },
            "records": [
                {
                    "kappa": rec.kappa_label, "rho": rec.rho, "trial": rec.trial,
                    **{c: rec.values[c] for c in cols},
                }
                for rec in self.records
            ],
            "failures": {str(k): v for k, v in self.failures.items()},
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")

    def format_table(self):
        """Mean/variance (mean/max for the structured comparison) per cell."""
        cfg = self.config
        out = io.StringIO()
        ratios = RATIO_NAMES[cfg.example]
        if cfg.example == "ex3":
            header = ["ratio", "stat"] + [f"rho={rho:g}" for rho in cfg.rho_grid]
            rows = []
            for name in ratios:
                for stat in ("mean", "max"):
                    cells = [self.cell_stats(None, rho)[name][stat]
                             for rho in cfg.rho_grid]
                    rows.append([name, stat] + [f"{v:.4f}" for v in cells])
            _write_aligned(out, header, rows)
        else:
            kap_fmt = (lambda k: f"n^{k:g}") if cfg.example == "ex1" else \
                (lambda k: f"{k:.0e}")
            header = ["rho", "ratio"] + [
                f"{kap_fmt(k)} mean|var" for k in cfg.kappa_grid
            ]
            rows = []
            for rho in cfg.rho_grid:
                for name in ratios:
                    cells = []
                    for kap in cfg.kappa_grid:
                        st = self.cell_stats(kap, rho)[name]
                        cells.append(f"{st['mean']:.3e} {st['var']:.3e}")
                    rows.append([f"{rho:g}", name] + cells)
            _write_aligned(out, header, rows)
        total_failed = sum(self.failures.values())
        if total_failed:
            out.write(f"excluded trials (no PD instance): {total_failed} "
                      f"{dict(self.failures)}\n")
        out.write(f"total time: {self.elapsed:.1f} s\n")
        return out.getvalue()


def _write_aligned(out, header, rows):
    widths = [max(len(str(header[i])), *(len(str(r[i])) for r in rows))
              for i in range(len(header))]
    line = "  ".join(str(h).ljust(w) for h, w in zip(header, widths))
    out.write(line + "\n")
    out.write("-" * len(line) + "\n")
    for r in rows:
        out.write("  ".join(str(c).ljust(w) for c, w in zip(r, widths)) + "\n")


def run_experiment(config):
    """Sweep the grid; returns an ExperimentResult with per-trial records.

    Deterministic for a fixed config and seed: every trial draws from its own
    spawned generator, so trials are independent and may be evaluated in any
    order.  Trials whose generator cannot reach a positive definite instance
    are excluded and counted in ``failures``.
    """
    t0 = time.perf_counter()
    result = ExperimentResult(config=config)
    cells = config.cells()
    root = np.random.SeedSequence(config.seed)
    children = root.spawn(len(cells) * config.trials)
    idx = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        warnings.simplefilter("ignore", RuntimeWarning)
        for kappa_label, rho in cells:
            for trial in range(config.trials):
                rng = np.random.default_rng(children[idx])
                idx += 1
                t1 = time.perf_counter()
                try:
                    values = _run_trial(config, kappa_label, rho, rng)
                except NotPositiveDefinite:
                    key = (kappa_label, rho)
                    result.failures[key] = result.failures.get(key, 0) + 1
                    continue
                result.records.append(TrialRecord(
                    example=config.example, kappa_label=kappa_label, rho=rho,
                    trial=trial, values=values,
                    elapsed=time.perf_counter() - t1,
                ))
    result.elapsed = time.perf_counter() - t0
    return result
