"""Metropolis contraction of a toroidal rank-4 tensor network.

The full contraction is written as a hierarchical sum: fixing the
vertical index vectors s_1 ... s_N (one per row of vertical links, with
wrap s_{N+1} = s_1), each row collapses to the trace of a matrix product
over its columns, giving per-row values r_i.  A split row n partitions
the product into L = r_1 ... r_n and R = r_{n+1} ... r_N, and the sum

    C = sum_S |L(S)|^2 * R(S)/conj(L(S)) = sum_S mu(S) f(S)

is sampled by a Metropolis walk on S with the positive measure
mu = |L|^2.  Because the sampler normalizes mu implicitly, the partition
sum Z = sum_S mu(S) is recovered from the same chain through
Z = |{S}| / mean(1/mu), and the estimate is Z * mean(f).

The chain itself is the hot loop: it runs in the compiled extension
when available and in `_mc_core` otherwise (identical semantics; see
``KERNEL_NAME``).  Proposals redraw one component of one vertical
vector, so each move costs two row re-evaluations.

Only single-level sampling is implemented; recursively subdividing the
summation space into nested Monte-Carlo estimates is a deliberate
non-goal here.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _mc_core

if os.environ.get("TENSORGRID_PURE_PYTHON"):
    _default_kernel = _mc_core
else:
    try:
        from . import _mc_kernel as _default_kernel
    except ImportError:
        _default_kernel = _mc_core

KERNEL_NAME = "compiled" if _default_kernel is not _mc_core else "python"

__all__ = [
    "TorusNetwork",
    "McConfig",
    "McResult",
    "ErgodicityError",
    "row_matrix",
    "mc_contract",
    "detailed_balance_check",
    "torus_contract_exact",
    "uniform_torus",
    "random_torus",
    "KERNEL_NAME",
]


class ErgodicityError(RuntimeError):
    """The measure could not be entered or the walk cannot move."""


class TorusNetwork:
    """N x M grid of rank-4 tensors, periodic in both directions.

    ``tensors`` has shape (n_rows, n_cols, D, D, D, D) with leg order
    (up, down, left, right); all legs share the same dimension D.
    """

    def __init__(self, tensors):
        t = np.ascontiguousarray(tensors, dtype=np.complex128)
        if t.ndim != 6 or len(set(t.shape[2:])) != 1:
            raise ValueError(
                "expected shape (rows, cols, D, D, D, D), got " + str(t.shape)
            )
        if not np.all(np.isfinite(t)):
            raise ValueError("tensor entries must be finite")
        self.tensors = t
        self.n_rows, self.n_cols = t.shape[:2]
        self.dim = t.shape[2]


def uniform_torus(n_rows: int, n_cols: int, d: int = 2, value=1.0) -> TorusNetwork:
    return TorusNetwork(
        np.full((n_rows, n_cols, d, d, d, d), value, dtype=np.complex128)
    )


def random_torus(
    rng, n_rows: int, n_cols: int, d: int = 2, positive: bool = False
) -> TorusNetwork:
    shape = (n_rows, n_cols, d, d, d, d)
    if positive:
        data = rng.random(shape)
    else:
        data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return TorusNetwork(data)


@dataclass
class McConfig:
    n_samples: int = 2000
    burn_in: int | None = None  # moves; default 10 * rows * cols
    thinning: int | None = None  # moves per sample; default rows * cols
    seed: int = 0
    split_row: int | None = None  # rows 0..split-1 form the measure
    chains: int = 1
    n_bins: int = 32

    def resolved(self, t: TorusNetwork):
        size = t.n_rows * t.n_cols
        burn = 10 * size if self.burn_in is None else self.burn_in
        thin = size if self.thinning is None else self.thinning
        split = self.split_row if self.split_row is not None else max(1, t.n_rows // 2)
        if not 1 <= split <= t.n_rows:
            raise ValueError(f"split_row must be in [1, {t.n_rows}]")
        if burn < 0 or thin < 1 or self.chains < 1:
            raise ValueError("invalid sampling parameters")
        if not self.n_samples > burn:
            raise ValueError("need n_samples > burn_in")
        return burn, thin, split


@dataclass
class McResult:
    estimate: complex
    std_error: float
    diagnostics: dict = field(default_factory=dict)


def row_matrix(t: TorusNetwork, row: int, s_top, s_bottom) -> complex:
    """Tr prod_j T[row,j][s_top_j, s_bottom_j] over the row's columns."""
    s_top = np.asarray(s_top, dtype=np.int64)
    s_bottom = np.asarray(s_bottom, dtype=np.int64)
    if s_top.shape != (t.n_cols,) or s_bottom.shape != (t.n_cols,):
        raise ValueError(f"index vectors must have length {t.n_cols}")
    if np.any(s_top < 0) or np.any(s_top >= t.dim) or np.any(s_bottom < 0) or np.any(
        s_bottom >= t.dim
    ):
        raise ValueError(f"indices must lie in [0, {t.dim})")
    return complex(_mc_core.row_value(t.tensors, row, s_top, s_bottom))


def _measure(t: TorusNetwork, state, split: int) -> float:
    rvals = _mc_core.all_row_values(t.tensors, state)
    return float(abs(np.prod(rvals[:split])) ** 2)


def _find_start(t: TorusNetwork, rng, split: int, attempts: int = 1000):
    for _ in range(attempts):
        state = rng.integers(0, t.dim, size=(t.n_rows, t.n_cols), dtype=np.int64)
        if _measure(t, state, split) > 0.0:
            return state
    raise ErgodicityError(
        f"no configuration with nonzero measure found in {attempts} attempts"
    )


def _run_one_chain(t, rng, split, burn, thin, n_samples, kernel, record=False):
    state = _find_start(t, rng, split)
    n_moves = burn + n_samples * thin
    prop_rows = rng.integers(0, t.n_rows, size=n_moves, dtype=np.int64)
    prop_cols = rng.integers(0, t.n_cols, size=n_moves, dtype=np.int64)
    prop_vals = rng.integers(0, t.dim, size=n_moves, dtype=np.int64)
    draws = rng.random(n_moves)
    f_out = np.empty(n_samples, dtype=np.complex128)
    invmu = np.empty(n_samples, dtype=np.float64)
    states = np.empty((n_samples, t.n_rows, t.n_cols), dtype=np.int64) if record else None
    accepted, proper = kernel.run_chain(
        t.tensors,
        state,
        split,
        prop_rows,
        prop_cols,
        prop_vals,
        draws,
        burn,
        thin,
        f_out,
        invmu,
        states,
    )
    return f_out, invmu, accepted / max(proper, 1), states


def _binned_estimate(t, f_out, invmu, n_bins):
    n = len(f_out)
    n_bins = max(2, min(n_bins, n // 2)) if n >= 4 else 1
    log_count = t.n_rows * t.n_cols * np.log(t.dim)  # log |{S}|
    ests = []
    for b in range(n_bins):
        sl = slice(b * n // n_bins, (b + 1) * n // n_bins)
        mean_inv = np.mean(invmu[sl])
        ests.append(np.exp(log_count - np.log(mean_inv)) * np.mean(f_out[sl]))
    ests = np.asarray(ests)
    estimate = complex(np.mean(ests))
    if n_bins > 1:
        var = np.var(ests.real, ddof=1) + np.var(ests.imag, ddof=1)
        std_error = float(np.sqrt(var / n_bins))
    else:
        std_error = float("inf")
    return estimate, std_error


def mc_contract(t: TorusNetwork, cfg: McConfig | None = None, kernel=None) -> McResult:
    """Metropolis estimate of the full torus contraction.

    Runs ``cfg.chains`` independent chains (seeded from ``cfg.seed``)
    and merges them by inverse-variance weighting.  Diagnostics carry
    the acceptance rate, a sign-problem indicator (circular variance of
    the phase of the sampled integrand) and an ergodicity flag.
    """
    cfg = cfg or McConfig()
    kernel = kernel or _default_kernel
    burn, thin, split = cfg.resolved(t)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)
    per_chain = []
    acceptance = []
    phases = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        f_out, invmu, acc, _ = _run_one_chain(
            t, rng, split, burn, thin, cfg.n_samples, kernel
        )
        per_chain.append(_binned_estimate(t, f_out, invmu, cfg.n_bins))
        acceptance.append(acc)
        nz = f_out[np.abs(f_out) > 0]
        if len(nz):
            phases.append(nz / np.abs(nz))
    if cfg.chains == 1:
        estimate, std_error = per_chain[0]
    else:
        ests = np.array([e for e, _ in per_chain])
        errs = np.array([max(s, 1e-300) for _, s in per_chain])
        w = 1.0 / errs**2
        estimate = complex(np.sum(w * ests) / np.sum(w))
        std_error = float(1.0 / np.sqrt(np.sum(w)))
    acc_rate = float(np.mean(acceptance))
    phase_var = (
        float(1.0 - abs(np.mean(np.concatenate(phases)))) if phases else 1.0
    )
    diagnostics = {
        "acceptance": acc_rate,
        "chains": cfg.chains,
        "sign_flag": bool(phase_var > 0.5),
        "phase_variance": phase_var,
        "ergodic_flag": bool(acc_rate < 1e-3),
        "split_row": split,
        "kernel": "python" if kernel is _mc_core else "compiled",
    }
    return McResult(estimate=estimate, std_error=std_error, diagnostics=diagnostics)


def detailed_balance_check(
    t: TorusNetwork, cfg: McConfig | None = None, trials: int = 20000
) -> dict:
    """Empirical detailed-balance test on a small instance.

    Runs the implemented proposal+acceptance with thinning 1, counts
    transitions between visited configurations, and compares both the
    occupation frequencies against the exact measure and the pairwise
    flows x->y vs y->x.  Only feasible when D^(rows*cols) is small.
    """
    cfg = cfg or McConfig()
    n_states = t.dim ** (t.n_rows * t.n_cols)
    if n_states > 4096:
        raise ValueError("instance too large for an exhaustive balance check")
    _, _, split = cfg.resolved(t)
    rng = np.random.default_rng(cfg.seed)
    f_out = np.empty(trials, dtype=np.complex128)
    invmu = np.empty(trials, dtype=np.float64)
    f_out, invmu, acc, states = _run_one_chain(
        t, rng, split, 0, 1, trials, _default_kernel, record=True
    )
    keys = [tuple(s.reshape(-1)) for s in states]
    occupation = {}
    flows = {}
    for a, b in zip(keys, keys[1:]):
        occupation[a] = occupation.get(a, 0) + 1
        if a != b:
            flows[(a, b)] = flows.get((a, b), 0) + 1
    occupation[keys[-1]] = occupation.get(keys[-1], 0) + 1
    # exact measure over all configurations
    shape = (t.n_rows, t.n_cols)
    mu = {}
    for idx in np.ndindex(*(t.dim,) * (t.n_rows * t.n_cols)):
        state = np.asarray(idx, dtype=np.int64).reshape(shape)
        mu[tuple(idx)] = _measure(t, state, split)
    z = sum(mu.values())
    max_occ_dev = 0.0
    for key, count in occupation.items():
        expected = mu[key] / z
        observed = count / trials
        if expected > 0.01:  # only well-sampled states are meaningful
            max_occ_dev = max(max_occ_dev, abs(observed / expected - 1.0))
    max_flow_asym = 0.0
    pairs = 0
    for (a, b), n_ab in flows.items():
        n_ba = flows.get((b, a), 0)
        if n_ab + n_ba >= 100:
            pairs += 1
            max_flow_asym = max(
                max_flow_asym, abs(n_ab - n_ba) / (0.5 * (n_ab + n_ba))
            )
    return {
        "acceptance": acc,
        "max_occupation_deviation": max_occ_dev,
        "max_flow_asymmetry": max_flow_asym,
        "pairs_checked": pairs,
        "states_visited": len(occupation),
        "occupation": occupation,
        "measure": mu,
        "trials": trials,
    }


def torus_contract_exact(t: TorusNetwork) -> complex:
    """Exact contraction by transfer matrices over rows (oracle-grade cost)."""
    d = t.dim
    n = t.n_cols
    # transfer matrix of one row over (top vector, bottom vector)
    total = None
    for i in range(t.n_rows):
        # row transfer matrix over (top vector, bottom vector), built column-wise
        e = np.einsum("udlr->ulrd", t.tensors[i, 0])  # (a, l, r, b)
        for j in range(1, n):
            nxt = np.einsum("udlr->ulrd", t.tensors[i, j])
            e = np.einsum("ulmd,vmrw->uvlrdw", e, nxt)
            ua, va, l, r, da, wa = e.shape
            e = e.reshape(ua * va, l, r, da * wa)
        row = np.einsum("ullb->ub", e)  # trace over the periodic horizontal bond
        total = row if total is None else total @ row
    return complex(np.trace(total))
