"""Variational fitting of chains and grids, and parameter counting."""

import warnings

import numpy as np
import pytest

from tensorgrid.fit import FitConfig, fit_grid, fit_mps, parameter_count, random_fit_grid
from tensorgrid.grid import grid_to_state
from tensorgrid.mps import Mps, mps_to_dense, random_mps


def dense_fidelity(u, v):
    return abs(np.vdot(u, v)) ** 2 / (np.vdot(u, u).real * np.vdot(v, v).real)


def test_fit_mps_product_target():
    rng = np.random.default_rng(100)
    vecs = [rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(6)]
    target = vecs[0]
    for v in vecs[1:]:
        target = np.kron(target, v)
    out, fid = fit_mps(target, 6, 1, FitConfig(seed=0))
    assert fid > 1 - 1e-10


def test_fit_mps_representable_target():
    rng = np.random.default_rng(101)
    target = mps_to_dense(random_mps(rng, 6, 2, 2))
    out, fid = fit_mps(target, 6, 2, FitConfig(seed=1))
    assert fid >= 1 - 1e-8


def test_fit_mps_ghz_chi1():
    ghz = np.zeros(16, dtype=complex)
    ghz[0] = ghz[-1] = 1 / np.sqrt(2)
    _, fid = fit_mps(ghz, 4, 1, FitConfig(seed=2))
    assert abs(fid - 0.5) < 1e-6


def test_fit_mps_svd_init():
    rng = np.random.default_rng(102)
    target = mps_to_dense(random_mps(rng, 5, 2, 4))
    _, f_svd = fit_mps(target, 5, 2, FitConfig(init="svd_from_target"))
    _, f_rand = fit_mps(target, 5, 2, FitConfig(init="random_seeded", seed=5))
    assert f_svd > 0.5
    assert abs(f_svd - f_rand) < 1e-6  # both converge to the same optimum here


def test_fit_mps_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_mps(np.zeros(16), 4, 2)
    with pytest.raises(ValueError):
        fit_mps(np.ones(10), 3, 2)
    with pytest.raises(ValueError):
        fit_mps(np.ones(8), 3, 2, FitConfig(init="nope"))


def test_fit_grid_one_row_matches_fit_mps():
    # a 1-row grid is an MPS; identical seeds must give matching fidelity
    rng = np.random.default_rng(103)
    target = mps_to_dense(random_mps(rng, 6, 2, 2))
    _, f_mps = fit_mps(target, 6, 2, FitConfig(seed=3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, f_grid = fit_grid(target, 1, 6, 2, FitConfig(seed=3))
    assert abs(f_mps - f_grid) < 1e-8


def test_fit_grid_self_representable_from_given():
    # re-fit at the generating shape starting from the representation:
    # sweeps must hold the exact optimum
    g0 = random_fit_grid(np.random.default_rng(104), 2, 5, 2)
    target = grid_to_state(g0)
    g, fid = fit_grid(target, 2, 5, 2, FitConfig(seed=0, max_sweeps=8), given=g0)
    assert fid >= 1 - 1e-7


def test_fit_grid_self_representable_random_init():
    # from a cold start the sweeps still reach a high-fidelity local optimum
    g0 = random_fit_grid(np.random.default_rng(105), 2, 4, 2)
    target = grid_to_state(g0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, fid = fit_grid(target, 2, 4, 2, FitConfig(seed=9, max_sweeps=200, tol=1e-14))
    assert fid >= 1 - 1e-3


def test_fit_grid_fidelity_monotone_over_sweeps():
    rng = np.random.default_rng(106)
    target = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    fids = []
    for sweeps in (1, 2, 4, 8):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, f = fit_grid(target, 2, 6, 2, FitConfig(seed=4, max_sweeps=sweeps))
        fids.append(f)
    for a, b in zip(fids, fids[1:]):
        assert b >= a - 1e-12


def test_fit_phase_invariance():
    rng = np.random.default_rng(107)
    target = mps_to_dense(random_mps(rng, 5, 2, 3))
    _, f1 = fit_mps(target, 5, 2, FitConfig(seed=6))
    _, f2 = fit_mps(np.exp(1.3j) * target, 5, 2, FitConfig(seed=6))
    assert abs(f1 - f2) < 1e-6
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, g1 = fit_grid(target, 2, 5, 2, FitConfig(seed=6, max_sweeps=30))
        _, g2 = fit_grid(np.exp(-0.7j) * target, 2, 5, 2, FitConfig(seed=6, max_sweeps=30))
    assert abs(g1 - g2) < 1e-6


def test_fit_grid_beats_mps_small_case():
    # small version of the toy-model comparison: evolved state at N=8
    from tensorgrid.statevector import evolve_exact, product_state
    from tensorgrid.trotter import IsingModel

    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    target = evolve_exact(IsingModel(8, 1.0), 2.0, product_state([plus] * 8)).amplitudes
    _, f_mps = fit_mps(target, 8, 4, FitConfig(init="svd_from_target"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, f_cts = fit_grid(target, 3, 8, 2, FitConfig(seed=0, max_sweeps=120))
    assert f_cts > f_mps


# ---------------------------------------------------------------------------
# parameter counting


def test_parameter_count_product_mps():
    psi = random_mps(np.random.default_rng(108), 5, 2, 1)
    assert parameter_count(psi) == 4 * 5


def test_parameter_count_capped_boundary():
    # N=4, chi=2: bonds (2,2,2), sites (1,2,2)+(2,2,2)+(2,2,2)+(2,2,1)
    psi = random_mps(np.random.default_rng(109), 4, 2, 2)
    assert parameter_count(psi) == 2 * (4 + 8 + 8 + 4)


def test_parameter_count_cap_binds():
    a = parameter_count(random_mps(np.random.default_rng(110), 2, 2, 8))
    b = parameter_count(random_mps(np.random.default_rng(111), 2, 2, 2))
    assert a == b


def test_parameter_count_inflated_bond_not_credited():
    # an MPS built with an oversized interior bond counts as its cap
    t0 = np.zeros((1, 2, 8), dtype=complex)
    t1 = np.zeros((8, 2, 1), dtype=complex)
    psi = Mps([t0, t1])
    assert parameter_count(psi) == 2 * (1 * 2 * 2 + 2 * 2 * 1)


def test_parameter_count_grid():
    g = random_fit_grid(np.random.default_rng(112), 2, 3, 2)
    # top row: (1,2,l,r), bottom row: (2,1,l,r,2) with l/r in {1,2}
    # caps: corner tensors cap their bonds; enumerate by convention
    n = parameter_count(g)
    assert n > 0 and n % 2 == 0
    # capped count never exceeds the raw entry count
    raw = 2 * sum(int(np.prod(t.data.shape)) for t in g.tensors)
    assert n <= raw


def test_parameter_count_rejects_unknown():
    with pytest.raises(TypeError):
        parameter_count([1, 2, 3])
