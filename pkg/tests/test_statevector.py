"""Dense oracle itself: gates vs explicit matrices, exact evolution."""

import numpy as np
import pytest

from tensorgrid.circuit import Circuit, ControlledPhase, OneQubit, PostSelect
from tensorgrid.statevector import (
    StateVector,
    apply_gate,
    basis_state,
    dense_hamiltonian,
    evolve_exact,
    fidelity,
    product_state,
    run_circuit,
)
from tensorgrid.trotter import IsingModel

X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_x_flips():
    out = apply_gate(basis_state(1, 0), OneQubit(0, X))
    assert np.allclose(out.amplitudes, [0, 1])


def test_cz_sign_on_11():
    out = apply_gate(basis_state(2, 3), ControlledPhase(0, np.pi))
    assert np.allclose(out.amplitudes, [0, 0, 0, -1])


def test_three_gate_circuit_vs_explicit_matrix():
    rng = np.random.default_rng(70)

    def ru():
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q, r = np.linalg.qr(m)
        return q

    u0, u1, u2 = ru(), ru(), ru()
    c = Circuit(3, [[OneQubit(0, u0)], [OneQubit(1, u1)], [OneQubit(2, u2)]])
    out = run_circuit(c)
    eye = np.eye(2)
    m0 = np.kron(np.kron(u0, eye), eye)
    m1 = np.kron(np.kron(eye, u1), eye)
    m2 = np.kron(np.kron(eye, eye), u2)
    ref = m2 @ m1 @ m0 @ basis_state(3).amplitudes
    assert np.max(np.abs(out.amplitudes - ref)) < 1e-13


def test_postselect_branch_is_unnormalized():
    plus = np.array([1, 1]) / np.sqrt(2)
    s = product_state([plus])
    out = apply_gate(s, PostSelect(0, 1))
    assert abs(np.vdot(out.amplitudes, out.amplitudes).real - 0.5) < 1e-14


def test_evolve_t0_is_identity():
    rng = np.random.default_rng(71)
    amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    s = StateVector(4, amps)
    out = evolve_exact(IsingModel(4, 1.0), 0.0, s)
    assert np.max(np.abs(out.amplitudes - amps)) < 1e-13


def test_two_site_zero_field_closed_form():
    # B=0: |++> evolves as cos(t)|++> - i sin(t)|--> under sz sz
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    s = product_state([plus, plus])
    t = 0.77
    out = evolve_exact(IsingModel(2, 0.0), t, s)
    ref = np.cos(t) * np.kron(plus, plus) - 1j * np.sin(t) * np.kron(minus, minus)
    assert np.max(np.abs(out.amplitudes - ref)) < 1e-12


def test_evolution_conserves_norm_and_energy():
    plus = np.array([1, 1]) / np.sqrt(2)
    model = IsingModel(6, 1.0)
    h = dense_hamiltonian(model)
    s = product_state([plus] * 6)
    e0 = np.vdot(s.amplitudes, h @ s.amplitudes).real
    for t in (0.5, 1.0, 3.5):
        out = evolve_exact(model, t, s)
        assert abs(out.norm() - 1.0) < 1e-12
        e = np.vdot(out.amplitudes, h @ out.amplitudes).real
        assert abs(e - e0) < 1e-10


def test_evolution_composes():
    rng = np.random.default_rng(72)
    amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    amps /= np.linalg.norm(amps)
    s = StateVector(4, amps)
    model = IsingModel(4, 1.3)
    a = evolve_exact(model, 0.9, evolve_exact(model, 0.6, s))
    b = evolve_exact(model, 1.5, s)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-10


def test_fidelity_basics():
    z = basis_state(1, 0)
    o = basis_state(1, 1)
    plus = product_state([np.array([1, 1]) / np.sqrt(2)])
    assert fidelity(z, z) == pytest.approx(1.0)
    assert fidelity(z, o) == pytest.approx(0.0)
    assert fidelity(z, plus) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fidelity(z.amplitudes, np.zeros(2))


def test_caps():
    with pytest.raises(ValueError, match="cap"):
        evolve_exact(IsingModel(15, 1.0), 1.0, basis_state(15))
