"""Circuit-to-grid compilation against the dense simulator."""

import json

import numpy as np
import pytest

from tensorgrid.circuit import (
    Circuit,
    ControlledPhase,
    OneQubit,
    PostSelect,
    PostSelectionImpossible,
    circuit_from_json,
    circuit_to_json,
    encode,
    encode_weighted_graph_state,
    hadamard,
    routed_phase_layers,
    simulate_postselected,
    swap_layers,
    weighted_graph_circuit,
)
from tensorgrid.grid import grid_to_state
from tensorgrid.statevector import fidelity, run_circuit


def rand_unitary(rng):
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(rng, n, depth, p_two=0.4, with_post=0):
    layers = []
    for _ in range(depth):
        layer = []
        wires = list(range(n))
        rng.shuffle(wires)
        used = set()
        for w in wires:
            if w in used:
                continue
            if w + 1 < n and (w + 1) not in used and rng.random() < p_two:
                layer.append(ControlledPhase(w, float(rng.uniform(0, 2 * np.pi))))
                used |= {w, w + 1}
            elif rng.random() < 0.8:
                layer.append(OneQubit(w, rand_unitary(rng)))
                used.add(w)
        layers.append(layer)
    c = Circuit(n, layers)
    for _ in range(with_post):
        w = int(rng.integers(0, n))
        c.layers.append([PostSelect(w, int(rng.integers(0, 2)))])
    return Circuit(n, c.layers)


def test_empty_circuit_is_all_zeros():
    g = encode(Circuit(3))
    state = grid_to_state(g)
    assert abs(state[0] - 1.0) < 1e-14
    assert np.max(np.abs(state[1:])) < 1e-14


def test_phase_gate_tensor_entries_at_pi():
    # the two-site pair for phi=pi, read off an interior gate of the grid
    # (a trailing identity layer keeps the gate row off the physical row);
    # entries listed in (left, right, up, down) order
    c = Circuit(4, [[ControlledPhase(1, np.pi)], []])
    g = encode(c)
    left = g.site(1, 1)
    right = g.site(1, 2)
    l = left.data  # axes (up, down, left, right)
    r = right.data
    expected_left = {(1, 0, 0, 0): 1.0, (1, 0, 1, 1): 1.0, (1, 1, 1, 1): 1.0}
    for (al, ar, au, ad), val in expected_left.items():
        assert l[au, ad, al, ar] == val
    assert np.count_nonzero(l) == 3
    expected_right = {(0, 1, 0, 0): 1.0, (0, 1, 1, 1): 1.0, (1, 1, 1, 1): -2.0}
    for (al, ar, au, ad), val in expected_right.items():
        assert abs(r[au, ad, al, ar] - val) < 1e-15
    assert np.count_nonzero(r) == 3


def test_phase_gate_general_phi_contracts_to_diagonal():
    for phi in (0.3, np.pi / 2, 2.2):
        c = Circuit(2, [[ControlledPhase(0, phi)], []])
        g = encode(c)
        left, right = g.site(1, 0), g.site(1, 1)
        # contract over the shared horizontal link
        m = np.einsum("udlr,UDrR->uUdD", left.data, right.data)
        gate = m.reshape(4, 4).T  # (u1 u2) in, (d1 d2) out -> matrix [out, in]
        ref = np.diag([1, 1, 1, np.exp(1j * phi)])
        assert np.max(np.abs(gate - ref)) < 1e-12


def test_hh_cz_bell_phase():
    h = hadamard()
    c = Circuit(2, [[OneQubit(0, h), OneQubit(1, h)], [ControlledPhase(0, np.pi)]])
    state = grid_to_state(encode(c))
    ref = run_circuit(c).amplitudes
    assert np.max(np.abs(state - np.array([1, 1, 1, -1]) / 2)) < 1e-12
    assert np.max(np.abs(state - ref)) < 1e-12


def test_random_circuits_match_oracle():
    rng = np.random.default_rng(60)
    for seed in range(25):
        r = np.random.default_rng(seed)
        n = int(r.integers(2, 7))
        c = random_circuit(r, n, int(r.integers(1, 9)))
        state = grid_to_state(encode(c))
        ref = run_circuit(c).amplitudes
        assert np.max(np.abs(state - ref)) < 1e-9


def test_unitary_circuits_have_unit_norm():
    for seed in range(10):
        r = np.random.default_rng(3000 + seed)
        c = random_circuit(r, 5, 6)
        state = grid_to_state(encode(c))
        assert abs(np.vdot(state, state).real - 1.0) < 1e-9


def test_identity_layer_is_transparent():
    rng = np.random.default_rng(61)
    c = random_circuit(rng, 4, 5)
    ref = grid_to_state(encode(c))
    for where in (0, 2, len(c.layers)):
        layers = [list(l) for l in c.layers]
        layers.insert(where, [])
        out = grid_to_state(encode(Circuit(4, layers)))
        assert np.max(np.abs(out - ref)) < 1e-10


def test_swap_layers_swap():
    rng = np.random.default_rng(62)
    v0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v1 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    prep = [
        [
            OneQubit(0, np.column_stack([v0, [0, 0]])),
            OneQubit(1, np.column_stack([v1, [0, 0]])),
        ]
    ]
    c = Circuit(2, prep + swap_layers(0))
    state = grid_to_state(encode(c))
    ref = np.kron(v1, v0)
    assert np.max(np.abs(state - ref)) < 1e-10


def test_routed_phase_equals_direct_phase():
    rng = np.random.default_rng(63)
    phi = 1.234
    n = 4
    # prepare (|0> + |1>)/sqrt2 everywhere, then CP between wires 0 and 3
    h = hadamard()
    prep = [[OneQubit(j, h) for j in range(n)]]
    c = Circuit(n, prep + routed_phase_layers(0, 3, phi))
    state = grid_to_state(encode(c))
    ref = run_circuit(c).amplitudes
    assert np.max(np.abs(state - ref)) < 1e-9
    # analytic: phase on components with both wire 0 and wire 3 equal to 1
    want = np.ones(16, dtype=complex) / 4
    for idx in range(16):
        if (idx >> 3) & 1 and idx & 1:
            want[idx] *= np.exp(1j * phi)
    assert np.max(np.abs(state - want)) < 1e-9


def test_wgs_zero_phases_is_plus_product():
    g = encode_weighted_graph_state(3, np.zeros((3, 3)))
    state = grid_to_state(g)
    assert np.max(np.abs(state - np.full(8, 1 / np.sqrt(8)))) < 1e-10


def test_wgs_two_qubit_quarter_phase():
    phases = np.zeros((2, 2))
    phases[0, 1] = np.pi / 2
    state = grid_to_state(encode_weighted_graph_state(2, phases))
    ref = np.array([1, 1, 1, 1j]) / 2.0
    assert np.max(np.abs(state - ref)) < 1e-10


def test_wgs_all_pi_matches_oracle():
    phases = np.full((3, 3), np.pi)
    c = weighted_graph_circuit(3, phases)
    state = grid_to_state(encode(c))
    ref = run_circuit(c).amplitudes
    assert np.max(np.abs(state - ref)) < 1e-10


def test_postselect_on_zero_wire():
    c = Circuit(2, [[PostSelect(0, 0)]])
    state, weight = simulate_postselected(c)
    assert abs(weight - 1.0) < 1e-12
    assert abs(state[0] - 1.0) < 1e-12


def test_postselect_born_rule():
    c = Circuit(1, [[OneQubit(0, hadamard())], [PostSelect(0, 0)]])
    state, weight = simulate_postselected(c)
    assert abs(weight - 0.5) < 1e-12


def test_postselect_impossible():
    c = Circuit(1, [[PostSelect(0, 1)]])  # |0> projected onto |1>
    with pytest.raises(PostSelectionImpossible):
        simulate_postselected(c)


def test_postselected_random_circuit_branch():
    for seed in range(5):
        rng = np.random.default_rng(4000 + seed)
        c = random_circuit(rng, 6, 8, with_post=1)
        try:
            state, weight = simulate_postselected(c)
        except PostSelectionImpossible:
            continue
        ref = run_circuit(c).amplitudes
        assert fidelity(state, ref) > 1 - 1e-9
        assert abs(weight - np.vdot(ref, ref).real) < 1e-9


def test_circuit_validation():
    with pytest.raises(ValueError, match="overlap"):
        Circuit(3, [[OneQubit(1, np.eye(2)), ControlledPhase(0, 1.0)]])
    with pytest.raises(ValueError, match="range"):
        Circuit(2, [[ControlledPhase(1, 1.0)]])
    with pytest.raises(ValueError, match="outcome"):
        PostSelect(0, 2)


def test_circuit_json_round_trip():
    rng = np.random.default_rng(64)
    c = random_circuit(rng, 4, 5, with_post=1)
    doc = json.loads(json.dumps(circuit_to_json(c)))
    c2 = circuit_from_json(doc)
    assert np.max(
        np.abs(grid_to_state(encode(c2)) - grid_to_state(encode(c)))
    ) < 1e-12
    # format fields follow the documented schema
    assert doc["wires"] == 4
    kinds = {e["g"] for layer in doc["layers"] for e in layer}
    assert kinds <= {"u1", "cphase", "post"}
