"""Dense state-vector reference implementations.

Everything here is deliberately brute force: dense gate application and
exact time evolution by eigendecomposition.  These are the oracles that
all tensor-network paths are checked against, so they must not share any
machinery with them.

Amplitude ordering is row-major over (s_0, s_1, ..., s_{N-1}) with wire
0 as the most significant bit, matching the dense read-outs of the MPS
and grid modules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, ControlledPhase, OneQubit, PostSelect
from .trotter import IsingModel

__all__ = [
    "StateVector",
    "basis_state",
    "product_state",
    "apply_gate",
    "run_circuit",
    "dense_hamiltonian",
    "evolve_exact",
    "fidelity",
]

GATE_CAP = 20
EVOLVE_CAP = 14


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ValueError(
                f"amplitude vector of length {self.amplitudes.shape} does not "
                f"match {self.n_qubits} qubits"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(n: int, index: int = 0) -> StateVector:
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def product_state(local_vectors) -> StateVector:
    amps = np.ones(1, dtype=np.complex128)
    for v in local_vectors:
        amps = np.kron(amps, np.asarray(v, dtype=np.complex128))
    n = int(np.log2(len(amps)))
    return StateVector(n, amps)


def apply_gate(s: StateVector, g) -> StateVector:
    """Dense gate application; post-selection returns the unnormalized branch."""
    n = s.n_qubits
    if n > GATE_CAP:
        raise ValueError(f"{n} qubits exceeds the dense cap of {GATE_CAP}")
    psi = s.amplitudes.reshape((2,) * n)
    if isinstance(g, (OneQubit, PostSelect)):
        m = g.array()
        psi = np.tensordot(m, psi, axes=(1, g.target))
        psi = np.moveaxis(psi, 0, g.target)
    elif isinstance(g, ControlledPhase):
        psi = psi.copy()
        idx = [slice(None)] * n
        idx[g.wire] = 1
        idx[g.wire + 1] = 1
        psi[tuple(idx)] *= np.exp(1j * g.phi)
    else:
        raise TypeError(f"unknown gate {g!r}")
    return StateVector(n, psi.reshape(-1))


def run_circuit(c: Circuit, initial: StateVector | None = None) -> StateVector:
    s = basis_state(c.n_wires) if initial is None else initial
    if s.n_qubits != c.n_wires:
        raise ValueError("initial state size does not match the circuit")
    for layer in c.layers:
        for g in layer:
            s = apply_gate(s, g)
    return s


def dense_hamiltonian(model: IsingModel) -> np.ndarray:
    """sum_a sz_a sz_{a+1} + B sum_a sx_a on the open chain, as a dense matrix."""
    n = model.n_sites
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)

    def embed(ops: dict) -> np.ndarray:
        m = np.ones((1, 1), dtype=np.complex128)
        for j in range(n):
            m = np.kron(m, ops.get(j, eye))
        return m

    h = np.zeros((2**n, 2**n), dtype=np.complex128)
    for a in range(n - 1):
        h += embed({a: sz, a + 1: sz})
    for a in range(n):
        h += model.b_field * embed({a: sx})
    return h


def evolve_exact(model: IsingModel, t: float, initial: StateVector) -> StateVector:
    """exp(-i t H) |initial> via dense Hermitian eigendecomposition."""
    n = model.n_sites
    if n > EVOLVE_CAP:
        raise ValueError(f"{n} sites exceeds the dense evolution cap of {EVOLVE_CAP}")
    if initial.n_qubits != n:
        raise ValueError("state size does not match the model")
    h = dense_hamiltonian(model)
    w, v = np.linalg.eigh(h)
    amps = v @ (np.exp(-1j * t * w) * (v.conj().T @ initial.amplitudes))
    return StateVector(n, amps)


def fidelity(a, b) -> float:
    """|<a|b>|^2 / (<a|a><b|b>) for StateVectors or plain vectors."""
    va = a.amplitudes if isinstance(a, StateVector) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, StateVector) else np.asarray(b)
    if va.shape != vb.shape:
        raise ValueError("length mismatch")
    na = float(np.vdot(va, va).real)
    nb = float(np.vdot(vb, vb).real)
    if na == 0.0 or nb == 0.0:
        raise ValueError("fidelity of a zero vector is undefined")
    return float(abs(np.vdot(va, vb)) ** 2 / (na * nb))
