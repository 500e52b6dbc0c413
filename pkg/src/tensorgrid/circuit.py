"""Quantum circuits and their compilation into 2D tensor grids.

A circuit on N wires with M layers becomes a grid of M+1 rows times N
columns with bond dimension 2: one initialization row pinning every wire
to |0>, then one row per layer.  The value 0/1 of a vertical bond is
identified with the computational basis state of the wire at that time
step.  Horizontal links inside a row are "broken" (carry no information)
unless a two-qubit phase gate uses them: a broken link is realized by
zeroing all entries except one fixed link value, so neighboring tensors
factorize.

Single-qubit gates may be arbitrary 2x2 matrices; post-selection is the
rank-1 projector onto the chosen outcome, which makes the encoded state
an unnormalized branch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import Grid2d, MemoryCapError, expectation, grid_to_state
from .tensor import Tensor

__all__ = [
    "OneQubit",
    "ControlledPhase",
    "PostSelect",
    "Circuit",
    "PostSelectionImpossible",
    "encode",
    "weighted_graph_circuit",
    "encode_weighted_graph_state",
    "simulate_postselected",
    "swap_layers",
    "routed_phase_layers",
    "hadamard",
    "circuit_to_json",
    "circuit_from_json",
]


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


@dataclass(frozen=True)
class OneQubit:
    """Arbitrary (not necessarily unitary) 2x2 operation on one wire."""

    target: int
    matrix: tuple

    def __init__(self, target: int, matrix):
        m = np.asarray(matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError("single-qubit matrix must be 2x2")
        object.__setattr__(self, "target", int(target))
        object.__setattr__(self, "matrix", tuple(map(tuple, m)))

    def array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=np.complex128)

    def wires(self):
        return (self.target,)


@dataclass(frozen=True)
class ControlledPhase:
    """diag(1,1,1,e^{i phi}) on the adjacent pair (wire, wire+1)."""

    wire: int
    phi: float

    def wires(self):
        return (self.wire, self.wire + 1)


@dataclass(frozen=True)
class PostSelect:
    """Projection of one wire onto outcome 0 or 1 (unnormalized branch)."""

    target: int
    outcome: int

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise ValueError("outcome must be 0 or 1")

    def array(self) -> np.ndarray:
        p = np.zeros((2, 2), dtype=np.complex128)
        p[self.outcome, self.outcome] = 1.0
        return p

    def wires(self):
        return (self.target,)


class PostSelectionImpossible(ValueError):
    """All post-selected branches have exactly zero weight."""


class Circuit:
    """Layers of gates on ``n_wires`` wires; gates in a layer are disjoint."""

    def __init__(self, n_wires: int, layers=()):
        if n_wires < 1:
            raise ValueError("need at least one wire")
        self.n_wires = n_wires
        self.layers = [list(layer) for layer in layers]
        for k, layer in enumerate(self.layers):
            used = set()
            for g in layer:
                ws = g.wires()
                if any(not 0 <= w < n_wires for w in ws):
                    raise ValueError(f"gate {g} out of range in layer {k}")
                if used & set(ws):
                    raise ValueError(f"overlapping gates in layer {k}")
                used |= set(ws)

    def depth(self):
        return len(self.layers)


# ---------------------------------------------------------------------------
# encoding


def _pin(dim: int) -> int:
    """Fixed value of a broken horizontal link (0 on a dummy boundary leg)."""
    return 0 if dim == 1 else 1


def _single_site(matrix, dl: int, dr: int) -> np.ndarray:
    """Gate tensor (up,down,left,right); the state flows downward, so the
    entry at (u, d) is <d|U|u>."""
    t = np.zeros((2, 2, dl, dr), dtype=np.complex128)
    t[:, :, _pin(dl), _pin(dr)] = np.asarray(matrix, dtype=np.complex128).T
    return t


def _phase_left(dl: int) -> np.ndarray:
    """Left member of the phase-gate pair; the shared link to the right
    carries u AND the control marker."""
    t = np.zeros((2, 2, dl, 2), dtype=np.complex128)
    l = _pin(dl)
    t[0, 0, l, 0] = 1.0
    t[1, 1, l, 0] = 1.0
    t[1, 1, l, 1] = 1.0
    return t


def _phase_right(phi: float, dr: int) -> np.ndarray:
    t = np.zeros((2, 2, 2, dr), dtype=np.complex128)
    r = _pin(dr)
    t[0, 0, 0, r] = 1.0
    t[1, 1, 0, r] = 1.0
    t[1, 1, 1, r] = np.exp(1j * phi) - 1.0
    return t


def _init_site(dl: int, dr: int) -> np.ndarray:
    t = np.zeros((1, 2, dl, dr), dtype=np.complex128)
    t[0, 0, 0, 0] = 1.0
    return t


def encode(c: Circuit) -> Grid2d:
    """Compile the circuit into a grid; wire states run down the columns.

    The last row's down legs become the open physical legs, ordered by
    wire index.
    """
    n = c.n_wires
    rows = []
    hdim = [1] + [2] * (n - 1) + [1]  # horizontal bond dims between columns
    rows.append([_init_site(hdim[j], hdim[j + 1]) for j in range(n)])
    for layer in c.layers:
        sites = [None] * n
        for g in layer:
            if isinstance(g, OneQubit):
                sites[g.target] = _single_site(g.array(), hdim[g.target], hdim[g.target + 1])
            elif isinstance(g, PostSelect):
                sites[g.target] = _single_site(g.array(), hdim[g.target], hdim[g.target + 1])
            elif isinstance(g, ControlledPhase):
                j = g.wire
                sites[j] = _phase_left(hdim[j])
                sites[j + 1] = _phase_right(g.phi, hdim[j + 2])
            else:
                raise TypeError(f"unknown gate {g!r}")
        for j in range(n):
            if sites[j] is None:
                sites[j] = _single_site(np.eye(2), hdim[j], hdim[j + 1])
        rows.append(sites)
    # move the last row's down leg into an open physical leg
    last = []
    for t in rows[-1]:
        u, d, dl, dr = t.shape
        last.append(t.transpose(0, 2, 3, 1).reshape(u, 1, dl, dr, d))
    rows[-1] = last
    tensors = []
    n_rows = len(rows)
    for r, row in enumerate(rows):
        for t in row:
            legs = ("up", "down", "left", "right") + (("phys",) if r == n_rows - 1 else ())
            tensors.append(Tensor(legs, t, check=False))
    phys = [(n_rows - 1, j) for j in range(n)]
    return Grid2d(n_rows, n, tensors, phys)


# ---------------------------------------------------------------------------
# routing helpers and weighted graph states


def swap_layers(j: int) -> list:
    """SWAP of wires (j, j+1) from three phase gates and Hadamard pairs."""
    h = hadamard()
    return [
        [OneQubit(j + 1, h)],
        [ControlledPhase(j, np.pi)],
        [OneQubit(j + 1, h), OneQubit(j, h)],
        [ControlledPhase(j, np.pi)],
        [OneQubit(j, h), OneQubit(j + 1, h)],
        [ControlledPhase(j, np.pi)],
        [OneQubit(j + 1, h)],
    ]


def routed_phase_layers(a: int, b: int, phi: float) -> list:
    """Controlled phase between arbitrary wires a < b via adjacent SWAPs."""
    if not a < b:
        raise ValueError("need a < b")
    layers = []
    for k in range(b - 1, a, -1):
        layers += swap_layers(k)
    layers.append([ControlledPhase(a, phi)])
    for k in range(a + 1, b):
        layers += swap_layers(k)
    return layers


def weighted_graph_circuit(n: int, phases) -> Circuit:
    """|+>^n followed by controlled phases for every strict upper-triangle entry."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (n, n) or not np.all(np.isfinite(phases)):
        raise ValueError("phases must be a finite n x n matrix")
    h = hadamard()
    layers = [[OneQubit(j, h) for j in range(n)]]
    for a in range(n):
        for b in range(a + 1, n):
            if phases[a, b] != 0.0:
                if b == a + 1:
                    layers.append([ControlledPhase(a, phases[a, b])])
                else:
                    layers += routed_phase_layers(a, b, phases[a, b])
    return Circuit(n, layers)


def encode_weighted_graph_state(n: int, phases) -> Grid2d:
    return encode(weighted_graph_circuit(n, phases))


# ---------------------------------------------------------------------------
# post-selected simulation


def simulate_postselected(c: Circuit, chi_cut: int | None = None, cap: int = 2**20):
    """Encode and contract; post-selection leaves an unnormalized branch.

    Returns ``(state, weight)`` where ``weight`` is the squared norm of
    the branch (the success probability for unitary circuits).  For
    circuits too wide for the dense cap the state is returned as None
    and the weight comes from the boundary-MPS norm contraction at
    ``chi_cut``.
    """
    g = encode(c)
    total = 1
    for d in g.phys_dims():
        total *= d
    if total <= cap:
        state = grid_to_state(g, cap=cap)
        weight = float(np.vdot(state, state).real)
        if weight == 0.0:
            raise PostSelectionImpossible("post-selected branch has zero weight")
        return state, weight
    if chi_cut is None:
        raise MemoryCapError(
            f"physical dimension {total} exceeds cap {cap}; pass chi_cut for an "
            "approximate norm"
        )
    eye = [np.eye(d) for d in g.phys_dims()]
    rep = expectation(g, eye, chi_cut=chi_cut)
    weight = float(rep.corrected.real)
    if weight == 0.0:
        raise PostSelectionImpossible("post-selected branch has zero weight")
    return None, weight


# ---------------------------------------------------------------------------
# JSON round trip


def circuit_to_json(c: Circuit) -> dict:
    layers = []
    for layer in c.layers:
        out = []
        for g in layer:
            if isinstance(g, OneQubit):
                m = g.array().reshape(-1)
                out.append(
                    {"g": "u1", "t": g.target, "m": [[z.real, z.imag] for z in m]}
                )
            elif isinstance(g, ControlledPhase):
                out.append({"g": "cphase", "j": g.wire, "phi": g.phi})
            elif isinstance(g, PostSelect):
                out.append({"g": "post", "t": g.target, "o": g.outcome})
            else:
                raise TypeError(f"unknown gate {g!r}")
        layers.append(out)
    return {"wires": c.n_wires, "layers": layers}


def circuit_from_json(doc: dict) -> Circuit:
    layers = []
    for layer in doc["layers"]:
        out = []
        for e in layer:
            if e["g"] == "u1":
                m = np.array([complex(re, im) for re, im in e["m"]]).reshape(2, 2)
                out.append(OneQubit(e["t"], m))
            elif e["g"] == "cphase":
                out.append(ControlledPhase(e["j"], e["phi"]))
            elif e["g"] == "post":
                out.append(PostSelect(e["t"], e["o"]))
            else:
                raise ValueError(f"unknown gate kind {e['g']!r}")
        layers.append(out)
    return Circuit(doc["wires"], layers)


def save_circuit(c: Circuit, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(circuit_to_json(c), fh)


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return circuit_from_json(json.load(fh))
