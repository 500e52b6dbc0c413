"""Subcubic tree tensor networks with triangle-loop node replacement.

A tree of rank-<=3 tensors contracts exactly at polynomial cost.  All
scalar read-outs (norms, overlaps, expectation values) go through one
primitive: bottom-up double-layer messages, one (bra leg, ket leg)
matrix per edge, with operator insertions applied on the ket layer of
the leaves they touch.  Two-site terms are split into sums of product
insertions by an operator-Schmidt decomposition, so they ride the same
machinery.

For ground-state search every local update reduces to a generalized
eigenvalue problem  E t = lambda N t : E and N are the energy and Gram
forms obtained by contracting the whole double layer except the chosen
tensor; per excluded tensor they assemble as a Kronecker product of the
per-leg messages.

A rank-3 node can be replaced by a triangle loop

    A[a1,a2,a3] = sum_{al,be,ga} B1[a1,al,be] B2[a2,al,ga] B3[a3,be,ga]

which keeps the representable entanglement whenever the internal
dimensions cover the matching bipartite ranks while shrinking the local
eigenproblem.  During intra-loop sweeps the rest of the network enters
only through a cached environment over the loop's three external legs,
so repeated passes over the loop are cheap.

Node axis order is (parent, children in index order, phys?); the root
has no parent axis.  Leaves carry the physical legs; leaf ordering (by
node index) fixes the dense read-out and Hamiltonian site numbering.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

__all__ = [
    "TreeNetwork",
    "TriangleLoop",
    "GroundConfig",
    "tree_contract",
    "tree_norm",
    "tree_overlap",
    "tree_expectation",
    "tree_energy",
    "expand_triangle",
    "loop_to_tensor",
    "replace_with_loops",
    "local_ground_update",
    "ground_state_sweep",
    "balanced_binary_tree",
    "random_tree_state",
    "ising_terms",
    "tree_to_json",
    "tree_from_json",
    "save_tree",
    "load_tree",
    "hamiltonian_to_json",
    "hamiltonian_from_json",
]


@dataclass
class TriangleLoop:
    """Three tensors with one external leg each and pairwise internal legs.

    b1: (ext1, alpha, beta), b2: (ext2, alpha, gamma), b3: (ext3, beta, gamma).
    """

    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray

    def __post_init__(self):
        self.b1 = np.asarray(self.b1, dtype=np.complex128)
        self.b2 = np.asarray(self.b2, dtype=np.complex128)
        self.b3 = np.asarray(self.b3, dtype=np.complex128)
        if (
            self.b1.shape[1] != self.b2.shape[1]
            or self.b1.shape[2] != self.b3.shape[1]
            or self.b2.shape[2] != self.b3.shape[2]
        ):
            raise ValueError("inconsistent internal dimensions in triangle loop")


def loop_to_tensor(loop: TriangleLoop) -> np.ndarray:
    return np.einsum("iab,jac,kbc->ijk", loop.b1, loop.b2, loop.b3, optimize=True)


class TreeNetwork:
    """Tree of tensors (or triangle loops) with physical legs on leaves."""

    def __init__(self, parents, tensors, phys):
        self.parents = list(parents)
        self.tensors = list(tensors)
        self.phys = list(phys)
        n = len(self.parents)
        if not (len(self.tensors) == len(self.phys) == n):
            raise ValueError("parents, tensors and phys must have equal lengths")
        roots = [k for k, p in enumerate(self.parents) if p < 0]
        if len(roots) != 1:
            raise ValueError("the tree needs exactly one root")
        self.root = roots[0]
        self.children = [[] for _ in range(n)]
        for k, p in enumerate(self.parents):
            if p >= 0:
                if not 0 <= p < n or p == k:
                    raise ValueError(f"bad parent {p} for node {k}")
                self.children[p].append(k)
        for k in range(n):
            seen = set()
            node = k
            while node != self.root:
                if node in seen:
                    raise ValueError("parent links contain a cycle")
                seen.add(node)
                node = self.parents[node]
        for k in range(n):
            arr = self.node_array(k)
            want = len(self.axes(k))
            if arr.ndim != want:
                raise ValueError(f"node {k}: rank {arr.ndim}, expected {want}")
            if arr.ndim > 3:
                raise ValueError(f"node {k} has rank {arr.ndim} > 3 (tree is subcubic)")
        self._leaf_sets = [None] * n

    def axes(self, k):
        """Axis roles of node k: 'parent', a child index, or 'phys'."""
        roles = []
        if self.parents[k] >= 0:
            roles.append("parent")
        roles += list(self.children[k])
        if self.phys[k]:
            roles.append("phys")
        return roles

    def node_array(self, k) -> np.ndarray:
        t = self.tensors[k]
        return loop_to_tensor(t) if isinstance(t, TriangleLoop) else t

    def leaves(self):
        return [k for k in range(len(self.parents)) if self.phys[k]]

    def subtree_leaves(self, k) -> frozenset:
        if self._leaf_sets[k] is None:
            out = set()
            if self.phys[k]:
                out.add(k)
            for c in self.children[k]:
                out |= self.subtree_leaves(c)
            self._leaf_sets[k] = frozenset(out)
        return self._leaf_sets[k]

    def copy(self):
        tensors = [
            TriangleLoop(t.b1.copy(), t.b2.copy(), t.b3.copy())
            if isinstance(t, TriangleLoop)
            else t.copy()
            for t in self.tensors
        ]
        return TreeNetwork(list(self.parents), tensors, list(self.phys))


def balanced_binary_tree(n_leaves: int, d: int = 2, bond: int = 2) -> TreeNetwork:
    """Balanced binary shape with zeroed tensors; bonds capped per subtree."""
    if n_leaves < 2 or n_leaves & (n_leaves - 1):
        raise ValueError("n_leaves must be a power of two >= 2")
    parents = [-1]
    sizes = [n_leaves]
    phys = [False]
    frontier = [0]
    while frontier:
        nxt = []
        for node in frontier:
            if sizes[node] == 1:
                phys[node] = True
                continue
            for _ in range(2):
                parents.append(node)
                sizes.append(sizes[node] // 2)
                phys.append(False)
                nxt.append(len(parents) - 1)
        frontier = nxt
    children = [[] for _ in parents]
    for k, p in enumerate(parents):
        if p >= 0:
            children[p].append(k)

    def cap(node):
        return min(bond, d ** sizes[node])

    tensors = []
    for k, p in enumerate(parents):
        if phys[k]:
            tensors.append(np.zeros((cap(k), d), dtype=np.complex128))
        elif p < 0:
            c1, c2 = children[k]
            tensors.append(np.zeros((cap(c1), cap(c2)), dtype=np.complex128))
        else:
            c1, c2 = children[k]
            tensors.append(np.zeros((cap(k), cap(c1), cap(c2)), dtype=np.complex128))
    return TreeNetwork(parents, tensors, phys)


def random_tree_state(rng, n_leaves: int, d: int = 2, bond: int = 2) -> TreeNetwork:
    t = balanced_binary_tree(n_leaves, d, bond)
    for k in range(len(t.tensors)):
        shape = t.tensors[k].shape
        a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        t.tensors[k] = a / np.linalg.norm(a)
    return t


# ---------------------------------------------------------------------------
# contraction


def tree_contract(t: TreeNetwork, cap: int = 2**20) -> np.ndarray:
    """Dense state over the leaves in leaf order (exponential; capped)."""
    total = 1
    for leaf in t.leaves():
        total *= t.node_array(leaf).shape[-1]
    if total > cap:
        raise MemoryError(f"dense dimension {total} exceeds cap {cap}")

    def gather(k):
        """Subtree state with axes (parent leg?, leaf legs in leaf order)."""
        arr = t.node_array(k)
        roles = t.axes(k)
        offset = 1 if t.parents[k] >= 0 else 0
        pos = offset  # where the next child's leaf block starts
        for role in roles:
            if not isinstance(role, int):
                continue
            child = gather(role)
            ax = pos  # children were laid out consecutively after the parent leg
            arr = np.tensordot(arr, child, axes=(ax, 0))
            width = child.ndim - 1
            arr = np.moveaxis(
                arr,
                list(range(arr.ndim - width, arr.ndim)),
                list(range(ax, ax + width)),
            )
            pos = ax + width
        return arr

    return gather(t.root).reshape(-1)


def _up_message(t_bra, t_ket, k, ops, affected, cache):
    """(bra leg, ket leg) matrix of the subtree at k, toward its parent.

    ``ops`` maps a leaf node to a matrix inserted between the layers
    (applied on the ket side).  Subtrees untouched by ``ops`` are shared
    through ``cache``.
    """
    cacheable = not (affected & t_bra.subtree_leaves(k))
    if cacheable and k in cache:
        return cache[k]
    a = t_bra.node_array(k).conj()
    b = t_ket.node_array(k)
    roles = t_bra.axes(k)
    if t_bra.phys[k] and k in ops:
        b = np.tensordot(ops[k], b, axes=(1, b.ndim - 1))
        b = np.moveaxis(b, 0, b.ndim - 1)
    for ax, role in enumerate(roles):
        if isinstance(role, int):
            m = _up_message(t_bra, t_ket, role, ops, affected, cache)
            # absorb the child's message into the bra layer: b_c -> k_c
            a = np.moveaxis(np.tensordot(a, m, axes=(ax, 0)), -1, ax)
    lo = 1 if t_bra.parents[k] >= 0 else 0
    axes = list(range(lo, a.ndim))
    out = np.tensordot(a, b, axes=(axes, axes))
    out = out.reshape(1, 1) if t_bra.parents[k] < 0 else out
    if cacheable:
        cache[k] = out
    return out


def _down_message(t, v, ops, affected, up_cache):
    """Message toward node v through its parent edge: (bra, ket) matrix."""
    p = t.parents[v]
    a = t.node_array(p).conj()
    b = t.node_array(p)
    roles = t.axes(p)
    if t.phys[p] and p in ops:
        b = np.tensordot(ops[p], b, axes=(1, b.ndim - 1))
        b = np.moveaxis(b, 0, b.ndim - 1)
    for ax, role in enumerate(roles):
        if role == "parent":
            m = _down_message(t, p, ops, affected, up_cache)
            a = np.moveaxis(np.tensordot(a, m, axes=(ax, 0)), -1, ax)
        elif isinstance(role, int) and role != v:
            m = _up_message(t, t, role, ops, affected, up_cache)
            a = np.moveaxis(np.tensordot(a, m, axes=(ax, 0)), -1, ax)
    keep = roles.index(v)
    axes = [ax for ax in range(a.ndim) if ax != keep]
    return np.tensordot(a, b, axes=(axes, axes))  # (bra_v, ket_v)


def _full_value(t_bra, t_ket, ops, affected=frozenset(), cache=None) -> complex:
    cache = {} if cache is None else cache
    m = _up_message(t_bra, t_ket, t_bra.root, ops, affected, cache)
    return complex(m[0, 0])


def tree_overlap(a: TreeNetwork, b: TreeNetwork) -> complex:
    """<a|b> by double-layer message passing (polynomial in the bonds)."""
    if a.parents != b.parents or a.phys != b.phys:
        raise ValueError("trees must share their structure")
    return _full_value(a, b, {})


def tree_norm(t: TreeNetwork) -> float:
    return float(tree_overlap(t, t).real)


def _term_factors(t: TreeNetwork, sites, mat):
    """Decompose a 1- or 2-site term into product insertions keyed by node."""
    leaves = t.leaves()
    if len(sites) == 1:
        return [{leaves[sites[0]]: np.asarray(mat, dtype=np.complex128)}]
    if len(sites) != 2:
        raise ValueError("only 1- and 2-site terms are supported")
    i, j = sites
    d = t.node_array(leaves[i]).shape[-1]
    m = np.asarray(mat, dtype=np.complex128).reshape(d, d, d, d)
    m = m.transpose(0, 2, 1, 3).reshape(d * d, d * d)  # (si' si), (sj' sj)
    u, s, vh = np.linalg.svd(m)
    keep = int(np.sum(s > 1e-14 * max(s[0], 1e-300)))
    out = []
    for k in range(max(keep, 1)):
        a = (u[:, k] * np.sqrt(s[k])).reshape(d, d)
        b = (np.sqrt(s[k]) * vh[k]).reshape(d, d)
        out.append({leaves[i]: a, leaves[j]: b})
    return out


def tree_expectation(t: TreeNetwork, terms) -> complex:
    """<psi| sum of terms |psi> with terms as (leaf sites, dense matrix)."""
    cache = {}
    total = 0.0 + 0.0j
    for sites, mat in terms:
        for ops in _term_factors(t, tuple(sites), mat):
            total += _full_value(t, t, ops, frozenset(ops), cache)
    return total


def tree_energy(t: TreeNetwork, terms) -> float:
    return float((tree_expectation(t, terms) / tree_norm(t)).real)


def ising_terms(n_sites: int, b_field: float = 1.0):
    """Transverse-field Ising terms on leaf sites 0..n-1 (unit coupling)."""
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    terms = [((a, a + 1), np.kron(sz, sz)) for a in range(n_sites - 1)]
    terms += [((a,), b_field * sx) for a in range(n_sites)]
    return terms


# ---------------------------------------------------------------------------
# triangle loops


def _svd_triangle(a: np.ndarray, dims) -> TriangleLoop:
    """Deterministic nested-SVD construction; exact when dims suffice."""
    d1, d2, d3 = a.shape
    da, db, dg = dims
    u, s, vh = np.linalg.svd(a.reshape(d1, d2 * d3), full_matrices=False)
    r1 = min(len(s), da)
    b1 = np.zeros((d1, da, db), dtype=np.complex128)
    b1[:, :r1, 0] = u[:, :r1]
    w = (s[:r1, None] * vh[:r1]).reshape(r1, d2, d3)
    p, s2, q = np.linalg.svd(
        w.transpose(1, 0, 2).reshape(d2 * r1, d3), full_matrices=False
    )
    r2 = min(len(s2), dg)
    b2 = np.zeros((d2, da, dg), dtype=np.complex128)
    b2[:, :r1, :r2] = (p[:, :r2] * s2[:r2]).reshape(d2, r1, r2)
    b3 = np.zeros((d3, db, dg), dtype=np.complex128)
    b3[:, 0, :r2] = q[:r2].T
    return TriangleLoop(b1, b2, b3)


def expand_triangle(
    a: np.ndarray,
    dims,
    max_sweeps: int = 60,
    tol: float = 1e-12,
    seed: int = 0,
    init: str = "random",
):
    """Fit a triangle loop to a rank-3 tensor by alternating least squares.

    ``dims`` are the internal dimensions (alpha, beta, gamma).  Returns
    (TriangleLoop, relative reconstruction error).  Exact reconstruction
    is reachable whenever the internal dimensions cover the bipartite
    ranks of ``a``; with ``init='svd'`` the start is already exact in
    that case, with the default seeded random start the sweeps have to
    find it.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 3:
        raise ValueError("expand_triangle needs a rank-3 tensor")
    da, db, dg = dims
    if min(dims) < 1:
        raise ValueError("internal dimensions must be positive")
    norm_a = np.linalg.norm(a)
    if norm_a == 0:
        return TriangleLoop(*(np.zeros((s, x, y)) for s, x, y in
                              zip(a.shape, (da, da, db), (db, dg, dg)))), 0.0
    if init == "svd":
        loop = _svd_triangle(a, dims)
    elif init == "random":
        rng = np.random.default_rng(seed)
        mk = lambda s, x, y: (
            rng.standard_normal((s, x, y)) + 1j * rng.standard_normal((s, x, y))
        )
        loop = TriangleLoop(mk(a.shape[0], da, db), mk(a.shape[1], da, dg),
                            mk(a.shape[2], db, dg))
    else:
        raise ValueError(f"unknown init {init!r}")
    d1, d2, d3 = a.shape
    err = np.inf
    for _ in range(max_sweeps):
        c = np.einsum("jac,kbc->abjk", loop.b2, loop.b3).reshape(da * db, d2 * d3)
        x, *_ = np.linalg.lstsq(c.T, a.reshape(d1, d2 * d3).T, rcond=None)
        loop.b1 = x.T.reshape(d1, da, db)
        c = np.einsum("iab,kbc->acik", loop.b1, loop.b3).reshape(da * dg, d1 * d3)
        x, *_ = np.linalg.lstsq(
            c.T, a.transpose(1, 0, 2).reshape(d2, d1 * d3).T, rcond=None
        )
        loop.b2 = x.T.reshape(d2, da, dg)
        c = np.einsum("iab,jac->bcij", loop.b1, loop.b2).reshape(db * dg, d1 * d2)
        x, *_ = np.linalg.lstsq(
            c.T, a.transpose(2, 0, 1).reshape(d3, d1 * d2).T, rcond=None
        )
        loop.b3 = x.T.reshape(d3, db, dg)
        new_err = np.linalg.norm(loop_to_tensor(loop) - a) / norm_a
        if err - new_err < tol:
            err = new_err
            break
        err = new_err
    return loop, float(err)


def replace_with_loops(
    t: TreeNetwork, dims, nodes=None, max_sweeps: int = 60, init: str = "svd"
):
    """Replace rank-3 nodes by triangle loops; returns (tree, max error)."""
    out = t.copy()
    if nodes is None:
        nodes = [
            k
            for k in range(len(out.tensors))
            if not isinstance(out.tensors[k], TriangleLoop)
            and out.node_array(k).ndim == 3
        ]
    worst = 0.0
    for k in nodes:
        loop, err = expand_triangle(out.node_array(k), dims, max_sweeps=max_sweeps,
                                    init=init)
        out.tensors[k] = loop
        worst = max(worst, err)
    return out, worst


# ---------------------------------------------------------------------------
# ground-state search


@dataclass
class GroundConfig:
    max_sweeps: int = 50
    tol: float = 1e-10
    intra_loop_sweeps: int = 3  # passes over (b1, b2, b3) per node visit
    lam_reg: float = 1e-12


def _solve_gen_eig(e, n, lam_reg):
    """Smallest generalized eigenpair of (E, N) via jittered Cholesky."""
    e = 0.5 * (e + e.conj().T)
    n = 0.5 * (n + n.conj().T)
    dim = n.shape[0]
    scale = max(np.trace(n).real / dim, 1e-300)
    jitter = lam_reg * scale
    chol = None
    for _ in range(8):
        try:
            chol = np.linalg.cholesky(n + jitter * np.eye(dim))
            break
        except np.linalg.LinAlgError:
            jitter *= 100.0
    if chol is None:
        raise np.linalg.LinAlgError("Gram matrix could not be regularized")
    tmp = scipy.linalg.solve_triangular(chol, e, lower=True)
    m = scipy.linalg.solve_triangular(chol, tmp.conj().T, lower=True).conj().T
    w, y = np.linalg.eigh(0.5 * (m + m.conj().T))
    x = scipy.linalg.solve_triangular(chol.conj().T, y[:, 0], lower=False)
    x = x / np.linalg.norm(x)
    return x, float(w[0])


def _env_matrices(t: TreeNetwork, v: int, terms):
    """Energy and Gram forms over node v's legs (node v excluded)."""
    roles = t.axes(v)
    dims = t.node_array(v).shape
    cache = {}

    def env_for(ops, affected):
        mats = []
        for ax, role in enumerate(roles):
            if role == "parent":
                mats.append(_down_message(t, v, ops, affected, cache))
            elif isinstance(role, int):
                mats.append(_up_message(t, t, role, ops, affected, cache))
            else:  # phys leg of the excluded node
                o = ops.get(v)
                mats.append(o if o is not None else np.eye(dims[ax]))
        return reduce(np.kron, mats)

    n_mat = env_for({}, frozenset())
    e_mat = np.zeros_like(n_mat)
    for sites, mat in terms:
        for ops in _term_factors(t, tuple(sites), mat):
            e_mat = e_mat + env_for(ops, frozenset(ops))
    return e_mat, n_mat


def _loop_local_update(loop: TriangleLoop, e_ext, n_ext, which, lam_reg):
    """Exact local solve for one loop tensor given the external forms."""
    d1, d2, d3 = loop.b1.shape[0], loop.b2.shape[0], loop.b3.shape[0]
    e6 = e_ext.reshape(d1, d2, d3, d1, d2, d3)
    n6 = n_ext.reshape(d1, d2, d3, d1, d2, d3)
    if which == 0:
        sub = "ijkIJK,jac,kbc,JAC,KBC->iabIAB"
        ops = (loop.b2.conj(), loop.b3.conj(), loop.b2, loop.b3)
        shape = loop.b1.shape
    elif which == 1:
        sub = "ijkIJK,iab,kbc,IAB,KBC->jacJAC"
        ops = (loop.b1.conj(), loop.b3.conj(), loop.b1, loop.b3)
        shape = loop.b2.shape
    else:
        sub = "ijkIJK,iab,jac,IAB,JAC->kbcKBC"
        ops = (loop.b1.conj(), loop.b2.conj(), loop.b1, loop.b2)
        shape = loop.b3.shape
    dim = int(np.prod(shape, dtype=np.int64))
    e_loc = np.einsum(sub, e6, *ops, optimize=True).reshape(dim, dim)
    n_loc = np.einsum(sub, n6, *ops, optimize=True).reshape(dim, dim)
    x, lam = _solve_gen_eig(e_loc, n_loc, lam_reg)
    return x.reshape(shape), lam


def local_ground_update(t: TreeNetwork, node: int, terms, cfg: GroundConfig | None = None):
    """One exact local minimization at ``node``; returns (tensor, energy).

    For a plain node the returned tensor is the minimal generalized
    eigenvector; for a loop node one intra-loop sweep is performed with
    the external environment held fixed ("the rest of the network stays
    constant") and the updated TriangleLoop is returned.
    """
    cfg = cfg or GroundConfig()
    e_mat, n_mat = _env_matrices(t, node, terms)
    if isinstance(t.tensors[node], TriangleLoop):
        loop = TriangleLoop(
            t.tensors[node].b1.copy(),
            t.tensors[node].b2.copy(),
            t.tensors[node].b3.copy(),
        )
        lam = np.inf
        for _ in range(cfg.intra_loop_sweeps):
            for which in range(3):
                x, lam = _loop_local_update(loop, e_mat, n_mat, which, cfg.lam_reg)
                if which == 0:
                    loop.b1 = x
                elif which == 1:
                    loop.b2 = x
                else:
                    loop.b3 = x
        return loop, lam
    shape = t.node_array(node).shape
    x, lam = _solve_gen_eig(e_mat, n_mat, cfg.lam_reg)
    return x.reshape(shape), lam


def ground_state_sweep(t: TreeNetwork, terms, cfg: GroundConfig | None = None):
    """Repeated local updates over all nodes; energy is non-increasing.

    Returns (optimized tree, energy).  Stops when the energy improvement
    per sweep drops below ``cfg.tol`` or after ``cfg.max_sweeps``.
    """
    cfg = cfg or GroundConfig()
    work = t.copy()
    last = np.inf
    energy = np.inf
    converged = False
    for _ in range(cfg.max_sweeps):
        for node in range(len(work.tensors)):
            new_tensor, energy = local_ground_update(work, node, terms, cfg)
            work.tensors[node] = new_tensor
        if last - energy < cfg.tol:
            converged = True
            break
        last = energy
    if not converged:
        warnings.warn(
            f"ground-state sweep stopped after {cfg.max_sweeps} sweeps "
            f"(energy {energy:.12f})",
            stacklevel=2,
        )
    return work, float(energy)


# ---------------------------------------------------------------------------
# JSON round trip


def _array_to_json(a: np.ndarray) -> dict:
    return {
        "shape": list(a.shape),
        "re": a.reshape(-1).real.tolist(),
        "im": a.reshape(-1).imag.tolist(),
    }


def _array_from_json(doc: dict) -> np.ndarray:
    data = np.asarray(doc["re"], dtype=np.float64) + 1j * np.asarray(
        doc["im"], dtype=np.float64
    )
    return data.reshape(doc["shape"])


def tree_to_json(t: TreeNetwork) -> dict:
    nodes = []
    for k in range(len(t.tensors)):
        entry = {"parent": t.parents[k], "phys": bool(t.phys[k])}
        tk = t.tensors[k]
        if isinstance(tk, TriangleLoop):
            entry["loop"] = {
                "b1": _array_to_json(tk.b1),
                "b2": _array_to_json(tk.b2),
                "b3": _array_to_json(tk.b3),
            }
        else:
            entry.update(_array_to_json(tk))
        nodes.append(entry)
    return {"nodes": nodes}


def tree_from_json(doc: dict) -> TreeNetwork:
    parents, tensors, phys = [], [], []
    for entry in doc["nodes"]:
        parents.append(entry["parent"])
        phys.append(bool(entry["phys"]))
        if "loop" in entry:
            tensors.append(
                TriangleLoop(
                    _array_from_json(entry["loop"]["b1"]),
                    _array_from_json(entry["loop"]["b2"]),
                    _array_from_json(entry["loop"]["b3"]),
                )
            )
        else:
            tensors.append(_array_from_json(entry))
    return TreeNetwork(parents, tensors, phys)


def save_tree(t: TreeNetwork, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tree_to_json(t), fh)


def load_tree(path) -> TreeNetwork:
    with open(path, encoding="utf-8") as fh:
        return tree_from_json(json.load(fh))


def hamiltonian_to_json(terms) -> list:
    return [
        {"sites": list(sites), **_array_to_json(np.asarray(mat, dtype=np.complex128))}
        for sites, mat in terms
    ]


def hamiltonian_from_json(doc) -> list:
    return [(tuple(entry["sites"]), _array_from_json(entry)) for entry in doc]
