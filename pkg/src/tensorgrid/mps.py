"""Open-boundary matrix product states and operators.

Site conventions (all numpy arrays, complex128):

* MPS site: ``(left_bond, phys, right_bond)``
* MPO site: ``(left_bond, phys_out, phys_in, right_bond)``

Boundary bonds are dummy legs of dimension 1, so every site follows the
same code path.  All operations are pure: they return new chains and
never mutate their inputs.
"""

from __future__ import annotations

import warnings

import numpy as np

__all__ = [
    "Mps",
    "Mpo",
    "mps_from_product",
    "mps_from_dense",
    "inner_product",
    "apply_mpo",
    "canonicalize",
    "truncate_svd",
    "truncate_variational",
    "mps_to_dense",
    "mpo_identity",
    "mpo_product",
    "mpo_to_dense",
    "sandwich",
    "random_mps",
]

DENSE_CAP = 2**20


class Mps:
    """Chain of rank-3 tensors with dummy dim-1 boundary bonds."""

    def __init__(self, tensors):
        self.tensors = [np.asarray(t, dtype=np.complex128) for t in tensors]
        if not self.tensors:
            raise ValueError("an MPS needs at least one site")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for a, b in zip(self.tensors, self.tensors[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError(
                    f"bond mismatch: {a.shape} next to {b.shape}"
                )

    def __len__(self):
        return len(self.tensors)

    def copy(self):
        return Mps([t.copy() for t in self.tensors])

    def phys_dims(self):
        return [t.shape[1] for t in self.tensors]

    def bond_dims(self):
        """Interior bond dimensions (length N-1)."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond(self):
        return max([1] + self.bond_dims())


class Mpo:
    """Chain of rank-4 tensors with dummy dim-1 boundary bonds."""

    def __init__(self, tensors):
        self.tensors = [np.asarray(t, dtype=np.complex128) for t in tensors]
        if not self.tensors:
            raise ValueError("an MPO needs at least one site")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[3] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for a, b in zip(self.tensors, self.tensors[1:]):
            if a.shape[3] != b.shape[0]:
                raise ValueError(f"bond mismatch: {a.shape} next to {b.shape}")

    def __len__(self):
        return len(self.tensors)

    def copy(self):
        return Mpo([t.copy() for t in self.tensors])

    def phys_dims(self):
        """Per-site (out, in) physical dimensions."""
        return [(t.shape[1], t.shape[2]) for t in self.tensors]

    def bond_dims(self):
        return [t.shape[3] for t in self.tensors[:-1]]

    def max_bond(self):
        return max([1] + self.bond_dims())


def mps_from_product(local_vectors) -> Mps:
    """Bond-dimension-1 MPS whose dense expansion is the tensor product."""
    tensors = []
    for v in local_vectors:
        v = np.asarray(v, dtype=np.complex128)
        if v.ndim != 1 or not np.any(v):
            raise ValueError("each local state must be a nonzero vector")
        tensors.append(v.reshape(1, -1, 1))
    return Mps(tensors)


def mps_from_dense(vec, phys_dims, chi: int | None = None) -> Mps:
    """Exact MPS of a dense vector by successive SVD (optionally capped)."""
    vec = np.asarray(vec, dtype=np.complex128)
    total = int(np.prod(phys_dims, dtype=np.int64))
    if vec.shape != (total,):
        raise ValueError(f"vector of length {vec.shape} does not match {phys_dims}")
    tensors = []
    rest = vec.reshape(1, total)
    for d in phys_dims[:-1]:
        l = rest.shape[0]
        m = rest.reshape(l * d, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = len(s) if chi is None else min(chi, len(s))
        tensors.append(u[:, :keep].reshape(l, d, keep))
        rest = s[:keep, None] * vh[:keep]
    tensors.append(rest.reshape(rest.shape[0], phys_dims[-1], 1))
    return Mps(tensors)


def inner_product(a: Mps, b: Mps, conjugate: bool = True) -> complex:
    """Transfer-matrix contraction of two chains, left to right.

    With ``conjugate=True`` (default) this is the quantum overlap <a|b>;
    with ``conjugate=False`` it is the plain bilinear pairing used when
    an MPS is just a slice of a tensor network rather than a state.
    """
    if len(a) != len(b) or a.phys_dims() != b.phys_dims():
        raise ValueError("chains must have equal lengths and physical dimensions")
    env = np.ones((1, 1), dtype=np.complex128)
    for ta, tb in zip(a.tensors, b.tensors):
        ta = ta.conj() if conjugate else ta
        env = np.tensordot(env, ta, axes=(0, 0))  # (b_bond, s, a_right)
        env = np.tensordot(env, tb, axes=((0, 1), (0, 1)))  # (a_right, b_right)
    return complex(env[0, 0])


def apply_mpo(op: Mpo, psi: Mps) -> Mps:
    """Exact MPO application; bond dimensions multiply, no truncation."""
    if len(op) != len(psi):
        raise ValueError("length mismatch")
    out = []
    for w, t in zip(op.tensors, psi.tensors):
        if w.shape[2] != t.shape[1]:
            raise ValueError(
                f"physical dimension mismatch: MPO expects {w.shape[2]}, "
                f"state has {t.shape[1]}"
            )
        # (L,o,i,R) x (l,i,r) -> (L,o,R,l,r) -> (L,l,o,R,r)
        m = np.tensordot(w, t, axes=(2, 1)).transpose(0, 3, 1, 2, 4)
        L, l, o, R, r = m.shape
        out.append(m.reshape(L * l, o, R * r))
    return Mps(out)


def _qr_step_left(t):
    """Left-isometric factor of one site; returns (site, carry_right)."""
    l, d, r = t.shape
    q, carry = np.linalg.qr(t.reshape(l * d, r))
    k = q.shape[1]
    return q.reshape(l, d, k), carry


def _qr_step_right(t):
    """Right-isometric factor of one site; returns (carry_left, site)."""
    l, d, r = t.shape
    q, carry = np.linalg.qr(t.reshape(l, d * r).T)
    k = q.shape[1]
    return carry.T, q.T.reshape(k, d, r)


def canonicalize(psi: Mps, center: int) -> Mps:
    """Gauge the chain so sites left of ``center`` are left-isometric and
    sites right of it are right-isometric.  The dense state is unchanged."""
    n = len(psi)
    if not 0 <= center < n:
        raise IndexError(f"center {center} out of range for {n} sites")
    tensors = [t.copy() for t in psi.tensors]
    for i in range(center):
        tensors[i], carry = _qr_step_left(tensors[i])
        tensors[i + 1] = np.tensordot(carry, tensors[i + 1], axes=(1, 0))
    for i in range(n - 1, center, -1):
        carry, tensors[i] = _qr_step_right(tensors[i])
        tensors[i - 1] = np.tensordot(tensors[i - 1], carry, axes=(2, 0))
    return Mps(tensors)


def truncate_svd(psi: Mps, chi: int):
    """Sweep of local SVD truncations in canonical gauge.

    Every bond ends up at most ``chi``.  Returns the truncated chain and
    the accumulated relative discarded weight (sum over bonds of the
    squared dropped singular values divided by the squared total).
    """
    if chi < 1:
        raise ValueError("chi must be positive")
    out = canonicalize(psi, 0)
    tensors = out.tensors
    weight = 0.0
    for i in range(len(tensors) - 1):
        l, d, r = tensors[i].shape
        u, s, vh = np.linalg.svd(tensors[i].reshape(l * d, r), full_matrices=False)
        keep = min(chi, len(s))
        total = float(np.sum(s**2))
        if total > 0.0:
            weight += float(np.sum(s[keep:] ** 2)) / total
        tensors[i] = u[:, :keep].reshape(l, d, keep)
        carry = s[:keep, None] * vh[:keep]
        tensors[i + 1] = np.tensordot(carry, tensors[i + 1], axes=(1, 0))
    return Mps(tensors), weight


def _overlap_env_right(target: Mps, out: Mps):
    """Right environments of <out|target> for the variational sweep."""
    n = len(target)
    envs = [None] * (n + 1)
    envs[n] = np.ones((1, 1), dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        e = np.tensordot(out.tensors[i].conj(), envs[i + 1], axes=(2, 0))
        envs[i] = np.tensordot(e, target.tensors[i], axes=((1, 2), (1, 2)))
    return envs


def _local_env(left, target_site, right):
    """Optimal local tensor: d<out|target>/d conj(out_i) in isometric gauge."""
    e = np.tensordot(left, target_site, axes=(1, 0))  # (a_out, s, b_right)
    return np.tensordot(e, right, axes=(2, 1))  # (a_out, s, a'_out)


def _step_left_env(left, out_site, target_site):
    e = np.tensordot(left, out_site.conj(), axes=(0, 0))  # (b, s, a')
    return np.tensordot(target_site, e, axes=((0, 1), (0, 1))).T  # (a', b')


def _step_right_env(right, out_site, target_site):
    e = np.tensordot(out_site.conj(), right, axes=(2, 0))  # (a, s, b')
    return np.tensordot(e, target_site, axes=((1, 2), (1, 2)))  # (a, b)


def truncate_variational(
    psi: Mps,
    chi: int,
    max_sweeps: int = 30,
    tol: float = 1e-12,
    init: Mps | None = None,
) -> Mps:
    """Best bond-``chi`` approximation of ``psi`` by single-site sweeping.

    Maximizes |<out|psi>|^2 / <out|out>, starting from the SVD-truncated
    chain (or from ``init`` when given).  Each local update is the exact
    optimum for its site, so the fidelity is monotone.  Stops when the
    improvement per full sweep drops below ``tol`` or after
    ``max_sweeps``; non-convergence is not fatal, the last iterate is
    returned with a warning.
    """
    if chi < 1:
        raise ValueError("chi must be positive")
    if init is None:
        out, weight = truncate_svd(psi, chi)
        if weight == 0.0 or max_sweeps == 0:
            # max_sweeps=0 is the plain SVD baseline with no polish
            return out
    else:
        if init.phys_dims() != psi.phys_dims():
            raise ValueError("init must match the target's physical dimensions")
        out = init
    norm2 = abs(inner_product(psi, psi))
    if norm2 == 0.0:
        return out
    n = len(psi)
    out = canonicalize(out, 0)
    right = _overlap_env_right(psi, out)
    left = [None] * (n + 1)
    left[0] = np.ones((1, 1), dtype=np.complex128)
    last = -1.0
    fid = -1.0
    for _ in range(max_sweeps):
        for i in range(n - 1):
            t = _local_env(left[i], psi.tensors[i], right[i + 1])
            out.tensors[i], _ = _qr_step_left(t)
            left[i + 1] = _step_left_env(left[i], out.tensors[i], psi.tensors[i])
        for i in range(n - 1, 0, -1):
            t = _local_env(left[i], psi.tensors[i], right[i + 1])
            _, out.tensors[i] = _qr_step_right(t)
            right[i] = _step_right_env(right[i + 1], out.tensors[i], psi.tensors[i])
        t = _local_env(left[0], psi.tensors[0], right[1])
        out.tensors[0] = t
        fid = float(np.linalg.norm(t) ** 2) / norm2
        if abs(fid - last) < tol:
            return out
        last = fid
    warnings.warn(
        f"variational truncation stopped after {max_sweeps} sweeps "
        f"(last fidelity {fid:.12f})",
        stacklevel=2,
    )
    return out


def mps_to_dense(psi: Mps, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense amplitude vector in row-major physical-index order."""
    total = 1
    for d in psi.phys_dims():
        total *= d
    if total > cap:
        raise ValueError(f"dense dimension {total} exceeds cap {cap}")
    v = np.ones((1, 1), dtype=np.complex128)
    for t in psi.tensors:
        v = np.tensordot(v, t, axes=(1, 0))
        v = v.reshape(v.shape[0] * v.shape[1], v.shape[2])
    return v[:, 0]


def mpo_identity(phys_dims) -> Mpo:
    return Mpo([np.eye(d, dtype=np.complex128).reshape(1, d, d, 1) for d in phys_dims])


def mpo_product(a: Mpo, b: Mpo) -> Mpo:
    """Exact MPO-MPO product ``a @ b`` (``b`` acts first); bonds multiply."""
    if len(a) != len(b):
        raise ValueError("length mismatch")
    out = []
    for wa, wb in zip(a.tensors, b.tensors):
        if wa.shape[2] != wb.shape[1]:
            raise ValueError("physical dimension mismatch in MPO product")
        m = np.tensordot(wa, wb, axes=(2, 1))  # (La,o,Ra,Lb,i,Rb)
        m = m.transpose(0, 3, 1, 4, 2, 5)
        La, Lb, o, i, Ra, Rb = m.shape
        out.append(m.reshape(La * Lb, o, i, Ra * Rb))
    return Mpo(out)


def mpo_to_dense(op: Mpo, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix of the operator (row index = out, column = in)."""
    dims_o = [t.shape[1] for t in op.tensors]
    dims_i = [t.shape[2] for t in op.tensors]
    total = int(np.prod(dims_o, dtype=np.int64)) * int(np.prod(dims_i, dtype=np.int64))
    if total > cap:
        raise ValueError(f"dense size {total} exceeds cap {cap}")
    m = np.ones((1, 1, 1), dtype=np.complex128)  # (out_prefix, in_prefix, bond)
    for t in op.tensors:
        m = np.tensordot(m, t, axes=(2, 0))  # (O, I, o, i, r)
        O, I, o, i, r = m.shape
        m = m.transpose(0, 2, 1, 3, 4).reshape(O * o, I * i, r)
    return m[:, :, 0]


def sandwich(bra: Mps, op: Mpo, ket: Mps, conjugate: bool = False) -> complex:
    """Contraction <bra| op |ket>; ``conjugate`` applies to the bra layer."""
    if not len(bra) == len(op) == len(ket):
        raise ValueError("length mismatch")
    env = np.ones((1, 1, 1), dtype=np.complex128)  # (bra, op, ket)
    for tb, w, tk in zip(bra.tensors, op.tensors, ket.tensors):
        tb = tb.conj() if conjugate else tb
        env = np.tensordot(env, tb, axes=(0, 0))  # (op, ket, s_out, bra')
        env = np.tensordot(env, w, axes=((0, 2), (0, 1)))  # (ket, bra', s_in, op')
        env = np.tensordot(env, tk, axes=((0, 2), (0, 1)))  # (bra', op', ket')
    return complex(env[0, 0, 0])


def random_mps(rng, n: int, d: int = 2, chi: int = 2, scale: float = 1.0) -> Mps:
    """Seeded random chain with the maximal useful bond profile capped at chi."""
    dims = [1]
    for i in range(1, n):
        dims.append(min(chi, d**i, d ** (n - i)))
    dims.append(1)
    tensors = []
    for i in range(n):
        shape = (dims[i], d, dims[i + 1])
        t = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        tensors.append(scale * t)
    return Mps(tensors)
