"""Compressing products of MPO rows into a single fixed-bond row.

An MPO vectorizes into an MPS of squared physical dimension, so row
compression is the same single-site overlap sweep used for state
truncation: one optimizer, one test surface.  The exact product of the
input rows is never densified; it is carried as an MPO whose bonds are
the products of the factors' bonds.

Iterated doubling compresses two copies of the current row into one, so
an operator covering 2^k elementary steps costs k compressions.  The
achieved fidelity is returned at every level so callers can refuse a
level that falls below their threshold (default 0.999).
"""

from __future__ import annotations

from functools import reduce

from .mps import (
    Mps,
    Mpo,
    canonicalize,
    inner_product,
    mpo_product,
    truncate_variational,
)

__all__ = [
    "mpo_as_mps",
    "mps_as_mpo",
    "mpo_fidelity",
    "compress_product",
    "compress_doubling",
    "DEFAULT_REFUSAL",
]

DEFAULT_REFUSAL = 0.999


def mpo_as_mps(op: Mpo) -> Mps:
    """Vectorize: physical (out, in) pairs become one leg of dimension out*in."""
    return Mps([w.reshape(w.shape[0], -1, w.shape[3]) for w in op.tensors])


def mps_as_mpo(psi: Mps, phys_dims) -> Mpo:
    """Undo :func:`mpo_as_mps` given the per-site (out, in) dimensions."""
    tensors = []
    for t, (o, i) in zip(psi.tensors, phys_dims):
        if t.shape[1] != o * i:
            raise ValueError("physical dimensions do not match the vectorized chain")
        tensors.append(t.reshape(t.shape[0], o, i, t.shape[2]))
    return Mpo(tensors)


def mpo_fidelity(a: Mpo, b: Mpo) -> float:
    """|<<a|b>>|^2 / (<<a|a>> <<b|b>>) in the Hilbert-Schmidt sense."""
    va, vb = mpo_as_mps(a), mpo_as_mps(b)
    na = abs(inner_product(va, va))
    nb = abs(inner_product(vb, vb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("fidelity of a zero operator is undefined")
    return float(abs(inner_product(va, vb)) ** 2 / (na * nb))


def compress_product(
    rows,
    chi: int,
    max_sweeps: int = 30,
    tol: float = 1e-12,
):
    """One bond-``chi`` MPO approximating the product of ``rows``.

    ``rows`` are in application order (first entry acts first).  Returns
    the compressed row and the achieved fidelity against the exact
    product.  A low fidelity is the caller's cue to compress fewer rows.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("need at least one row")
    if chi < 1:
        raise ValueError("chi must be positive")
    exact = reduce(mpo_product, reversed(rows))  # rows[-1] @ ... @ rows[0]
    target = mpo_as_mps(exact)
    out = truncate_variational(target, chi, max_sweeps=max_sweeps, tol=tol)
    num = abs(inner_product(out, target)) ** 2
    den = abs(inner_product(out, out)) * abs(inner_product(target, target))
    fid = float(num / den) if den > 0 else 0.0
    out = canonicalize(out, len(out) // 2)
    return mps_as_mpo(out, exact.phys_dims()), min(fid, 1.0)


def compress_doubling(
    row: Mpo,
    k: int,
    chi: int,
    max_sweeps: int = 30,
    tol: float = 1e-12,
):
    """k doubling compressions: level m covers 2^m copies of ``row``.

    Returns the level-k row and the per-level fidelities (length k).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    level = row
    fidelities = []
    for _ in range(k):
        level, fid = compress_product(
            [level, level], chi, max_sweeps=max_sweeps, tol=tol
        )
        fidelities.append(fid)
    return level, fidelities
