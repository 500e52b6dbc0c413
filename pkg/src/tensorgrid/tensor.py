"""Dense complex tensors with labeled legs.

Every network structure in this package (grids, chains, trees) is wired
together by leg *labels* rather than axis positions: contraction is
label driven, which removes the usual transposition bugs when sites are
rewired.  A label can be any hashable object; grid code uses tuples like
``("v", i, j)`` to name edges.

All data is complex double precision.  Tensors are treated as immutable
values after construction; operations return new tensors.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Tensor", "contract", "permute", "svd_split", "madd_cost"]


class Tensor:
    """A dense complex tensor with an ordered tuple of labeled legs.

    Leg ``legs[k]`` corresponds to axis ``k`` of ``data``.  Labels must
    be unique within one tensor, and entries must be finite.
    """

    __slots__ = ("legs", "data")

    def __init__(self, legs, data, check: bool = True):
        self.legs = tuple(legs)
        self.data = np.asarray(data, dtype=np.complex128)
        if check:
            if len(self.legs) != self.data.ndim:
                raise ValueError(
                    f"{len(self.legs)} legs for an array of rank {self.data.ndim}"
                )
            if len(set(self.legs)) != len(self.legs):
                raise ValueError(f"duplicate leg labels in {self.legs}")
            if not np.all(np.isfinite(self.data)):
                raise ValueError("tensor entries must be finite")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    def dim(self, leg) -> int:
        return self.data.shape[self.axis(leg)]

    def axis(self, leg) -> int:
        try:
            return self.legs.index(leg)
        except ValueError:
            raise KeyError(f"no leg {leg!r} in tensor with legs {self.legs}") from None

    def relabel(self, mapping: dict) -> "Tensor":
        """Return a tensor with legs renamed through ``mapping`` (same data)."""
        return Tensor([mapping.get(l, l) for l in self.legs], self.data, check=True)

    def __repr__(self):
        return f"Tensor(legs={self.legs}, dims={self.data.shape})"


def madd_cost(a: Tensor, b: Tensor, pairs) -> int:
    """Multiply-add count of ``contract(a, b, pairs)``.

    The cost model is the dense one: (product of result dims) times
    (product of contracted dims).
    """
    contracted = 1
    for la, _ in pairs:
        contracted *= a.dim(la)
    kept_a = {la for la, _ in pairs}
    kept_b = {lb for _, lb in pairs}
    result = 1
    for l in a.legs:
        if l not in kept_a:
            result *= a.dim(l)
    for l in b.legs:
        if l not in kept_b:
            result *= b.dim(l)
    return result * contracted


def contract(a: Tensor, b: Tensor, pairs) -> Tensor:
    """Contract ``a`` with ``b`` over the given (label-in-a, label-in-b) pairs.

    Result legs are the unpaired legs of ``a`` followed by those of ``b``,
    both in their original order.  Paired legs must have equal dimensions,
    and the result must not end up with duplicate labels.
    """
    pairs = list(pairs)
    axes_a = [a.axis(la) for la, _ in pairs]
    axes_b = [b.axis(lb) for _, lb in pairs]
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ValueError("a leg may appear in at most one pair")
    for (la, lb), ax_a, ax_b in zip(pairs, axes_a, axes_b):
        if a.data.shape[ax_a] != b.data.shape[ax_b]:
            raise ValueError(
                f"dimension mismatch on pair ({la!r}, {lb!r}): "
                f"{a.data.shape[ax_a]} != {b.data.shape[ax_b]}"
            )
    out_legs = [l for k, l in enumerate(a.legs) if k not in set(axes_a)]
    out_legs += [l for k, l in enumerate(b.legs) if k not in set(axes_b)]
    if len(set(out_legs)) != len(out_legs):
        raise ValueError(f"duplicate labels in contraction result: {out_legs}")
    data = np.tensordot(a.data, b.data, axes=(axes_a, axes_b))
    return Tensor(out_legs, data, check=False)


def permute(a: Tensor, new_order) -> Tensor:
    """Reorder the legs of ``a`` into ``new_order`` (a permutation of its labels)."""
    new_order = tuple(new_order)
    if sorted(map(repr, new_order)) != sorted(map(repr, a.legs)) or len(
        set(new_order)
    ) != len(new_order):
        raise ValueError(f"{new_order} is not a permutation of {a.legs}")
    axes = [a.axis(l) for l in new_order]
    return Tensor(new_order, np.transpose(a.data, axes), check=False)


def svd_split(a: Tensor, left_legs, chi: int | None = None, new_label="_svd"):
    """Split ``a`` by SVD into ``u @ diag(s) @ vh`` across a leg bipartition.

    ``left_legs`` selects a nonempty proper subset of the legs; the two
    factors share a fresh bond leg ``new_label``.  At most ``chi``
    singular values are kept (all of them if ``chi`` is None); the kept
    factorization is the Frobenius-optimal rank-``chi`` approximation.

    Returns ``(u, s, vh, discarded_weight)`` where ``s`` is the kept
    singular values in descending order and ``discarded_weight`` is the
    sum of the squared dropped ones.
    """
    left = [l for l in a.legs if l in set(left_legs)]
    right = [l for l in a.legs if l not in set(left_legs)]
    if not left or not right:
        raise ValueError("left_legs must be a nonempty proper subset of the legs")
    if new_label in a.legs:
        raise ValueError(f"new bond label {new_label!r} collides with an existing leg")
    if chi is not None and chi < 1:
        raise ValueError("chi must be positive")
    ap = permute(a, left + right)
    ldim = int(np.prod([a.dim(l) for l in left], dtype=np.int64))
    rdim = int(np.prod([a.dim(l) for l in right], dtype=np.int64))
    mat = ap.data.reshape(ldim, rdim)
    try:
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but sturdier.
        import scipy.linalg

        u, s, vh = scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")
    keep = len(s) if chi is None else min(chi, len(s))
    discarded = float(np.sum(s[keep:] ** 2))
    u_t = Tensor(
        left + [new_label],
        u[:, :keep].reshape([a.dim(l) for l in left] + [keep]),
        check=False,
    )
    vh_t = Tensor(
        [new_label] + right,
        vh[:keep].reshape([keep] + [a.dim(l) for l in right]),
        check=False,
    )
    return u_t, s[:keep].copy(), vh_t, discarded
