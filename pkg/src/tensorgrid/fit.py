"""Fitting chains and grids of fixed shape to a dense target state.

Both fitters maximize the normalized overlap |<target|psi>|^2 /
(<target|target><psi|psi>) by sweeping single-tensor updates:

* :func:`fit_mps` reuses the chain sweep from `mps` (in canonical gauge
  the local Gram matrix is the identity, so no solve is needed);
* :func:`fit_grid` works on a rows x cols grid with the physical legs
  on the last row.  The per-tensor linear form and Gram matrix are
  computed by exact contraction of the network minus that tensor, with
  the conjugated target carried along as an exact MPS over the columns;
  the update is a Tikhonov-regularized Gram solve.

Environments are cached per column: a sweep touches every column twice
(left-to-right then back) and refreshes the caches as it goes, so each
local update sees exact environments of the current iterate.

:func:`parameter_count` counts real parameters with every bond capped
at the rank it could possibly use given its surroundings, so inflated
boundary bonds do not get credit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import GRID_LEGS, Grid2d
from .mps import Mps, inner_product, mps_from_dense, random_mps, truncate_variational
from .tensor import Tensor, contract, permute

__all__ = ["FitConfig", "fit_mps", "fit_grid", "parameter_count", "random_fit_grid"]


@dataclass
class FitConfig:
    max_sweeps: int = 60
    tol: float = 1e-10  # stop when the fidelity gain per sweep drops below this
    init: str = "random_seeded"  # or "svd_from_target" / "given"
    seed: int = 0
    lam_reg: float = 1e-12  # Tikhonov scale, times trace(N)/dim


def _fidelity_dense(psi_vec, target) -> float:
    num = abs(np.vdot(target, psi_vec)) ** 2
    den = float(np.vdot(target, target).real * np.vdot(psi_vec, psi_vec).real)
    return float(num / den) if den > 0 else 0.0


def fit_mps(target, n_sites: int, chi: int, cfg: FitConfig | None = None, given=None):
    """Best bond-``chi`` chain for a dense target; returns (Mps, fidelity)."""
    cfg = cfg or FitConfig()
    target = np.asarray(target, dtype=np.complex128)
    if not np.any(target):
        raise ValueError("target must be nonzero")
    if len(target) % (2**n_sites) == 0 and len(target) == 2**n_sites:
        d = 2
    else:
        d = int(round(len(target) ** (1.0 / n_sites)))
        if d**n_sites != len(target):
            raise ValueError("target length is not d^n for any integer d")
    tmps = mps_from_dense(target, [d] * n_sites)
    if cfg.init == "random_seeded":
        init = random_mps(np.random.default_rng(cfg.seed), n_sites, d, chi)
    elif cfg.init == "svd_from_target":
        init = None  # truncate_variational's default start
    elif cfg.init == "given":
        if given is None:
            raise ValueError("init='given' needs a starting Mps")
        init = given
    else:
        raise ValueError(f"unknown init {cfg.init!r}")
    out = truncate_variational(
        tmps, chi, max_sweeps=cfg.max_sweeps, tol=cfg.tol, init=init
    )
    num = abs(inner_product(out, tmps)) ** 2
    den = abs(inner_product(out, out)) * abs(inner_product(tmps, tmps))
    return out, (float(num / den) if den > 0 else 0.0)


# ---------------------------------------------------------------------------
# grid fitting


class _GridFit:
    """Working state of a grid fit: squeezed site arrays plus column caches.

    Axis order per site is (up?, down?, left, right, phys?) where dummy
    vertical boundary legs and aux phys legs are dropped.  Leg labels
    are column-local: ("v", r) vertical edges, ("l", r)/("r", r) the
    horizontal bonds entering/leaving the column, "tp" the target leg.
    """

    def __init__(self, target, rows, cols, bond, d, rng):
        self.rows, self.cols, self.bond, self.d = rows, cols, bond, d
        self.tmps = mps_from_dense(np.conj(target), [d] * cols)
        self.t_norm2 = float(np.vdot(target, target).real)
        self.sites = [[None] * cols for _ in range(rows)]
        for r in range(rows):
            for c in range(cols):
                shape = self._shape(r, c)
                a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
                self.sites[r][c] = a / np.linalg.norm(a)
        self.e_left = [None] * (cols + 1)
        self.e_right = [None] * (cols + 1)
        self.g_left = [None] * (cols + 1)
        self.g_right = [None] * (cols + 1)

    def _dims(self, r, c):
        up = 1 if r == 0 else self.bond
        down = 1 if r == self.rows - 1 else self.bond
        left = 1 if c == 0 else self.bond
        right = 1 if c == self.cols - 1 else self.bond
        phys = self.d if r == self.rows - 1 else 1
        return up, down, left, right, phys

    def _shape(self, r, c):
        up, down, left, right, phys = self._dims(r, c)
        shape = []
        if r > 0:
            shape.append(up)
        if r < self.rows - 1:
            shape.append(down)
        shape += [left, right]
        if r == self.rows - 1:
            shape.append(phys)
        return tuple(shape)

    def _legs(self, r, phys_label):
        legs = []
        if r > 0:
            legs.append(("v", r))
        if r < self.rows - 1:
            legs.append(("v", r + 1))
        legs += [("l", r), ("r", r)]
        if r == self.rows - 1:
            legs.append(phys_label)
        return legs

    def _ket(self, r, c, phys_label="tp"):
        return Tensor(self._legs(r, phys_label), self.sites[r][c], check=False)

    def _bra(self, r, c, phys_label):
        legs = []
        if r > 0:
            legs.append(("V", r))
        if r < self.rows - 1:
            legs.append(("V", r + 1))
        legs += [("L", r), ("R", r)]
        if r == self.rows - 1:
            legs.append(phys_label)
        return Tensor(legs, self.sites[r][c].conj(), check=False)

    def _tsite(self, c):
        t = self.tmps.tensors[c]
        return Tensor(["tl", "tp", "tr"], t, check=False)

    @staticmethod
    def _fold(acc, tensors):
        for t in tensors:
            shared = [l for l in acc.legs if l in set(t.legs)]
            acc = contract(acc, t, [(l, l) for l in shared])
        return acc

    # -- environment maintenance -------------------------------------------

    def _trivial_env(self, labels):
        return Tensor(labels, np.ones((1,) * len(labels)), check=False)

    def _advance_left(self, c):
        """e_left[c+1], g_left[c+1] from the caches at c plus column c."""
        kets = [self._ket(r, c) for r in range(self.rows)]
        acc = self._fold(self.e_left[c], [self._tsite(c)] + kets)
        self.e_left[c + 1] = acc.relabel(
            {"tr": "tl", **{("r", r): ("l", r) for r in range(self.rows)}}
        )
        layers = []
        for r in range(self.rows):
            layers.append(self._ket(r, c, phys_label=("pp", r)))
            layers.append(self._bra(r, c, phys_label=("pp", r)))
        acc = self._fold(self.g_left[c], layers)
        self.g_left[c + 1] = acc.relabel(
            {
                **{("r", r): ("l", r) for r in range(self.rows)},
                **{("R", r): ("L", r) for r in range(self.rows)},
            }
        )

    def _advance_right(self, c):
        """e_right[c], g_right[c] from the caches at c+1 plus column c."""
        kets = [self._ket(r, c) for r in range(self.rows)]
        acc = self._fold(self.e_right[c + 1], [self._tsite(c)] + kets)
        self.e_right[c] = acc.relabel(
            {"tl": "tr", **{("l", r): ("r", r) for r in range(self.rows)}}
        )
        layers = []
        for r in range(self.rows):
            layers.append(self._ket(r, c, phys_label=("pp", r)))
            layers.append(self._bra(r, c, phys_label=("pp", r)))
        acc = self._fold(self.g_right[c + 1], layers)
        self.g_right[c] = acc.relabel(
            {
                **{("l", r): ("r", r) for r in range(self.rows)},
                **{("L", r): ("R", r) for r in range(self.rows)},
            }
        )

    def init_caches(self):
        rows = self.rows
        self.e_left[0] = self._trivial_env(["tl"] + [("l", r) for r in range(rows)])
        self.g_left[0] = self._trivial_env(
            [("l", r) for r in range(rows)] + [("L", r) for r in range(rows)]
        )
        self.e_right[self.cols] = self._trivial_env(
            ["tr"] + [("r", r) for r in range(rows)]
        )
        self.g_right[self.cols] = self._trivial_env(
            [("r", r) for r in range(rows)] + [("R", r) for r in range(rows)]
        )
        for c in range(self.cols - 1, -1, -1):
            self._advance_right(c)

    # -- local update --------------------------------------------------------

    def _linear_form(self, i, c):
        kets = [self._ket(r, c) for r in range(self.rows) if r != i]
        acc = self._fold(self.e_left[c], [self._tsite(c)] + kets + [self.e_right[c + 1]])
        order = self._legs(i, "tp")
        return permute(acc, order).data

    @staticmethod
    def _mirror(leg):
        if leg == "pk":
            return "pb"
        kind, r = leg
        return {"v": "V", "l": "L", "r": "R"}[kind], r

    def _gram(self, i, c):
        layers = []
        for r in range(self.rows):
            if r == i:
                continue
            layers.append(self._ket(r, c, phys_label=("pp", r)))
            layers.append(self._bra(r, c, phys_label=("pp", r)))
        if i == self.rows - 1:
            # the skipped site's physical index couples its two copies directly
            layers.append(Tensor(["pb", "pk"], np.eye(self.d), check=False))
        acc = self._fold(self.g_left[c], layers + [self.g_right[c + 1]])
        ket_order = self._legs(i, "pk")
        bra_order = [self._mirror(l) for l in ket_order]
        acc = permute(acc, bra_order + ket_order)
        dim = int(np.prod(self.sites[i][c].shape, dtype=np.int64))
        return acc.data.reshape(dim, dim)

    def update_site(self, i, c, lam_reg):
        b = self._linear_form(i, c).reshape(-1)
        n = self._gram(i, c)
        lam = lam_reg * max(np.trace(n).real, 1e-300) / n.shape[0]
        x = np.linalg.solve(n + lam * np.eye(n.shape[0]), b.conj())
        nx = np.linalg.norm(x)
        if nx > 0:
            x = x / nx
        self.sites[i][c] = x.reshape(self.sites[i][c].shape)

    # -- overall fidelity ----------------------------------------------------

    def fidelity(self):
        """Uses the fully advanced right caches (call right after a sweep)."""
        overlap = complex(self.e_right[0].data.reshape(-1)[0])
        norm2 = float(self.g_right[0].data.reshape(-1)[0].real)
        if norm2 <= 0 or self.t_norm2 <= 0:
            return 0.0
        return float(abs(overlap) ** 2 / (norm2 * self.t_norm2))

    def to_grid(self) -> Grid2d:
        tensors = []
        for r in range(self.rows):
            for c in range(self.cols):
                up, down, left, right, phys = self._dims(r, c)
                a = self.sites[r][c].reshape(up, down, left, right, phys)
                if r == self.rows - 1:
                    tensors.append(Tensor(GRID_LEGS + ("phys",), a, check=False))
                else:
                    tensors.append(
                        Tensor(GRID_LEGS, a.reshape(up, down, left, right), check=False)
                    )
        phys_sites = [(self.rows - 1, j) for j in range(self.cols)]
        return Grid2d(self.rows, self.cols, tensors, phys_sites)

    def load_grid(self, g: Grid2d):
        for r in range(self.rows):
            for c in range(self.cols):
                order = GRID_LEGS + (("phys",) if r == self.rows - 1 else ())
                a = permute(g.site(r, c), order).data
                self.sites[r][c] = a.reshape(self._shape(r, c))


def fit_grid(
    target,
    rows: int,
    cols: int,
    bond: int,
    cfg: FitConfig | None = None,
    given: Grid2d | None = None,
):
    """Best rows x cols grid of the given bond dimension for a dense target.

    Physical legs sit on the last row, one per column.  Returns
    (Grid2d, fidelity).  Sweeps are column-major (left-to-right then
    back); each local update is a regularized Gram solve, so the
    fidelity is monotone up to the regularization scale.
    """
    cfg = cfg or FitConfig()
    target = np.asarray(target, dtype=np.complex128)
    if not np.any(target):
        raise ValueError("target must be nonzero")
    d = int(round(len(target) ** (1.0 / cols)))
    if d**cols != len(target):
        raise ValueError("target length is not d^cols for any integer d")
    rng = np.random.default_rng(cfg.seed)
    state = _GridFit(target, rows, cols, bond, d, rng)
    if cfg.init == "given" or given is not None:
        if given is None:
            raise ValueError("init='given' needs a starting Grid2d")
        state.load_grid(given)
    elif cfg.init not in ("random_seeded", "svd_from_target"):
        raise ValueError(f"unknown init {cfg.init!r}")
    # (svd_from_target has no grid analogue; it falls back to the seeded start)
    state.init_caches()
    last = -1.0
    fid = 0.0
    converged = False
    for _ in range(cfg.max_sweeps):
        for c in range(state.cols):
            for r in range(state.rows):
                state.update_site(r, c, cfg.lam_reg)
            state._advance_left(c)
        for c in range(state.cols - 1, -1, -1):
            for r in range(state.rows):
                state.update_site(r, c, cfg.lam_reg)
            state._advance_right(c)
        fid = state.fidelity()
        if fid - last < cfg.tol:
            converged = True
            break
        last = fid
    if not converged:
        warnings.warn(
            f"grid fit stopped after {cfg.max_sweeps} sweeps (fidelity {fid:.9f})",
            stacklevel=2,
        )
    return state.to_grid(), fid


def random_fit_grid(rng, rows: int, cols: int, bond: int, d: int = 2) -> Grid2d:
    """Seeded random grid of the fit family (phys legs on the last row)."""
    target = rng.standard_normal(d**cols) + 1j * rng.standard_normal(d**cols)
    state = _GridFit(target, rows, cols, bond, d, rng)
    return state.to_grid()


# ---------------------------------------------------------------------------
# parameter counting


def _capped_counts(tensors):
    """tensors: list of (bond legs dict id->dim, phys dims list).

    Iterates bond caps to a fixpoint: a bond may not exceed the product
    of the other legs on either of its two endpoint tensors.
    """
    bond_dim = {}
    bond_ends = {}
    for k, (bonds, _) in enumerate(tensors):
        for b, dim in bonds.items():
            bond_dim[b] = dim
            bond_ends.setdefault(b, []).append(k)
    cap = dict(bond_dim)
    changed = True
    while changed:
        changed = False
        for b, ends in bond_ends.items():
            for k in ends:
                bonds, phys = tensors[k]
                other = 1
                for ob in bonds:
                    if ob != b:
                        other *= cap[ob]
                for p in phys:
                    other *= p
                if cap[b] > max(other, 1):
                    cap[b] = max(other, 1)
                    changed = True
    total = 0
    for bonds, phys in tensors:
        entries = 1
        for b in bonds:
            entries *= cap[b]
        for p in phys:
            entries *= p
        total += entries
    return 2 * total  # complex entries = 2 reals


def parameter_count(network) -> int:
    """Real-parameter count with position-capped bonds.

    Every bond is credited at most the rank it could ever use: the
    minimum over its two endpoints of the product of that tensor's
    other legs, iterated to a fixpoint.  Complex entries count as two
    real parameters.  Dummy dim-1 legs contribute factors of one.
    """
    tensors = []
    if isinstance(network, Mps):
        n = len(network)
        for k, t in enumerate(network.tensors):
            bonds = {}
            if k > 0:
                bonds[("b", k - 1)] = t.shape[0]
            if k < n - 1:
                bonds[("b", k)] = t.shape[2]
            tensors.append((bonds, [t.shape[1]]))
    elif isinstance(network, Grid2d):
        for r in range(network.rows):
            for c in range(network.cols):
                t = network.site(r, c)
                bonds = {}
                if r > 0:
                    bonds[("v", r - 1, c)] = t.dim("up")
                if r < network.rows - 1:
                    bonds[("v", r, c)] = t.dim("down")
                if c > 0:
                    bonds[("h", r, c - 1)] = t.dim("left")
                if c < network.cols - 1:
                    bonds[("h", r, c)] = t.dim("right")
                phys = [t.dim("phys")] if "phys" in t.legs else []
                tensors.append((bonds, phys))
    else:
        raise TypeError(f"cannot count parameters of {type(network).__name__}")
    return _capped_counts(tensors)
