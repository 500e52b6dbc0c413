"""Tensor-grid toolkit.

2D tensor networks built from quantum circuits and Trotterized time
evolution; exact, boundary-MPS (with additive error correction) and
Metropolis contraction; MPO-row compression; variational fitting of
chains, grids and triangle-loop trees.
"""

from .circuit import (
    Circuit,
    ControlledPhase,
    OneQubit,
    PostSelect,
    encode,
    encode_weighted_graph_state,
    simulate_postselected,
)
from .compress import compress_doubling, compress_product, mpo_fidelity
from .fit import FitConfig, fit_grid, fit_mps, parameter_count
from .grid import (
    ContractionReport,
    Grid2d,
    contract_approx,
    contract_exact,
    contract_with_correction,
    expectation,
    grid_from_json,
    grid_to_json,
    grid_to_state,
    project_physical,
)
from .montecarlo import (
    KERNEL_NAME,
    McConfig,
    McResult,
    TorusNetwork,
    detailed_balance_check,
    mc_contract,
    row_matrix,
)
from .mps import (
    Mpo,
    Mps,
    apply_mpo,
    canonicalize,
    inner_product,
    mps_from_dense,
    mps_from_product,
    mps_to_dense,
    truncate_svd,
    truncate_variational,
)
from .statevector import StateVector, apply_gate, evolve_exact, fidelity
from .tensor import Tensor, contract, permute, svd_split
from .tree import (
    TreeNetwork,
    TriangleLoop,
    expand_triangle,
    ground_state_sweep,
    local_ground_update,
    tree_contract,
)
from .trotter import IsingModel, TrotterPlan, evolution_grid, half_step_mpo, step_count

__version__ = "0.1.0"
