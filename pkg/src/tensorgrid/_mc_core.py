"""Pure numpy Metropolis chain for the torus contraction.

Reference implementation of the hot loop; `_mc_kernel.pyx` is the
compiled twin with the same signature and the same proposal-stream
semantics, so both produce the same chain for the same inputs (up to
floating-point rounding).  Selection happens in `montecarlo`.
"""

from __future__ import annotations

import numpy as np


def row_value(tensors, k, top, bottom):
    """Tr prod_j T[k,j][top_j, bottom_j], columns multiplied left to right."""
    m = tensors[k, 0, top[0], bottom[0]]
    for j in range(1, tensors.shape[1]):
        m = m @ tensors[k, j, top[j], bottom[j]]
    return m.trace()


def all_row_values(tensors, state, out=None):
    n_rows = tensors.shape[0]
    if out is None:
        out = np.empty(n_rows, dtype=np.complex128)
    for k in range(n_rows):
        out[k] = row_value(tensors, k, state[k], state[(k + 1) % n_rows])
    return out


def run_chain(
    tensors,
    state,
    split,
    prop_rows,
    prop_cols,
    prop_vals,
    draws,
    burn_in,
    thinning,
    f_out,
    invmu_out,
    states_out=None,
):
    """Run the Metropolis chain over the given proposal stream.

    ``state`` is updated in place; samples are written every ``thinning``
    moves once ``burn_in`` moves have passed.  Returns (accepted, proper)
    where ``proper`` counts the proposals that actually changed a value;
    self-proposals are excluded from the acceptance statistics.
    """
    n_rows = tensors.shape[0]
    rvals = all_row_values(tensors, state)
    accepted = 0
    proper = 0
    k_sample = 0
    n_moves = len(prop_rows)
    for m in range(n_moves):
        i = int(prop_rows[m])
        j = int(prop_cols[m])
        v = int(prop_vals[m])
        old = state[i, j]
        if v != old:
            proper += 1
        state[i, j] = v
        ra = (i - 1) % n_rows
        changed = (ra, i) if ra != i else (i,)
        new_vals = {
            k: row_value(tensors, k, state[k], state[(k + 1) % n_rows])
            for k in changed
        }
        ratio = 1.0
        for k in changed:
            if k < split:
                num = abs(new_vals[k]) ** 2
                den = abs(rvals[k]) ** 2
                ratio *= num / den
        if draws[m] < ratio:
            if v != old:
                accepted += 1
            for k in changed:
                rvals[k] = new_vals[k]
        else:
            state[i, j] = old
        if m >= burn_in and (m - burn_in + 1) % thinning == 0:
            prod_l = complex(np.prod(rvals[:split]))
            prod_r = complex(np.prod(rvals[split:]))
            f_out[k_sample] = prod_r / prod_l.conjugate()
            invmu_out[k_sample] = 1.0 / abs(prod_l) ** 2
            if states_out is not None:
                states_out[k_sample] = state
            k_sample += 1
    return accepted, proper
