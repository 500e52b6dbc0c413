# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Metropolis chain for the torus contraction.

Same contract as `_mc_core.run_chain`: identical proposal-stream
semantics, identical sampling schedule, so a run is reproducible across
the two implementations up to floating-point rounding.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef double complex _row_value(
    const double complex[:, :, :, :, :, :] tensors,
    Py_ssize_t k,
    const long long[:] top,
    const long long[:] bottom,
    double complex[:, :] acc,
    double complex[:, :] tmp,
) noexcept nogil:
    cdef Py_ssize_t n_cols = tensors.shape[1]
    cdef Py_ssize_t d = tensors.shape[2]
    cdef Py_ssize_t j, a, b, c
    cdef double complex s
    for a in range(d):
        for b in range(d):
            acc[a, b] = tensors[k, 0, top[0], bottom[0], a, b]
    for j in range(1, n_cols):
        for a in range(d):
            for b in range(d):
                s = 0
                for c in range(d):
                    s = s + acc[a, c] * tensors[k, j, top[j], bottom[j], c, b]
                tmp[a, b] = s
        for a in range(d):
            for b in range(d):
                acc[a, b] = tmp[a, b]
    s = 0
    for a in range(d):
        s = s + acc[a, a]
    return s


def run_chain(
    tensors,
    state,
    Py_ssize_t split,
    prop_rows,
    prop_cols,
    prop_vals,
    draws,
    Py_ssize_t burn_in,
    Py_ssize_t thinning,
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
    cdef const double complex[:, :, :, :, :, :] t = np.ascontiguousarray(
        tensors, dtype=np.complex128
    )
    cdef long long[:, :] s = state
    cdef const long long[:] rows = prop_rows
    cdef const long long[:] cols = prop_cols
    cdef const long long[:] vals = prop_vals
    cdef const double[:] u = draws
    cdef double complex[:] f = f_out
    cdef double[:] invmu = invmu_out
    cdef long long[:, :, :] rec
    cdef bint record = states_out is not None
    if record:
        rec = states_out

    cdef Py_ssize_t n_rows = t.shape[0]
    cdef Py_ssize_t n_cols = t.shape[1]
    cdef Py_ssize_t d = t.shape[2]
    cdef Py_ssize_t n_moves = rows.shape[0]

    scratch = np.empty((2, d, d), dtype=np.complex128)
    cdef double complex[:, :] acc = scratch[0]
    cdef double complex[:, :] tmp = scratch[1]
    rv = np.empty(n_rows, dtype=np.complex128)
    cdef double complex[:] rvals = rv
    cdef double complex new_a, new_b, prod_l, prod_r
    cdef double ratio, mag
    cdef Py_ssize_t m, i, j, k, ra, old, v, ri, rj
    cdef Py_ssize_t accepted = 0, proper = 0, k_sample = 0

    for k in range(n_rows):
        rvals[k] = _row_value(t, k, s[k], s[(k + 1) % n_rows], acc, tmp)

    for m in range(n_moves):
        i = rows[m]
        j = cols[m]
        v = vals[m]
        old = s[i, j]
        if v != old:
            proper += 1
        s[i, j] = v
        ra = i - 1 if i > 0 else n_rows - 1  # C % is not a modulus for negatives
        new_a = _row_value(t, i, s[i], s[(i + 1) % n_rows], acc, tmp)
        if ra != i:
            new_b = _row_value(t, ra, s[ra], s[i], acc, tmp)
        ratio = 1.0
        if i < split:
            mag = rvals[i].real * rvals[i].real + rvals[i].imag * rvals[i].imag
            ratio *= (new_a.real * new_a.real + new_a.imag * new_a.imag) / mag
        if ra != i and ra < split:
            mag = rvals[ra].real * rvals[ra].real + rvals[ra].imag * rvals[ra].imag
            ratio *= (new_b.real * new_b.real + new_b.imag * new_b.imag) / mag
        if u[m] < ratio:
            if v != old:
                accepted += 1
            rvals[i] = new_a
            if ra != i:
                rvals[ra] = new_b
        else:
            s[i, j] = old
        if m >= burn_in and (m - burn_in + 1) % thinning == 0:
            prod_l = 1
            for k in range(split):
                prod_l = prod_l * rvals[k]
            prod_r = 1
            for k in range(split, n_rows):
                prod_r = prod_r * rvals[k]
            f[k_sample] = prod_r / prod_l.conjugate()
            invmu[k_sample] = 1.0 / (
                prod_l.real * prod_l.real + prod_l.imag * prod_l.imag
            )
            if record:
                for ri in range(n_rows):
                    for rj in range(n_cols):
                        rec[k_sample, ri, rj] = s[ri, rj]
            k_sample += 1
    return accepted, proper
