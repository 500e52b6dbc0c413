"""Command-line front end: reproducible experiments with CSV/JSON output.

Subcommands: evolve, fit, circuit, compress, mc, tree.  Every command
accepts --seed, --out and --format {csv,json}; runs are deterministic
for a fixed seed (timing columns excepted).  Exit codes: 0 success,
2 validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import circuit as qc
from . import montecarlo as mc
from . import tree as ttn
from .fit import FitConfig, fit_grid, fit_mps, parameter_count
from .grid import (
    MemoryCapError,
    contract_approx,
    contract_exact,
    contract_with_correction,
    double_layer,
    grid_to_state,
    project_physical,
)
from .statevector import evolve_exact, product_state, run_circuit
from .trotter import IsingModel, TrotterPlan, evolution_grid, half_step_mpo, step_count

__all__ = ["main"]


def _write_rows(args, header, rows):
    if args.format == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join("" if v is None else repr(v) if isinstance(v, float)
                                  else str(v) for v in row))
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_json(args, doc):
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _bra_vector(name):
    if name == "plus":
        return np.array([1.0, 1.0]) / np.sqrt(2)
    if name == "zero":
        return np.array([1.0, 0.0])
    raise ValueError(f"unknown bra {name!r}")


# ---------------------------------------------------------------------------


def cmd_evolve(args):
    model = IsingModel(args.n, args.b)
    steps = args.steps if args.steps else step_count(args.t, args.eps)
    plan = TrotterPlan(args.t, steps)
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    grid = evolution_grid(model, plan, plus)
    if args.network == "norm":
        scalar = double_layer(grid)
        exact = 1.0 + 0.0j  # unitary rows on a normalized product state
    else:
        bra = _bra_vector(args.bra)
        scalar = project_physical(grid, [bra] * args.n)
        exact = complex(contract_exact(scalar)[0])
    rows = []
    for chi in args.chi:
        t0 = time.perf_counter()
        if args.correct:
            rep = contract_with_correction(scalar, args.direction, chi)
            corrected_err = abs(rep.corrected - exact) / abs(exact)
        else:
            rep = contract_approx(scalar, args.direction, chi)
            corrected_err = None
        raw_err = abs(rep.value - exact) / abs(exact)
        rows.append(
            (chi, raw_err, corrected_err, 1000.0 * (time.perf_counter() - t0))
        )
    _write_rows(args, ["chi_cut", "raw_err", "corrected_err", "wall_ms"], rows)


def cmd_fit(args):
    model = IsingModel(args.n, args.b)
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    target = evolve_exact(model, args.t, product_state([plus] * args.n)).amplitudes
    rows = []
    for chi in args.chi:
        for seed in range(args.seeds):
            t0 = time.perf_counter()
            m, f = fit_mps(target, args.n, chi,
                           FitConfig(init="svd_from_target", seed=seed,
                                     max_sweeps=args.sweeps))
            rows.append(
                (
                    f"mps_chi{chi}",
                    parameter_count(m),
                    f,
                    float(np.log10(max(1.0 - f, 1e-16))),
                    seed,
                    1000.0 * (time.perf_counter() - t0),
                )
            )
    for shape in args.shapes:
        r, d = (int(x) for x in shape.split("x"))
        for seed in range(args.seeds):
            t0 = time.perf_counter()
            g, f = fit_grid(target, r, args.n, d,
                            FitConfig(seed=seed, max_sweeps=args.sweeps))
            rows.append(
                (
                    f"cts_{r}x{args.n}_d{d}",
                    parameter_count(g),
                    f,
                    float(np.log10(max(1.0 - f, 1e-16))),
                    seed,
                    1000.0 * (time.perf_counter() - t0),
                )
            )
    _write_rows(
        args,
        ["method", "params", "fidelity", "log10_one_minus_F", "seed", "wall_ms"],
        rows,
    )


def cmd_circuit(args):
    c = qc.load_circuit(args.file)
    has_post = any(
        isinstance(g, qc.PostSelect) for layer in c.layers for g in layer
    )
    doc = {"wires": c.n_wires, "depth": c.depth()}
    if has_post:
        state, weight = qc.simulate_postselected(c, chi_cut=args.chi)
        doc["success_weight"] = weight
    else:
        state = grid_to_state(qc.encode(c))
        doc["success_weight"] = float(np.vdot(state, state).real)
    if args.oracle:
        ref = run_circuit(c).amplitudes
        dev = float(np.max(np.abs(state - ref))) if state is not None else None
        doc["max_amplitude_dev"] = dev
        sys.stdout.write(f"max amplitude deviation vs oracle: {dev}\n")
    _write_json(args, doc)


def cmd_compress(args):
    from .compress import compress_doubling, compress_product

    model = IsingModel(args.n, args.b)
    odd = half_step_mpo(model, "odd_bonds", args.dt)
    even = half_step_mpo(model, "even_bonds", args.dt)
    full, base_fid = compress_product([even, odd], args.chi)
    level, fids = compress_doubling(full, args.levels, args.chi)
    rows = [(0, base_fid, 1)]
    for k, f in enumerate(fids):
        rows.append((k + 1, f, 2 ** (k + 1)))
    if any(f < args.refuse for f in fids):
        sys.stderr.write(
            f"warning: a doubling level fell below the refusal threshold "
            f"{args.refuse}; compress fewer rows\n"
        )
    _write_rows(args, ["level", "fidelity", "time_steps"], rows)


def cmd_mc(args):
    if args.uniform:
        torus = mc.uniform_torus(args.rows, args.cols, args.d)
    else:
        torus = mc.random_torus(
            np.random.default_rng(args.seed + 10_000), args.rows, args.cols,
            args.d, positive=args.positive,
        )
    cfg = mc.McConfig(
        n_samples=args.samples,
        burn_in=args.burn,
        thinning=args.thin,
        seed=args.seed,
        split_row=args.split,
        chains=args.chains,
    )
    res = mc.mc_contract(torus, cfg)
    doc = {
        "estimate_re": res.estimate.real,
        "estimate_im": res.estimate.imag,
        "std_error": res.std_error,
        "acceptance": res.diagnostics["acceptance"],
        "chains": res.diagnostics["chains"],
        "sign_flag": res.diagnostics["sign_flag"],
    }
    if args.exact:
        doc["exact_re"] = mc.torus_contract_exact(torus).real
    _write_json(args, doc)


def cmd_tree(args):
    terms = ttn.ising_terms(args.ising, args.b)
    cfg = ttn.GroundConfig(max_sweeps=args.sweeps, tol=1e-12)
    tree = energy = None
    for restart in range(args.restarts):  # variational: keep the lowest energy
        rng = np.random.default_rng(args.seed + restart)
        start = ttn.random_tree_state(rng, args.ising, 2, args.bond)
        cand, e = ttn.ground_state_sweep(start, terms, cfg)
        if energy is None or e < energy:
            tree, energy = cand, e
    if args.dint:
        start, _ = ttn.replace_with_loops(tree, (args.dint,) * 3, init="svd")
        tree, energy = ttn.ground_state_sweep(start, terms, cfg)
    doc = {"sites": args.ising, "bond": args.bond, "dint": args.dint,
           "energy": energy}
    if args.ising <= 12:
        from .statevector import dense_hamiltonian

        w = np.linalg.eigvalsh(dense_hamiltonian(IsingModel(args.ising, args.b)))
        doc["exact_energy"] = float(w[0])
        doc["gap"] = energy - float(w[0])
        sys.stdout.write(f"energy gap vs exact diagonalization: {doc['gap']:.3e}\n")
    _write_json(args, doc)


# ---------------------------------------------------------------------------


def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def build_parser():
    p = argparse.ArgumentParser(
        prog="tensorgrid",
        description="2D tensor-grid experiments: time evolution, fitting, "
        "circuit encoding, MPO compression, Monte-Carlo and tree networks.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("evolve", help="contract a Trotter grid at several chi")
    sp.add_argument("--n", type=int, default=12)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=3.5)
    sp.add_argument("--steps", type=int, default=0, help="Trotter steps (0: from --eps)")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--chi", type=_int_list, default=[12])
    sp.add_argument("--correct", action="store_true")
    sp.add_argument("--direction", default="left_to_right")
    sp.add_argument("--network", default="norm", choices=("norm", "amplitude"),
                    help="contract <psi|psi> (norm) or <bra|psi> (amplitude)")
    sp.add_argument("--bra", default="plus", choices=("plus", "zero"))
    common(sp)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("fit", help="fidelity-per-parameter scan (MPS vs grid)")
    sp.add_argument("--n", type=int, default=12)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=3.5)
    sp.add_argument("--chi", type=_int_list, default=[2, 3, 4, 5, 6])
    sp.add_argument("--shapes", nargs="*", default=["3x2", "4x2"],
                    help="grid shapes as ROWSxBOND, e.g. 3x2")
    sp.add_argument("--seeds", type=int, default=5)
    sp.add_argument("--sweeps", type=int, default=100)
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("circuit", help="encode a circuit file and contract it")
    sp.add_argument("--file", required=True)
    sp.add_argument("--oracle", action="store_true",
                    help="compare against the dense state-vector simulation")
    sp.add_argument("--chi", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_circuit)

    sp = sub.add_parser("compress", help="doubling compression of Trotter rows")
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=0.02)
    sp.add_argument("--chi", type=int, default=8)
    sp.add_argument("--levels", type=int, default=4)
    sp.add_argument("--refuse", type=float, default=0.999)
    common(sp)
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("mc", help="Metropolis contraction of a torus network")
    sp.add_argument("--rows", type=int, default=2)
    sp.add_argument("--cols", type=int, default=2)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--uniform", action="store_true")
    sp.add_argument("--positive", action="store_true")
    sp.add_argument("--samples", type=int, default=4000)
    sp.add_argument("--burn", type=int, default=None)
    sp.add_argument("--thin", type=int, default=None)
    sp.add_argument("--split", type=int, default=None)
    sp.add_argument("--chains", type=int, default=1)
    sp.add_argument("--exact", action="store_true",
                    help="also report the exact value (small tori)")
    common(sp)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("tree", help="tree-network Ising ground state")
    sp.add_argument("--ising", type=int, default=8)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--bond", type=int, default=6)
    sp.add_argument("--dint", type=int, default=0,
                    help="triangle internal dimension (0: plain tree)")
    sp.add_argument("--sweeps", type=int, default=60)
    sp.add_argument("--restarts", type=int, default=3)
    common(sp)
    sp.set_defaults(func=cmd_tree)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (np.linalg.LinAlgError, MemoryCapError, MemoryError,
            mc.ErgodicityError, qc.PostSelectionImpossible) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return 3
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
