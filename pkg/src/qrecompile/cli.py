"""Command-line surface: simulations, recompiles, eliminations and baselines.

All numeric defaults follow the benchmark runs (step sizes, solver choices,
tolerances), so reproducing them needs few flags.  Every command writes
deterministic CSV traces: a single header row, floats with 17 significant
digits.  Exit codes: 0 success, 1 input error, 2 completed with diagnostics
(e.g. non-convergence).

A config file (--config) may supply defaults per command as INI sections:

    [recompile]
    dtau = 0.01
    trace = out/recomp.csv

Command-line flags override config values; unknown config keys are rejected.
Internal parallelism is capped with --threads or RECOMPILER_THREADS (applied
to the BLAS pool before numpy loads).
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DIAGNOSTIC = 2

_BLAS_VARS = ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS")


class InputError(Exception):
    pass


class Diagnostic(Exception):
    """Run completed but left something to report (exit code 2)."""


def _apply_thread_cap(argv):
    threads = os.environ.get("RECOMPILER_THREADS")
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            threads = argv[i + 1]
        elif arg.startswith("--threads="):
            threads = arg.split("=", 1)[1]
    if threads is None:
        return
    try:
        n = int(threads)
    except ValueError:
        raise InputError(f"--threads expects an integer, got {threads!r}") from None
    if n < 1:
        raise InputError("--threads must be at least 1")
    for var in _BLAS_VARS:
        os.environ.setdefault(var, str(n))


def _fmt(value):
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_trace_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


def trace_rows(trace, columns):
    """Yield (iter, *extras, *params) rows for the named extra columns."""
    for i in range(len(trace)):
        row = [trace.iterations[i], trace.energies[i]]
        for name in columns:
            row.append(trace.extras[name][i])
        row.extend(float(v) for v in trace.params[i])
        yield row


def _param_header(n):
    return [f"param{i}" for i in range(n)]


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _load_circuit(path):
    from .circuits import parse_circuit
    from .paulis import ParseError

    try:
        return parse_circuit(_read_text(path))
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_hamiltonian(path):
    from .paulis import ParseError, parse_pauli_sum

    try:
        return parse_pauli_sum(_read_text(path))
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_params(path):
    from .circuits import parse_params
    from .paulis import ParseError

    try:
        return parse_params(_read_text(path))
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _solver_from_spec(spec, mode):
    from .mclachlan import SolverConfig

    if spec is None:
        return SolverConfig.default_for_mode(mode)
    name, _, arg = spec.partition(":")
    if name == "tsvd":
        return SolverConfig(method="tsvd", tsvd_tol=float(arg) if arg else 1e-5)
    if name == "tikhonov":
        if arg:
            lams = tuple(float(x) for x in arg.split(","))
            return SolverConfig(method="tikhonov", tikhonov_lambdas=lams)
        return SolverConfig(method="tikhonov")
    if name == "lstsq":
        return SolverConfig(method="lstsq")
    raise InputError(f"unknown solver {spec!r} (expected tsvd[:tol], tikhonov[:l1,l2,l3], lstsq)")


def _bundled(name):
    from . import datafiles

    return str(datafiles.bundled_path(name))


# ---------------------------------------------------------------------------
# Command implementations.  Each receives the merged option namespace.
# ---------------------------------------------------------------------------

def cmd_simulate(opts):
    import numpy as np

    from . import mclachlan
    from .dynamics import exact_evolve
    from .mclachlan import EvolutionConfig
    from .paulis import init_basis_state

    mode = {"real": mclachlan.REALTIME, "imag": mclachlan.IMAGINARY}[opts.mode]
    h = _load_hamiltonian(opts.hamiltonian)
    circuit = _load_circuit(opts.circuit)
    state = init_basis_state(opts.in_spec)
    steps = int(opts.steps)
    dt = float(opts.dt) if opts.dt is not None else (2.5e-3 if mode == mclachlan.REALTIME else 1e-2)
    solver = _solver_from_spec(opts.solver, mode)
    if opts.params is not None:
        p0 = _load_params(opts.params)
    else:
        p0 = np.full(circuit.n_params, 1e-8)
    exactable = mode == mclachlan.REALTIME and circuit.n_qubits <= 12
    columns = ["t", "fidelity"] if exactable else ["t"]
    header = ["iter", "energy"] + columns + _param_header(circuit.n_params)
    if steps == 0:
        write_trace_csv(opts.trace, header, [])
        return EXIT_OK
    cfg = EvolutionConfig(
        mode=mode, step=dt, max_iterations=steps, convergence_window=0,
        global_phase=not opts.no_global_phase,
    )

    def callback(iteration, params, psi):
        extra = {"t": iteration * dt}
        if exactable:
            reference = exact_evolve(h, state, iteration * dt)
            extra["fidelity"] = min(abs(np.vdot(reference.amplitudes, psi)) ** 2, 1.0)
        return extra

    trace = mclachlan.evolve(circuit, p0, tuple(range(circuit.n_params)), state, h, cfg, solver, callback=callback)
    write_trace_csv(opts.trace, header, trace_rows(trace, columns))
    if trace.fatal:
        raise Diagnostic(trace.fatal)
    return EXIT_OK


def _recompile_job(opts, template_attr="template"):
    from .circuits import bind_params
    from .mclachlan import EvolutionConfig
    from .recompile import RecompileJob

    source_layout = _load_circuit(opts.source)
    if source_layout.n_params:
        source = bind_params(source_layout, _load_params(opts.source_params))
    else:
        source = source_layout
    template = _load_circuit(getattr(opts, template_attr))
    h_rec = _load_hamiltonian(opts.hrec)
    evolution = EvolutionConfig(
        mode="imaginary", step=float(opts.dtau), max_iterations=int(opts.max_iterations),
    )
    solver = _solver_from_spec(opts.solver, "imaginary")
    return RecompileJob.create(source, opts.in_spec, template, h_rec, evolution, solver)


_RECOMPILE_COLUMNS = ["bound", "fidelity", "stage", "fidelity_ansatz"]


def cmd_recompile(opts):
    from .circuits import serialize_params
    from .recompile import LureConfig, lure_recompile, recompile

    job = _recompile_job(opts)
    if opts.lure is not None:
        stages, _, threshold = opts.lure.partition(":")
        lure = LureConfig(n_stages=int(stages), threshold=float(threshold) if threshold else 0.1)
        result = lure_recompile(job, lure)
    else:
        result = recompile(job)
    header = ["iter", "energy"] + _RECOMPILE_COLUMNS + _param_header(job.template.n_params)
    write_trace_csv(opts.trace, header, trace_rows(result.trace, _RECOMPILE_COLUMNS))
    if opts.params_out:
        Path(opts.params_out).write_text(serialize_params(result.phi), encoding="utf-8")
    if not result.converged:
        raise Diagnostic("evolution did not meet the convergence rule within the iteration budget")
    if result.stalled_stages:
        raise Diagnostic(f"lure stages {result.stalled_stages} missed the threshold")
    return EXIT_OK


_ELIMINATE_COLUMNS = ["defect", "fidelity", "removed"]


def cmd_eliminate(opts):
    from .circuits import bind_params, serialize_circuit, serialize_params
    from .recompile import EliminationConfig, RecompileResult, eliminate_gates

    job = _recompile_job(opts, template_attr="recompiled")
    phi = _load_params(opts.params)
    if phi.shape != (job.template.n_params,):
        raise InputError(f"expected {job.template.n_params} parameters in {opts.params}, got {phi.shape[0]}")
    seed_result = RecompileResult(
        phi=phi, trace=None, circuit=bind_params(job.template, phi), job=job, converged=True,
    )
    cfg = EliminationConfig(defect_factor=float(opts.defect_factor), max_step=float(opts.max_dphi))
    result = eliminate_gates(seed_result, job, cfg)
    header = ["iter", "energy"] + _ELIMINATE_COLUMNS + _param_header(job.template.n_params)
    write_trace_csv(opts.trace, header, trace_rows(result.trace, _ELIMINATE_COLUMNS))
    if opts.circuit_out:
        Path(opts.circuit_out).write_text(
            serialize_circuit(bind_params(result.circuit, result.params)), encoding="utf-8"
        )
    if opts.params_out:
        Path(opts.params_out).write_text(serialize_params(result.params), encoding="utf-8")
    print(f"removed {len(result.removed)} of {job.template.n_params} parameters")
    if result.no_op:
        raise Diagnostic("defect already above the budget; nothing eliminated")
    return EXIT_OK


def cmd_trotter(opts):
    import numpy as np

    from .circuits import bind_params, serialize_circuit
    from .datafiles import load_spin_system
    from .dynamics import SpinSystem, TrotterSpec, build_trotter_circuit, trotter_fidelity

    if opts.hamiltonian is None:
        sys7 = load_spin_system()
        if opts.in_spec != sys7.input_spec:
            sys7 = SpinSystem(sys7.h_sys, opts.in_spec)
    else:
        sys7 = SpinSystem(_load_hamiltonian(opts.hamiltonian), opts.in_spec)
    spec = TrotterSpec(int(opts.cycles), float(opts.time), opts.ordering)
    circuit, values = build_trotter_circuit(sys7, spec)
    if opts.out:
        Path(opts.out).write_text(serialize_circuit(bind_params(circuit, values)), encoding="utf-8")
    print(f"fidelity {trotter_fidelity(sys7, spec):.17g}")
    if opts.sweep:
        if not opts.trace:
            raise InputError("--sweep needs --trace for the fidelity series")
        t0, t1, n = opts.sweep.split(":")
        rows = []
        for i, t in enumerate(np.linspace(float(t0), float(t1), int(n))):
            sub = TrotterSpec(spec.cycles, float(t), spec.ordering)
            rows.append([i, float(t), trotter_fidelity(sys7, sub)])
        write_trace_csv(opts.trace, ["iter", "t", "fidelity"], rows)
    return EXIT_OK


def cmd_exact(opts):
    import numpy as np

    from .circuits import apply_circuit
    from .dynamics import exact_evolve
    from .paulis import fidelity, init_basis_state

    h = _load_hamiltonian(opts.hamiltonian)
    state = init_basis_state(opts.in_spec)
    reference = exact_evolve(h, state, float(opts.time))
    circuit = _load_circuit(opts.fidelity_against)
    if circuit.n_params:
        raise InputError(f"{opts.fidelity_against} has unbound parameters; bake angles first")
    produced = apply_circuit(circuit, np.zeros(0), state)
    print(f"{fidelity(produced, reference):.17g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument plumbing.
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qrecompile",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="INI file with per-command [sections] of key = value defaults")
    parser.add_argument("--threads", type=int, help="cap internal (BLAS) parallelism")
    parser.add_argument("--seed", type=int, help="seed for randomised fixtures")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="variationally evolve a bound circuit's parameters")
    sim.add_argument("--hamiltonian", help="Hamiltonian file (default: bundled spin network)")
    sim.add_argument("--circuit", help="bound-circuit layout file", required=False)
    sim.add_argument("--in", dest="in_spec", help="input product state over 0/1/+/- (default 1++++++)")
    sim.add_argument("--mode", choices=["real", "imag"], help="evolution mode (default real)")
    sim.add_argument("--steps", help="number of iterations (default 700)")
    sim.add_argument("--dt", help="step size (default 2.5e-3 real, 1e-2 imag)")
    sim.add_argument("--solver", help="tsvd[:tol] | tikhonov[:l1,l2,l3] | lstsq (default per mode)")
    sim.add_argument("--params", help="optional warm-start parameter file (default all 1e-8)")
    sim.add_argument("--no-global-phase", action="store_true", help="drop the virtual global-phase parameter")
    sim.add_argument("--trace", help="output CSV: iter, energy, t[, fidelity], params...")

    rec = sub.add_parser("recompile", help="recompile a fixed source circuit into a template")
    for p in (rec,):
        p.add_argument("--source", help="source layout file (default: bundled 186-gate circuit)")
        p.add_argument("--source-params", dest="source_params", help="angles for the source layout")
        p.add_argument("--template", help="bound template file (default: bundled hexagon template)")
        p.add_argument("--in", dest="in_spec", help="input product state (default 1++++++)")
        p.add_argument("--hrec", help="recompilation Hamiltonian (default: bundled)")
        p.add_argument("--dtau", help="imaginary-time step (default 1e-2)")
        p.add_argument("--max-iterations", dest="max_iterations", help="iteration cap (default 5000)")
        p.add_argument("--solver", help="solver spec (default tsvd:1e-5)")
    rec.add_argument("--lure", help="N[:THRESH] staged schedule, e.g. 10:0.1")
    rec.add_argument("--trace", help="output CSV: iter, energy, bound, fidelity, stage, ..., params...")
    rec.add_argument("--params-out", dest="params_out", help="write the final template angles here")

    elim = sub.add_parser("eliminate", help="drive near-identity template gates to zero and remove them")
    elim.add_argument("--recompiled", help="template file that was recompiled (default: bundled hexagon)")
    elim.add_argument("--params", help="angles produced by the recompile", required=False)
    elim.add_argument("--source", help="source layout file (default: bundled)")
    elim.add_argument("--source-params", dest="source_params", help="source angles (default: bundled)")
    elim.add_argument("--in", dest="in_spec", help="input product state (default 1++++++)")
    elim.add_argument("--hrec", help="recompilation Hamiltonian (default: bundled)")
    elim.add_argument("--dtau", help="imaginary-time step (default 1e-2)")
    elim.add_argument("--max-iterations", dest="max_iterations", help="per-step solver cap (default 5000)")
    elim.add_argument("--solver", help="solver spec (default tsvd:1e-5)")
    elim.add_argument("--defect-factor", dest="defect_factor", help="allowed defect growth (default 2)")
    elim.add_argument("--max-dphi", dest="max_dphi", help="per-iteration drive limit in radians (default 0.1)")
    elim.add_argument("--circuit-out", dest="circuit_out", help="write the reduced circuit (angles baked)")
    elim.add_argument("--params-out", dest="params_out", help="write the surviving angles")
    elim.add_argument("--trace", help="output CSV: iter, energy, defect, fidelity, removed, params...")

    tro = sub.add_parser("trotter", help="build a Trotter circuit and report its fidelity")
    tro.add_argument("--cycles", help="number of cycles (default 6)")
    tro.add_argument("--time", help="simulated time (default 0.75)")
    tro.add_argument("--ordering", choices=["fixed", "alternating"], help="cycle ordering (default fixed)")
    tro.add_argument("--hamiltonian", help="Hamiltonian file (default: bundled spin network)")
    tro.add_argument("--in", dest="in_spec", help="input product state (default 1++++++)")
    tro.add_argument("--out", help="write the circuit with baked angles here")
    tro.add_argument("--sweep", help="T0:T1:N fidelity sweep over simulated times")
    tro.add_argument("--trace", help="CSV for the sweep: iter, t, fidelity")

    exa = sub.add_parser("exact", help="exact evolution; optionally fidelity against a baked circuit")
    exa.add_argument("--time", help="evolution time (default 1.75)")
    exa.add_argument("--hamiltonian", help="Hamiltonian file (default: bundled spin network)")
    exa.add_argument("--in", dest="in_spec", help="input product state (default 1++++++)")
    exa.add_argument("--fidelity-against", dest="fidelity_against", help="baked circuit file to compare")

    return parser


_DEFAULTS = {
    "simulate": {
        "hamiltonian": lambda: _bundled("hamiltonian_sys.txt"),
        "in_spec": "1++++++",
        "mode": "real",
        "steps": "700",
        "dt": None,
        "solver": None,
        "params": None,
        "trace": "trace.csv",
        "circuit": None,
        "no_global_phase": False,
    },
    "recompile": {
        "source": lambda: _bundled("circuit_a_layout.txt"),
        "source_params": lambda: _bundled("circuit_a_params.txt"),
        "template": lambda: _bundled("template_hex.txt"),
        "in_spec": "1++++++",
        "hrec": lambda: _bundled("hamiltonian_rec.txt"),
        "dtau": "1e-2",
        "max_iterations": "5000",
        "solver": None,
        "lure": None,
        "trace": "trace.csv",
        "params_out": None,
    },
    "eliminate": {
        "recompiled": lambda: _bundled("template_hex.txt"),
        "params": None,
        "source": lambda: _bundled("circuit_a_layout.txt"),
        "source_params": lambda: _bundled("circuit_a_params.txt"),
        "in_spec": "1++++++",
        "hrec": lambda: _bundled("hamiltonian_rec.txt"),
        "dtau": "1e-2",
        "max_iterations": "5000",
        "solver": None,
        "defect_factor": "2",
        "max_dphi": "0.1",
        "circuit_out": None,
        "params_out": None,
        "trace": "trace.csv",
    },
    "trotter": {
        "cycles": "6",
        "time": "0.75",
        "ordering": "fixed",
        "hamiltonian": None,
        "in_spec": "1++++++",
        "out": None,
        "sweep": None,
        "trace": None,
    },
    "exact": {
        "time": "1.75",
        "hamiltonian": lambda: _bundled("hamiltonian_sys.txt"),
        "in_spec": "1++++++",
        "fidelity_against": None,
    },
}

_REQUIRED = {
    "simulate": ("circuit", "trace"),
    "recompile": ("trace",),
    "eliminate": ("params", "trace"),
    "trotter": (),
    "exact": ("fidelity_against",),
}

_HANDLERS = {
    "simulate": cmd_simulate,
    "recompile": cmd_recompile,
    "eliminate": cmd_eliminate,
    "trotter": cmd_trotter,
    "exact": cmd_exact,
}


def _merge_config(opts):
    defaults = _DEFAULTS[opts.command]
    if opts.config:
        parser = configparser.ConfigParser()
        read = parser.read(opts.config)
        if not read:
            raise InputError(f"cannot read config file {opts.config}")
        if parser.has_section(opts.command):
            for key, value in parser.items(opts.command):
                dest = key.replace("-", "_").replace(" ", "")
                if dest not in defaults:
                    raise InputError(f"unknown config key {key!r} in [{opts.command}]")
                if getattr(opts, dest, None) in (None, False):
                    if isinstance(defaults.get(dest), bool):
                        value = parser.getboolean(opts.command, key)
                    setattr(opts, dest, value)
    for dest, default in defaults.items():
        if getattr(opts, dest, None) in (None,):
            value = default() if callable(default) else default
            setattr(opts, dest, value)
    for dest in _REQUIRED[opts.command]:
        if getattr(opts, dest) is None:
            flag = "--" + dest.replace("_", "-")
            raise InputError(f"{opts.command} requires {flag}")
    return opts


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _apply_thread_cap(argv)
        opts = _build_parser().parse_args(argv)
        opts = _merge_config(opts)
        if opts.seed is not None:
            import numpy as np

            np.random.seed(opts.seed)
        return _HANDLERS[opts.command](opts) or EXIT_OK
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Diagnostic as exc:
        print(f"diagnostic: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTIC
    except (ValueError, IndexError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
