"""Command line front door.

Every file-writing command also writes ``<out>.manifest.json`` recording the
command, the fully resolved configuration (including a seed drawn on the
user's behalf when none was given), the package version, the output paths,
and the wall-clock duration.  All file writes go through a temp file and an
atomic rename, so a crashed run never leaves a partial artifact.

Exit codes: 0 on success, 1 for usage errors, 2 for numeric failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .circuit_dynamics import (
    classify_convergence,
    evolve_exact,
    evolve_noisy,
    evolve_sampled,
    initial_function_distribution,
    magnetization_trajectory,
    write_distribution_trajectory_csv,
    write_magnetization_csv,
)
from .core import InputScheme, parse_gate
from .function_space import (
    MonteCarlo,
    dnn_function_distribution,
    entropy,
    entropy_curve,
    write_distribution_json,
    write_entropy_curve_csv,
)
from .gaussian import (
    AntiDiagonalMatrix,
    NotPositiveSemidefinite,
    anti_diag_identities,
    bivariate_orthant,
    gauss_hermite_expectation_2d,
    relu_activation,
    sign_activation,
)
from .meanfield import (
    Activation,
    FixedPointNotFound,
    KernelSpec,
    find_fixed_point,
    fixed_point_scan,
    kernel_map,
    write_fixed_point_scan_csv,
)
from .simulator import (
    AllNodes,
    Architecture,
    CircuitMachine,
    DnnMachine,
    EnsembleConfig,
    OneNode,
    compare_architectures,
    estimate_function_distribution,
    measure_overlaps,
    write_comparison_json,
    write_overlap_measurement_csv,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _scheme_arg(text: str) -> InputScheme:
    t = text.strip().lower()
    try:
        if t == "raw":
            return InputScheme.raw()
        if t == "balanced":
            return InputScheme.balanced()
        if t == "biased":
            return InputScheme.biased()
        if t.startswith("biased:"):
            return InputScheme.biased(float(t.split(":", 1)[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    raise argparse.ArgumentTypeError(
        f"unknown scheme {text!r} (raw | biased[:c] | balanced)"
    )


def _gate_arg(text: str):
    try:
        return parse_gate(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _activation_arg(text: str) -> Activation:
    try:
        return Activation(text.strip().lower())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"unknown activation {text!r}") from exc


def _int_list_arg(text: str) -> list[int]:
    """Either a comma list "1,2,5" or an inclusive range "1:10"."""
    t = text.strip()
    try:
        if ":" in t:
            lo, hi = (int(p) for p in t.split(":"))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(p) for p in t.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"malformed depth list {text!r} (use lo:hi or a,b,c)"
        ) from exc


def _linspace_arg(text: str) -> np.ndarray:
    try:
        lo, hi, count = text.strip().split(":")
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"malformed scan {text!r} (use start:stop:count)"
        ) from exc


def _resolve_seed(seed) -> tuple[int, bool]:
    if seed is not None:
        return int(seed), False
    return int.from_bytes(os.urandom(8), "big") % (2 ** 62), True


def _atomic_json(path, payload) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _write_manifest(out, command, config, outputs, started) -> str:
    path = f"{out}.manifest.json"
    _atomic_json(
        path,
        {
            "command": command,
            "config": config,
            "version": __version__,
            "outputs": [str(p) for p in outputs],
            "duration_s": round(time.monotonic() - started, 3),
        },
    )
    return path


def _kernel_spec(activation: Activation, sigma_w: float, sigma_b: float) -> KernelSpec:
    if activation is Activation.RELU:
        return KernelSpec.relu(sigma_b=sigma_b)
    return KernelSpec.sign(sigma_w=sigma_w, sigma_b=sigma_b)


# ---------------------------------------------------------------- kernel-scan


def _cmd_kernel_scan(args) -> int:
    started = time.monotonic()
    config = {
        "activation": args.activation.value,
        "sigma_w": args.sigma_w,
        "sigma_b": args.sigma_b,
    }
    if args.sigma_b_scan is not None:
        rows = fixed_point_scan(args.activation, args.sigma_b_scan, sigma_w=args.sigma_w)
        write_fixed_point_scan_csv(args.out, rows)
        config["sigma_b_scan"] = [float(v) for v in args.sigma_b_scan]
    else:
        spec = _kernel_spec(args.activation, args.sigma_w, args.sigma_b)
        qs = np.linspace(-1.0, 1.0, args.grid)
        mapped = kernel_map(spec, qs)
        tmp = f"{args.out}.tmp{os.getpid()}"
        with open(tmp, "w") as fh:
            fh.write("q,q_next\n")
            for q, qn in zip(qs, mapped):
                fh.write(f"{float(q)!r},{float(qn)!r}\n")
        os.replace(tmp, args.out)
        config["grid"] = args.grid
        if args.fixed_point:
            fp = find_fixed_point(spec)
            config["fixed_point"] = {
                "q_star": fp.value,
                "stable": fp.stable,
                "derivative": fp.derivative,
                "residual": fp.residual,
            }
            print(
                f"fixed point q* = {fp.value:.12f} "
                f"({'stable' if fp.stable else 'unstable'}, g' = {fp.derivative:.6f})"
            )
    manifest = _write_manifest(args.out, "kernel-scan", config, [args.out], started)
    print(f"wrote {args.out} ({manifest})")
    return 0


# -------------------------------------------------------------- entropy-curve


def _entropy_rows_dnn(args, seed: int):
    spec = _kernel_spec(args.activation, args.sigma_w, args.sigma_b)
    return entropy_curve(
        spec,
        args.scheme,
        args.arity,
        args.depths,
        args.samples,
        seed,
        miller_madow=args.miller_madow,
    )


def _entropy_rows_sigma_b_scan(args, seed: int):
    """Entropy of the depth-limit function distribution per bias scale.

    Each sigma_b gets its fixed point overlap; the readout covariance there
    has all off-diagonal entries equal, and the entropy is sampled from it.
    """
    bound = (1 << args.arity) * math.log(2.0)
    m = 1 << args.arity
    rows = []
    for sb in args.sigma_b_scan:
        spec = _kernel_spec(args.activation, args.sigma_w, float(sb))
        fp = find_fixed_point(spec)
        total = spec.total_variance
        off = spec.sigma_w ** 2 * fp.value + spec.sigma_b ** 2
        cov = np.full((m, m), off)
        np.fill_diagonal(cov, total)
        dist = dnn_function_distribution(cov, MonteCarlo(args.samples, seed))
        h = entropy(dist, miller_madow=args.miller_madow)
        rows.append((float(sb), h, h / bound, args.samples, seed))
    return rows


def _entropy_rows_circuit(args):
    dist = initial_function_distribution(args.scheme, args.arity)
    layers = max(args.depths)
    if args.epsilon > 0:
        dists = evolve_noisy(
            dist, args.gate, layers, args.epsilon, negation_p=args.negation_p
        )
    else:
        dists = evolve_exact(dist, args.gate, layers, negation_p=args.negation_p)
    bound = (1 << args.arity) * math.log(2.0)
    rows = []
    for depth in args.depths:
        h = entropy(dists[depth])
        rows.append((int(depth), h, h / bound, 0, 0))
    return rows


def _cmd_entropy_curve(args) -> int:
    started = time.monotonic()
    seed, drawn = _resolve_seed(args.seed)
    config = {"machine": args.machine, "arity": args.arity, "seed": seed, "seed_drawn": drawn}
    if args.machine == "circuit":
        if args.gate is None:
            raise ValueError("circuit entropy curves need --gate")
        rows = _entropy_rows_circuit(args)
        x_column = "L"
        config.update(
            gate=args.gate.name or f"table:{args.gate.table:x}",
            scheme=args.scheme.name,
            epsilon=args.epsilon,
            negation_p=args.negation_p,
        )
    elif args.sigma_b_scan is not None:
        rows = _entropy_rows_sigma_b_scan(args, seed)
        x_column = "sigma_b"
        config.update(
            activation=args.activation.value,
            scheme=args.scheme.name,
            samples=args.samples,
            sigma_b_scan=[float(v) for v in args.sigma_b_scan],
        )
    else:
        rows = _entropy_rows_dnn(args, seed)
        x_column = "L"
        config.update(
            activation=args.activation.value,
            sigma_w=args.sigma_w,
            sigma_b=args.sigma_b,
            scheme=args.scheme.name,
            samples=args.samples,
            depths=list(args.depths),
        )
    write_entropy_curve_csv(args.out, rows, x_column=x_column)
    unit = "bits" if args.bits else "nats"
    scale = 1 / math.log(2.0) if args.bits else 1.0
    last = rows[-1]
    print(f"{x_column}={last[0]}: H = {last[1] * scale:.4f} {unit} "
          f"(normalized {last[2]:.4f})")
    manifest = _write_manifest(args.out, "entropy-curve", config, [args.out], started)
    print(f"wrote {args.out} ({manifest})")
    return 0


# -------------------------------------------------------------- circuit-evolve


def _cmd_circuit_evolve(args) -> int:
    started = time.monotonic()
    seed, drawn = _resolve_seed(args.seed)
    dist = initial_function_distribution(args.scheme, args.arity)
    if args.engine == "sampled":
        dists = evolve_sampled(
            dist,
            args.gate,
            args.layers,
            pool_size=args.pool_size,
            seed=seed,
            epsilon=args.epsilon,
            negation_p=args.negation_p,
        )
    elif args.epsilon > 0 or args.prune > 0:
        dists = evolve_noisy(
            dist,
            args.gate,
            args.layers,
            args.epsilon,
            negation_p=args.negation_p,
            prune=args.prune,
        )
    else:
        dists = evolve_exact(dist, args.gate, args.layers, negation_p=args.negation_p)
    write_distribution_trajectory_csv(args.out, dists)
    final = dists[-1]
    top_bits, top_p = final.items_by_mass()[0]
    print(
        f"layer {args.layers}: support {len(final.support())}, "
        f"top {top_bits:#x} at {top_p:.6f}"
    )
    config = {
        "gate": args.gate.name or f"table:{args.gate.table:x}",
        "scheme": args.scheme.name,
        "arity": args.arity,
        "layers": args.layers,
        "epsilon": args.epsilon,
        "negation_p": args.negation_p,
        "prune": args.prune,
        "engine": args.engine,
        "seed": seed,
        "seed_drawn": drawn,
    }
    manifest = _write_manifest(args.out, "circuit-evolve", config, [args.out], started)
    print(f"wrote {args.out} ({manifest})")
    return 0


# -------------------------------------------------------------- magnetization


def _cmd_magnetization(args) -> int:
    started = time.monotonic()
    traj = magnetization_trajectory(args.gate, args.scheme, args.arity, args.layers)
    write_magnetization_csv(args.out, traj)
    report = classify_convergence(args.gate, args.scheme, args.arity)
    limit = report.limit.to_text() if report.limit is not None else None
    print(f"classification: {report.kind.value}" + (f" -> {limit}" if limit else ""))
    config = {
        "gate": args.gate.name or f"table:{args.gate.table:x}",
        "scheme": args.scheme.name,
        "arity": args.arity,
        "layers": args.layers,
        "classification": report.kind.value,
        "limit": limit,
    }
    manifest = _write_manifest(args.out, "magnetization", config, [args.out], started)
    print(f"wrote {args.out} ({manifest})")
    return 0


# ------------------------------------------------------------------- simulate


def _load_sim_config(args) -> dict:
    merged: dict = {}
    if args.config is not None:
        with open(args.config) as fh:
            merged.update(json.load(fh))
    overrides = {
        "width": args.width,
        "depth": args.depth,
        "arity": args.arity,
        "architecture": args.architecture,
        "realizations": args.realizations,
    }
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    if args.scheme is not None:
        merged["scheme"] = args.scheme
    if args.seed is not None:
        merged["seed"] = args.seed
    machine = dict(merged.get("machine", {}))
    if args.gate is not None:
        machine = {"kind": "circuit", "gate": args.gate}
    if args.activation is not None:
        machine = {"kind": "dnn", "activation": args.activation.value}
    for key, value in (
        ("sigma_w", args.sigma_w),
        ("sigma_b", args.sigma_b),
        ("epsilon", args.epsilon),
        ("negation_p", args.negation_p),
    ):
        if value is not None:
            machine[key] = value
    merged["machine"] = machine
    return merged


def _build_machine(raw: dict):
    kind = raw.get("kind", "dnn")
    if kind == "dnn":
        return DnnMachine(
            activation=Activation(raw.get("activation", "sign")),
            sigma_w=float(raw.get("sigma_w", 1.0)),
            sigma_b=float(raw.get("sigma_b", 0.0)),
        )
    if kind == "circuit":
        gate = raw.get("gate")
        if gate is None:
            raise ValueError("circuit machine needs a gate")
        if isinstance(gate, str):
            gate = parse_gate(gate)
        return CircuitMachine(
            gate=gate,
            epsilon=float(raw.get("epsilon", 0.0)),
            negation_p=float(raw.get("negation_p", 0.0)),
        )
    raise ValueError(f"unknown machine kind {kind!r}")


def _build_ensemble(merged: dict, seed: int) -> EnsembleConfig:
    scheme = merged.get("scheme", "raw")
    if isinstance(scheme, str):
        scheme = _scheme_arg(scheme)
    return EnsembleConfig(
        machine=_build_machine(merged.get("machine", {})),
        width=int(merged["width"]),
        depth=int(merged["depth"]),
        arity=int(merged["arity"]),
        scheme=scheme,
        architecture=Architecture(merged.get("architecture", "layer_dependent")),
        seed=seed,
    )


def _jsonable_sim_config(merged: dict) -> dict:
    out = dict(merged)
    if "machine" in out:
        machine = dict(out["machine"])
        gate = machine.get("gate")
        if gate is not None and not isinstance(gate, str):
            machine["gate"] = gate.name or f"table:{gate.table:x}"
        out["machine"] = machine
    scheme = out.get("scheme")
    if isinstance(scheme, InputScheme):
        out["scheme"] = scheme.name
    return out


def _cmd_simulate(args) -> int:
    started = time.monotonic()
    merged = _load_sim_config(args)
    missing = [k for k in ("width", "depth", "arity") if k not in merged]
    if missing:
        raise ValueError(f"simulate config is missing {', '.join(missing)}")
    seed, drawn = _resolve_seed(merged.get("seed"))
    merged["seed"] = seed
    merged["seed_drawn"] = drawn
    realizations = int(merged.get("realizations", 1000))
    if args.mode == "estimate":
        cfg = _build_ensemble(merged, seed)
        policy = AllNodes() if args.policy == "all-nodes" else OneNode()
        dist = estimate_function_distribution(
            cfg, realizations, policy, engine=args.engine, threads=args.threads
        )
        write_distribution_json(args.out, dist)
        print(
            f"estimate: {dist.samples} samples, support {len(dist.support())}, "
            f"H = {entropy(dist):.4f} nats"
        )
    elif args.mode == "overlaps":
        cfg = _build_ensemble(merged, seed)
        meas = measure_overlaps(cfg, realizations, threads=args.threads)
        write_overlap_measurement_csv(args.out, meas)
        print(f"overlaps: {realizations} realizations, depth {cfg.depth}")
    elif args.mode == "compare":
        cfg = _build_ensemble(merged, seed)  # validates the shared-width rule
        comp = compare_architectures(
            cfg.machine,
            cfg.width,
            cfg.depth,
            cfg.arity,
            cfg.scheme,
            seed,
            realizations,
            threads=args.threads,
        )
        write_comparison_json(args.out, comp)
        verdict = "within" if comp.within_null else "OUTSIDE"
        print(
            f"compare: TV = {comp.tv_observed:.5f}, null 95% "
            f"[{comp.tv_null_interval[0]:.5f}, {comp.tv_null_interval[1]:.5f}] "
            f"({verdict} null band)"
        )
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown simulate mode {args.mode!r}")
    manifest = _write_manifest(
        args.out, f"simulate {args.mode}", _jsonable_sim_config(merged), [args.out], started
    )
    print(f"wrote {args.out} ({manifest})")
    return 0


# ------------------------------------------------------------------ selfcheck


def _selfcheck_anti_diag(report) -> bool:
    ok = True
    for size in (2, 4, 8, 16):
        for coupling in (0.0, 0.3, -0.9):
            mat = AntiDiagonalMatrix(size, coupling)
            res = anti_diag_identities(mat)
            dense = mat.dense()
            ok &= abs(res.determinant - np.linalg.det(dense)) < 1e-10
            ok &= np.allclose(res.inverse @ dense, np.eye(size), atol=1e-10)
            ok &= np.allclose(res.eigenvalues, np.sort(np.linalg.eigvalsh(dense)), atol=1e-10)
    singular = AntiDiagonalMatrix(4, 1.0)
    try:
        anti_diag_identities(singular)
        ok = False
    except np.linalg.LinAlgError:
        pass
    det = anti_diag_identities(singular, want_inverse=False).determinant
    ok &= det == 0.0
    ref = anti_diag_identities(AntiDiagonalMatrix(4, 0.3), want_inverse=False)
    report(f"anti-diagonal identities (det A_4(0.3) = {ref.determinant:.4f})", ok)
    return ok


def _selfcheck_kernels(report) -> bool:
    ok = True
    for label, spec in (
        ("sign", KernelSpec.sign()),
        ("sign b=1", KernelSpec.sign(sigma_b=1.0)),
        ("relu", KernelSpec.relu()),
        ("relu b=1", KernelSpec.relu(sigma_b=1.0)),
    ):
        sw2, sb2 = spec.sigma_w ** 2, spec.sigma_b ** 2
        total = spec.total_variance
        fn = sign_activation if spec.activation is Activation.SIGN else relu_activation
        norm = 1.0 if spec.activation is Activation.SIGN else total / 2
        for q in (-0.75, -0.2, 0.0, 0.5, 0.9):
            rho = (sw2 * q + sb2) / total
            cov = np.array([[total, total * rho], [total * rho, total]])
            want = gauss_hermite_expectation_2d(fn, cov) / norm
            got = kernel_map(spec, q)
            ok &= abs(want - got) < 1e-8
        report(f"kernel vs quadrature ({label})", ok)
    return ok


def _selfcheck_orthants(report) -> bool:
    ok = True
    for rho in (-0.9, -0.5, 0.0, 0.3, 0.99):
        ok &= abs(bivariate_orthant(rho) + bivariate_orthant(-rho) - 0.5) < 1e-14
    ok &= abs(bivariate_orthant(0.0) - 0.25) < 1e-15
    ok &= abs(bivariate_orthant(0.5) - 1 / 3) < 1e-14
    report("orthant symmetry and spot values", ok)
    return ok


def _cmd_selfcheck(args) -> int:
    all_ok = True

    def report(name: str, ok: bool):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")

    for check in (_selfcheck_anti_diag, _selfcheck_kernels, _selfcheck_orthants):
        all_ok &= check(report)
    print("selfcheck " + ("passed" if all_ok else "FAILED"))
    return 0 if all_ok else 2


# ---------------------------------------------------------------------- main


def _add_common_machine_args(p: argparse.ArgumentParser):
    p.add_argument("--activation", type=_activation_arg, default=Activation.SIGN)
    p.add_argument("--sigma-w", type=float, default=1.0)
    p.add_argument("--sigma-b", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boolspace", description=__doc__)
    parser.add_argument("--version", action="version", version=f"boolspace {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("kernel-scan", help="overlap map, fixed points, bias scans")
    _add_common_machine_args(p)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--fixed-point", action="store_true")
    p.add_argument("--sigma-b-scan", type=_linspace_arg, default=None,
                   help="start:stop:count; writes a fixed-point scan instead")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_kernel_scan)

    p = sub.add_parser("entropy-curve", help="function-distribution entropy vs depth")
    p.add_argument("--machine", choices=("dnn", "circuit"), default="dnn")
    _add_common_machine_args(p)
    p.add_argument("--scheme", type=_scheme_arg, default=InputScheme.raw())
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--depths", type=_int_list_arg, default=list(range(1, 11)))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--miller-madow", action="store_true")
    p.add_argument("--bits", action="store_true", help="print in bits (files stay in nats)")
    p.add_argument("--sigma-b-scan", type=_linspace_arg, default=None)
    p.add_argument("--gate", type=_gate_arg, default=None)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--negation-p", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_entropy_curve)

    p = sub.add_parser("circuit-evolve", help="exact or sampled gate-layer dynamics")
    p.add_argument("--gate", type=_gate_arg, required=True)
    p.add_argument("--scheme", type=_scheme_arg, default=InputScheme.balanced())
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--layers", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--negation-p", type=float, default=0.0)
    p.add_argument("--prune", type=float, default=0.0)
    p.add_argument("--engine", choices=("exact", "sampled"), default="exact")
    p.add_argument("--pool-size", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_circuit_evolve)

    p = sub.add_parser("magnetization", help="per-pattern mean-spin flow and its fate")
    p.add_argument("--gate", type=_gate_arg, required=True)
    p.add_argument("--scheme", type=_scheme_arg, default=InputScheme.balanced())
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--layers", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_magnetization)

    p = sub.add_parser("simulate", help="finite-width ensemble runs")
    p.add_argument("mode", choices=("estimate", "overlaps", "compare"))
    p.add_argument("--config", default=None, help="JSON file with the run configuration")
    p.add_argument("--activation", type=_activation_arg, default=None)
    p.add_argument("--sigma-w", type=float, default=None)
    p.add_argument("--sigma-b", type=float, default=None)
    p.add_argument("--gate", type=_gate_arg, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--negation-p", type=float, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--arity", type=int, default=None)
    p.add_argument("--scheme", type=_scheme_arg, default=None)
    p.add_argument("--architecture", choices=("layer_dependent", "recurrent"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--realizations", type=int, default=None)
    p.add_argument("--policy", choices=("one-node", "all-nodes"), default="one-node")
    p.add_argument("--engine", choices=("fast", "explicit"), default="fast")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads; results do not depend on the count")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("selfcheck", help="internal identity checks, exit 2 on failure")
    p.set_defaults(func=_cmd_selfcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.error("a command is required")
    try:
        return args.func(args)
    except (
        ValueError,
        FixedPointNotFound,
        NotPositiveSemidefinite,
        np.linalg.LinAlgError,
        OverflowError,
        FloatingPointError,
    ) as exc:
        print(f"boolspace: numeric error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
