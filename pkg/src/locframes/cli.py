"""Command-line driver: build, diagnose, assemble, certify, solve.

Every subcommand reads an optional JSON config (flags override config
fields), writes deterministic JSON/CSV artifacts into --out-dir, and
exits 0 on success, 2 on input/contract errors, 3 on divergence.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .algebras import MatrixAlgebraSpec, admissible_weight_check
from .errors import DivergedError, LocframesError
from .frames import (
    canonical_dual,
    frame_bounds,
    gaussian_window,
    make_gabor_frame,
    make_onb,
    make_perturbed_onb,
    make_translates_frame,
)
from .galerkin import (
    LinearOperator,
    certificate_probe_norm,
    compose_rule_check,
    galerkin_matrix,
    kappa_factorization_probe,
    roundtrip_check,
    schur_certificate,
)
from .indexing import IndexSet
from .localization import (
    NotLocalizedError,
    dual_localization_check,
    equivalence_constants,
    localization_report,
)
from .solver import (
    ProjectionSchedule,
    finite_section_solve,
    frame_galerkin_solve,
    make_test_operator,
)
from .weights import SeqSpaceSpec, Weight


def _parse_p(token):
    token = token.strip().lower()
    if token in ("inf", "infinity"):
        return math.inf
    return float(token)


def _p_list(text):
    return [_parse_p(t) for t in text.split(",") if t.strip()]


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def build_frame(cfg, seed):
    kind = cfg["kind"]
    if kind == "onb":
        return make_onb(int(cfg["n"]))
    if kind == "gabor":
        n = int(cfg["n"])
        width = cfg.get("width")
        window = gaussian_window(n, width=float(width) if width else None)
        return make_gabor_frame(n, int(cfg["a"]), int(cfg["b"]), window)
    if kind == "translates":
        n = int(cfg["n"])
        iset = IndexSet.ring(n)
        gen = np.zeros(n)
        gen[0] = 1.0
        gen += float(cfg.get("tail", 0.25)) * (
            1.0 + iset.distance_to_origin()
        ) ** -float(cfg.get("tail_exponent", 3.0))
        return make_translates_frame(n, int(cfg.get("step", 1)), gen)
    if kind == "perturbed-onb":
        return make_perturbed_onb(
            int(cfg["n"]), float(cfg.get("decay_s", 3.0)), int(seed)
        )
    raise LocframesError(f"unknown frame kind {kind!r}")


def build_operator(cfg, n):
    kind = cfg.get("op_kind", "identity")
    if kind == "identity":
        return LinearOperator.identity(n)
    if kind == "diagonal":
        return make_test_operator("diagonal", n, spectrum=cfg["spectrum"])
    params = {}
    if cfg.get("theta") is not None:
        params["theta"] = float(cfg["theta"])
    if cfg.get("exponent") is not None:
        params["exponent"] = float(cfg["exponent"])
    return make_test_operator(kind, n, **params)


def make_rhs(cfg, n, seed):
    kind = cfg.get("rhs", "random")
    if kind == "random":
        rng = np.random.default_rng(seed)
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if kind == "bump":
        x = np.arange(n)
        return np.exp(-np.pi * (x - n // 2) ** 2 / (0.02 * n * n)).astype(complex)
    raise LocframesError(f"unknown rhs kind {kind!r}")


# -- subcommands ---------------------------------------------------------------


def cmd_frame_build(cfg, out, seed, threads):
    frame = build_frame(cfg, seed)
    bounds = frame_bounds(frame)
    io.save_frame(out / "frame", frame)
    io.save_json(
        {
            "n": frame.ambient_dim,
            "K": frame.size,
            "A": bounds.lower,
            "B": bounds.upper,
            "tight": bounds.tight,
            "redundancy": frame.redundancy,
            "name": frame.name,
        },
        out / "frame_summary.json",
    )
    return 0


def cmd_frame_diag(cfg, out, seed, threads):
    frame = io.load_frame(Path(cfg["frame"]))
    alg = MatrixAlgebraSpec(
        cfg.get("algebra", "jaffard"),
        float(cfg.get("s", 3.0)),
        float(cfg.get("threshold", 1e3)),
    )
    primal = localization_report(frame, frame, alg)
    diag = {"primal": primal.to_dict(), "member": primal.member}
    if primal.member:
        res = dual_localization_check(frame, alg)
        diag.update(
            dual=res.dual.to_dict(),
            cross=res.cross.to_dict(),
            exponent_drop_flagged=res.exponent_drop_flagged,
        )
    io.save_json(diag, out / "localization.json")
    io.shells_to_csv(out / "shells.csv", primal.fit)

    grid = []
    inf_weight = math.inf
    for p in _p_list(cfg.get("p_grid", "1,2,inf")):
        for t in _float_list(cfg.get("weight_powers", "0,1")):
            weight = Weight.polynomial(t, frame.index_set)
            inf_weight = min(inf_weight, float(weight.values.min()))
            spec = SeqSpaceSpec(p, weight)
            lo, up = equivalence_constants(frame, spec)
            adm = admissible_weight_check(alg, weight, frame.index_set)
            grid.append(
                {
                    "p": "inf" if p == math.inf else p,
                    "weight_power": t,
                    "lower": lo,
                    "upper": up,
                    "weight_admissible": adm["admissible"],
                }
            )
    # triple structure diagnostic: a weight bounded away from zero nests
    # the p = 1 coorbit space inside the ambient space inside its dual
    gelfand = {
        "inf_weight": inf_weight,
        "weight_bounded_below": bool(inf_weight > 0),
        "chain": "coorbit(1,w) in ambient in coorbit(inf,1/w)",
    }
    io.save_json({"grid": grid, "gelfand": gelfand}, out / "equivalence.json")
    return 0


def _load_frame_pair(cfg):
    frame = io.load_frame(Path(cfg["frame"]))
    right = cfg.get("right", "dual")
    if right == "self":
        return frame, frame
    if right == "dual":
        return frame, canonical_dual(frame)
    return frame, io.load_frame(Path(right))


def cmd_galerkin_assemble(cfg, out, seed, threads):
    frame, right = _load_frame_pair(cfg)
    op = build_operator(cfg, frame.ambient_dim)
    w = Weight.ones(frame.size)
    wr = Weight.ones(right.size)
    gm = galerkin_matrix(
        op, frame, right,
        domain_space=SeqSpaceSpec(2, wr), codomain_space=SeqSpaceSpec(2, w),
    )
    io.save_galerkin_matrix(out / "galerkin", gm, extra={"operator": op.name})
    report = {
        "roundtrip_residual": roundtrip_check(op, frame, right),
        "composition_residual": compose_rule_check(op, op, frame, right, frame),
        "reproduction_residual": gm.reproduction_residual(),
    }
    if op.name == "identity" and cfg.get("right", "dual") == "dual":
        # the assembled matrix is the Gram projection
        report["idempotency_residual"] = float(
            np.linalg.norm(gm.entries @ gm.entries - gm.entries, 2)
        )
    try:
        report["kappa"] = kappa_factorization_probe(op, frame, right)
    except LocframesError as err:
        report["kappa"] = err.payload()
    io.save_json(report, out / "galerkin_report.json")
    return 0


def cmd_galerkin_certify(cfg, out, seed, threads):
    entries, sidecar = io.load_array(Path(cfg["matrix"]))
    case = cfg.get("case", "inf_inf")
    k_out, k_in = entries.shape
    w1 = Weight((1.0 + np.arange(k_in)) ** float(cfg.get("w1_power", 0.0)))
    w2 = Weight((1.0 + np.arange(k_out)) ** float(cfg.get("w2_power", 0.0)))
    cert = schur_certificate(entries, case, p=float(cfg.get("p", 2.0)),
                             weights=(w1, w2))
    measured = certificate_probe_norm(entries, cert, probes=200, seed=seed)
    payload = cert.to_dict()
    payload["measured_probe_norm"] = measured
    payload["sound"] = bool(measured <= cert.certified_bound * (1 + 1e-8))
    io.save_json(payload, out / f"certificate_{case}.json")
    return 0


def cmd_galerkin_probe(cfg, out, seed, threads):
    frame, right = _load_frame_pair(cfg)
    op = build_operator(cfg, frame.ambient_dim)
    probe = {
        "roundtrip_residual": roundtrip_check(op, frame, right),
        "kappa": kappa_factorization_probe(op, frame, right),
    }
    io.save_json(probe, out / "galerkin_probe.json")
    return 0


def cmd_solve_fs(cfg, out, seed, threads):
    n = int(cfg.get("n", 128))
    op = build_operator(cfg, n)
    y = make_rhs(cfg, n, seed)
    frame = make_onb(n)
    selection = cfg.get("schedule", "centered")
    if selection == "greedy":
        selection = "energy_greedy"
    n_levels = cfg.get("levels")
    sched = ProjectionSchedule(
        frame, selection=selection, pilot=y,
        start=int(cfg.get("start_level", 8)),
        n_levels=int(n_levels) if n_levels else None,
    )
    report, x = finite_section_solve(
        op, y, sched, method=cfg.get("method", "direct"),
        tol=float(cfg.get("tol", 1e-8)), threads=threads,
    )
    io.save_json(report.to_dict(), out / "solve_fs.json")
    io.report_levels_csv(out / "solve_fs_levels.csv", report)
    if x is not None:
        io.save_array(out / "solution_fs", x, {"container": "vector", "n": n})
    if not report.converged:
        raise DivergedError("finite-section schedule did not converge")
    return 0


def cmd_solve_fg(cfg, out, seed, threads):
    frame = io.load_frame(Path(cfg["frame"]))
    op = build_operator(cfg, frame.ambient_dim)
    g = make_rhs(cfg, frame.ambient_dim, seed)
    f, report = frame_galerkin_solve(
        op, g, frame, method=cfg.get("method", "cg"),
        tol=float(cfg.get("tol", 1e-8)),
    )
    io.save_json(report.to_dict(), out / "solve_fg.json")
    io.report_levels_csv(out / "solve_fg_levels.csv", report)
    io.save_array(out / "solution_fg", f,
                  {"container": "vector", "n": frame.ambient_dim})
    if not report.converged:
        raise DivergedError("frame-Galerkin solve did not converge")
    return 0


COMMANDS = {
    ("frame", "build"): cmd_frame_build,
    ("frame", "diag"): cmd_frame_diag,
    ("galerkin", "assemble"): cmd_galerkin_assemble,
    ("galerkin", "certify"): cmd_galerkin_certify,
    ("galerkin", "probe"): cmd_galerkin_probe,
    ("solve", "fs"): cmd_solve_fs,
    ("solve", "fg"): cmd_solve_fg,
}


def _add_common(parser):
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)


def make_parser():
    parser = argparse.ArgumentParser(
        prog="locframes",
        description="frame diagnostics and frame-Galerkin operator solves",
    )
    sub = parser.add_subparsers(dest="group", required=True)

    frame = sub.add_parser("frame").add_subparsers(dest="sub", required=True)
    build = frame.add_parser("build")
    _add_common(build)
    build.add_argument("--kind", choices=["onb", "gabor", "translates", "perturbed-onb"])
    build.add_argument("--n", type=int)
    build.add_argument("--a", type=int)
    build.add_argument("--b", type=int)
    build.add_argument("--width", type=float)
    build.add_argument("--step", type=int)
    build.add_argument("--decay-s", dest="decay_s", type=float)
    diag = frame.add_parser("diag")
    _add_common(diag)
    diag.add_argument("--frame")
    diag.add_argument("--algebra", choices=["jaffard", "schur_weighted"])
    diag.add_argument("--s", type=float)
    diag.add_argument("--threshold", type=float)
    diag.add_argument("--p-grid", dest="p_grid")
    diag.add_argument("--weight-powers", dest="weight_powers")

    gal = sub.add_parser("galerkin").add_subparsers(dest="sub", required=True)
    for name in ("assemble", "probe"):
        p = gal.add_parser(name)
        _add_common(p)
        p.add_argument("--frame")
        p.add_argument("--right", help="self | dual | path to a frame container")
        p.add_argument("--op-kind", dest="op_kind")
        p.add_argument("--theta", type=float)
        p.add_argument("--exponent", type=float)
        p.add_argument("--spectrum", type=_float_list)
    cert = gal.add_parser("certify")
    _add_common(cert)
    cert.add_argument("--matrix")
    cert.add_argument("--case", choices=["inf_inf", "inf_zero", "one_inf",
                                         "one_p", "inf_one", "two_two"])
    cert.add_argument("--p", type=float)
    cert.add_argument("--w1-power", dest="w1_power", type=float)
    cert.add_argument("--w2-power", dest="w2_power", type=float)

    solve = sub.add_parser("solve").add_subparsers(dest="sub", required=True)
    for name in ("fs", "fg"):
        p = solve.add_parser(name)
        _add_common(p)
        p.add_argument("--frame")
        p.add_argument("--n", type=int)
        p.add_argument("--op-kind", dest="op_kind")
        p.add_argument("--theta", type=float)
        p.add_argument("--exponent", type=float)
        p.add_argument("--spectrum", type=_float_list)
        p.add_argument("--method", choices=["cg", "richardson", "direct"])
        p.add_argument("--tol", type=float)
        p.add_argument("--schedule", choices=["centered", "greedy"])
        p.add_argument("--levels", type=int)
        p.add_argument("--rhs", choices=["random", "bump"])
        p.add_argument("--start-level", dest="start_level", type=int)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    for key, value in vars(args).items():
        if key in ("group", "sub", "config") or value is None:
            continue
        cfg[key] = value
    out = Path(cfg.get("out_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    command = COMMANDS[(args.group, args.sub)]
    try:
        return command(cfg, out, int(cfg.get("seed", 0)), int(cfg.get("threads", 1)))
    except NotLocalizedError as err:
        # non-member frames are reported, not failed
        io.save_json({"verdict": "not-localized", **err.payload(),
                      "report": err.report.to_dict() if err.report else None},
                     out / "localization.json")
        return 0
    except LocframesError as err:
        io.save_json(err.payload(), out / "error.json")
        print(json.dumps(err.payload()), file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
