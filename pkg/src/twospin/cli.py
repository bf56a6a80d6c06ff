"""Command-line front end. Output is JSON (sorted keys) or CSV on stdout."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import baker, gadget as gd, graph as gr, phase, reduction, spin
from .rational import ResourceLimit, ValidationError, fmt_rational, parse_rational
from .transfer import cylinder_Z


def _rat(s):
    try:
        return parse_rational(s)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e))


def _graph(args):
    if getattr(args, "graph", None):
        return gr.load_graph(Path(args.graph))
    if getattr(args, "family", None):
        return gr.family(args.family)
    raise ValidationError("give --graph FILE or --family SPEC")


def _gadget(args):
    if args.nu is not None:
        return gd.cylinder(args.nu) if args.k is None else gd.Gadget(args.nu, args.k, args.d or 0)
    if args.k is None or args.d is None:
        raise ValidationError("give --nu or both --k and --d")
    return gd.build_gadget(args.k, args.d)


def _params(args):
    return spin.SpinParams(args.beta, args.gamma, args.lam)


def _pin(s):
    if not s:
        return {}
    p = Path(s)
    if p.exists():
        d = json.loads(p.read_text())
        return {int(k): int(v) for k, v in d.items()}
    out = {}
    for part in s.split(","):
        v, _, x = part.partition("=")
        try:
            out[int(v)] = int(x)
        except ValueError:
            raise ValidationError(f"bad pin entry {part!r} (use v=s)")
    return out


def _config(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"cannot read configuration: {e}") from e


def _w(x):
    if isinstance(x, Fraction):
        return fmt_rational(x)
    return x


# ---------------------------------------------------------------------------

def cmd_z_exact(a):
    return spin.weight_json(spin.brute_force_Z(_graph(a), _params(a), _pin(a.pin)))


def cmd_z_dp(a):
    g = _graph(a)
    td = gr.build_tree_decomposition(g, a.td)
    return spin.weight_json(spin.dp_Z(g, _params(a), _pin(a.pin), td=td, backend=a.backend))


def cmd_z_cylinder(a):
    return spin.weight_json(cylinder_Z(_gadget(a), _params(a), _pin(a.pin), backend=a.backend))


def cmd_marginal(a):
    target = _gadget(a) if (a.nu is not None or a.k is not None) else _graph(a)
    return {"marginal": _w(spin.marginal(target, _params(a), a.vertex, _pin(a.pin)))}


def cmd_check_params(a):
    ok, bad = spin.check_condition1(_params(a))
    return {"satisfied": ok, "violated": bad}


def cmd_lambda_c(a):
    return {"lambda_c": fmt_rational(spin.lambda_c(a.delta))}


def cmd_estimate_p(a):
    r = phase.estimate_p(a.m, _params(a), neq_boundary=a.variant)
    return {"m": r.m, "p_eq": fmt_rational(r.p_eq_m), "p_neq": fmt_rational(r.p_neq_m),
            "p_eq_float": float(r.p_eq_m), "p_neq_float": float(r.p_neq_m)}


def cmd_gadget(a):
    g = _gadget(a)
    if a.action == "build":
        out = {"nu": g.nu, "k": g.k, "d": g.d, "n": g.n, "m": g.graph.m,
               "terminals1": [list(t) for t in g.terminals1],
               "terminals0": [list(t) for t in g.terminals0]}
        if a.out:
            Path(a.out).write_text(json.dumps(g.graph.to_json(), sort_keys=True))
        return out
    if a.action == "contours":
        cs = gd.extract_contours(g, _config(a.config))
        return {"contours": [{"kind": c.kind, "length": len(c.trail) - 1, "wraps": c.wraps,
                              "trail2": c.doubled()} for c in cs]}
    if a.action == "phase":
        return {"phase": gd.classify_phase(g, _config(a.config), strict=not a.lenient)}
    if a.action == "terminal-joint":
        j = gd.terminal_joint(g, _params(a))
        return {"terminals": [list(t) for t in g.terminals],
                "joint": {"".join(map(str, t)): fmt_rational(v) for t, v in sorted(j.items())}}
    if a.action == "sample":
        seed = a.seed if a.sub_seed is None else a.sub_seed
        s = gd.glauber_sample(g, _params(a), a.sweeps, seed)
        out = {"config": [int(x) for x in s], "seed": seed, "sweeps": a.sweeps}
        if g.k and g.d % 4 == 0:
            out["phase"] = gd.classify_phase(g, s)
        return out
    raise ValidationError(f"unknown gadget action {a.action}")


def cmd_reduce(a):
    if a.action == "decide":
        z = parse_rational(a.z_ratio)
        lam = parse_rational(a.lambda_hat)
        return {"decision": reduction.decide_is(a.h, z, lam, a.n)}
    g = _graph(a)
    if a.action == "build":
        inst = reduction.build_instance(g, a.k1, a.k2, a.d)
        out = {"J_vertices": inst.J.n, "J_edges": inst.J.m, "Jprime_vertices": inst.Jprime.n,
               "Jprime_edges": inst.Jprime.m, "bristle_edges": len(inst.E_B),
               "matching_edges": len(inst.E_M), "max_degree": inst.Jprime.max_degree,
               "faces": len(inst.Jprime.faces), "nu": inst.gadget.nu}
        if a.out:
            Path(a.out).write_text(json.dumps(inst.Jprime.to_json(), sort_keys=True))
            Path(a.out + ".terminals.json").write_text(json.dumps(inst.terminal_map(), sort_keys=True))
        return out
    if a.action == "identity":
        ok = reduction.verify_identity(g, _params(a), a.p_eq, a.p_neq, a.k1, a.k2)
        return {"holds": ok}
    raise ValidationError(f"unknown reduce action {a.action}")


def cmd_log_pras(a):
    g = _graph(a)
    p = _params(a)
    b = baker.BakerParams(a.epsilon,
                          a.beta_minus if a.beta_minus is not None else p.beta,
                          a.beta_plus if a.beta_plus is not None else p.beta,
                          a.gamma_minus if a.gamma_minus is not None else p.gamma,
                          a.gamma_plus if a.gamma_plus is not None else p.gamma,
                          a.lambda_minus if a.lambda_minus is not None else p.lam,
                          a.lambda_plus if a.lambda_plus is not None else p.lam)
    lz, cert = baker.log_pras(g, a.epsilon, b, p)
    return {"log_z_hat": lz, "certificate": cert.to_json()}


def cmd_verify(a):
    g = _graph(a)
    td = gr.build_tree_decomposition(g, "min_fill")
    probs = gr.verify_decomposition(g, td)
    out = {"n": g.n, "m": g.m, "faces": len(g.faces), "components": len(g.components),
           "width": td.width, "decomposition_ok": not probs}
    if g.n <= 16:
        p = _params(a)
        out["dp_matches_brute_force"] = spin.dp_Z(g, p, td=td) == spin.brute_force_Z(g, p)
    return out


# ---------------------------------------------------------------------------

def _add_params(p, lam_default="1"):
    p.add_argument("--beta", type=_rat, default=Fraction(1))
    p.add_argument("--gamma", type=_rat, default=Fraction(0))
    p.add_argument("--lambda", dest="lam", type=_rat, default=_rat(lam_default))


def _add_graph(p):
    p.add_argument("--graph", help="graph JSON file")
    p.add_argument("--family", help="generated family, e.g. grid:3,3 or k4^2")


def _add_gadget(p):
    p.add_argument("--nu", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="twospin", description=__doc__)
    ap.add_argument("--format", choices=["json", "csv"], default="json")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1, help="accepted; computation is single-threaded")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("z-exact")
    _add_graph(p), _add_params(p)
    p.add_argument("--pin")
    p.set_defaults(fn=cmd_z_exact)

    p = sub.add_parser("z-dp")
    _add_graph(p), _add_params(p)
    p.add_argument("--pin")
    p.add_argument("--backend", choices=["exact", "log"], default="exact")
    p.add_argument("--td", choices=["min_fill", "column_sweep"], default="min_fill")
    p.set_defaults(fn=cmd_z_dp)

    p = sub.add_parser("z-cylinder")
    _add_gadget(p), _add_params(p)
    p.add_argument("--pin")
    p.add_argument("--backend", choices=["exact", "log"], default="exact")
    p.set_defaults(fn=cmd_z_cylinder)

    p = sub.add_parser("marginal")
    _add_graph(p), _add_gadget(p), _add_params(p)
    p.add_argument("--vertex", type=int, required=True)
    p.add_argument("--pin")
    p.set_defaults(fn=cmd_marginal)

    p = sub.add_parser("check-params")
    _add_params(p)
    p.set_defaults(fn=cmd_check_params)

    p = sub.add_parser("lambda-c")
    p.add_argument("--delta", type=int, required=True)
    p.set_defaults(fn=cmd_lambda_c)

    p = sub.add_parser("estimate-p")
    _add_params(p, "312")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--variant", choices=["algorithm", "definition"], default="algorithm")
    p.set_defaults(fn=cmd_estimate_p)

    p = sub.add_parser("gadget")
    p.add_argument("action", choices=["build", "contours", "phase", "terminal-joint", "sample"])
    _add_gadget(p), _add_params(p, "312")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--sweeps", type=int, default=10)
    p.add_argument("--seed", dest="sub_seed", type=int, default=None)
    p.add_argument("--lenient", action="store_true", help="allow d not divisible by 4")
    p.set_defaults(fn=cmd_gadget)

    p = sub.add_parser("reduce")
    p.add_argument("action", choices=["build", "identity", "decide"])
    _add_graph(p), _add_params(p, "2")
    p.add_argument("--k1", type=int, default=1)
    p.add_argument("--k2", type=int, default=1)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--p-eq", type=_rat, default=Fraction(7, 10))
    p.add_argument("--p-neq", type=_rat, default=Fraction(3, 10))
    p.add_argument("--h", type=int, default=0)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--z-ratio", default="1")
    p.add_argument("--lambda-hat", default="1")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("log-pras")
    _add_graph(p), _add_params(p)
    p.add_argument("--epsilon", type=_rat, required=True)
    for name in ("beta", "gamma", "lambda"):
        for side in ("plus", "minus"):
            p.add_argument(f"--{name}-{side}", type=_rat, dest=f"{name}_{side}")
    p.set_defaults(fn=cmd_log_pras)

    p = sub.add_parser("verify")
    _add_graph(p), _add_params(p)
    p.set_defaults(fn=cmd_verify)
    return ap


def _csv(obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(obj, dict):
        w.writerow(["key", "value"])
        for k in sorted(obj):
            v = obj[k]
            w.writerow([k, v if isinstance(v, (str, int, float, bool)) or v is None
                        else json.dumps(v, sort_keys=True, separators=(",", ":"))])
    return buf.getvalue()


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        res = args.fn(args)
    except ResourceLimit as e:
        print(json.dumps({"error": str(e)}), file=sys.stderr)
        return 3
    except (ValidationError, OSError, json.JSONDecodeError) as e:
        print(json.dumps({"error": str(e)}), file=sys.stderr)
        return 2
    if args.format == "csv":
        out.write(_csv(res))
    else:
        out.write(json.dumps(res, sort_keys=True, separators=(",", ":")) + "\n")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
