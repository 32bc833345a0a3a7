"""Command-line front end: ``pgstlab <subcommand> ...``.

Exit codes: 0 PST/PGST, 1 NoPGST, 2 Unknown, 3 usage or input error,
4 nothing found within the search bound, 5 a ``--verify`` check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass, fields, replace
from typing import Any, Sequence

import mpmath

from . import kronecker as kr
from . import spectra as sp
from . import transfer as tr
from .classify import Status, classify as classify_graph, measure_certificate
from .graph_core import CirculantGraph, CompositeGraph, Graph, GraphError, parse_graph

EXIT_ERROR = 3
EXIT_NOT_FOUND = 4
EXIT_VERIFY_FAILED = 5
FORMATS = ("json", "csv", "table")


class CliError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    epsilon: float = 1e-3
    q_max: int = 10 ** 7
    step: float = 1e-3
    start: float = 0.0
    stop: float = 1000.0
    format: str = "json"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for name in ("epsilon", "q_max", "step", "threads"):
            if not getattr(self, name) > 0:
                raise CliError(f"config value {name} must be positive")
        if self.start < 0 or self.stop <= self.start:
            raise CliError("config range must satisfy 0 <= start < stop")
        if self.seed < 0:
            raise CliError("config seed must be non-negative")
        if self.format not in FORMATS:
            raise CliError(f"format must be one of {', '.join(FORMATS)}")


def _coerce(name: str, raw: str) -> Any:
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise CliError(f"unknown config key {name!r}")
    kind = kinds[name]
    try:
        if kind == "int":
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise CliError(f"bad value for {name}: {raw!r}") from exc
    return raw.strip()


def load_config(path: str | None) -> RunConfig:
    """Defaults, overridden by a key=value file when one is given."""
    cfg = RunConfig()
    if not path:
        return cfg
    updates = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                updates[key.replace("-", "_")] = _coerce(key.replace("-", "_"), value)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    return replace(cfg, **updates)


# -- output ---------------------------------------------------------------

_FLOAT_MARK = "\x00F"


def _mark_floats(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return _FLOAT_MARK + format(obj, ".17g")
    if isinstance(obj, dict):
        return {str(k): _mark_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_mark_floats(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """JSON with every float printed to 17 significant digits."""
    text = json.dumps(_mark_floats(obj), indent=2)
    return re.sub(r'"\\u0000F([^"]*)"', r"\1", text)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple)) and len(obj) > 12:
        yield prefix.rstrip("."), f"[{len(obj)} items]"
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), obj


def _human(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def emit(obj: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(dumps(obj) + "\n")
        return
    rows = list(_flatten(obj))
    if fmt == "csv":
        out.write("key,value\n")
        for k, v in rows:
            out.write(f"{k},{format(v, '.17g') if isinstance(v, float) else v}\n")
        return
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        out.write(f"{k.ljust(width)}  {_human(v)}\n")


# -- argument helpers -----------------------------------------------------

_TIME_RE = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]*(?:e[-+]?[0-9]+)?)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$", re.I)


def parse_time(text: str):
    """A float, or a multiple of pi such as ``12pi``, ``pi/2`` or ``2*pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _TIME_RE.match(text)
    if not m:
        raise CliError(f"cannot parse time {text!r}")
    coef = m.group(1)
    coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    den = float(m.group(2)) if m.group(2) else 1.0
    value = coef * math.pi / den
    if abs(value) > 2.0 ** 30:
        with mpmath.workdps(40):
            return mpmath.mpf(coef) * mpmath.pi / den
    return value


def parse_vertex(graph: Graph, text: str):
    try:
        if "," in text:
            parts = tuple(int(x) for x in text.split(","))
            if not isinstance(graph, CompositeGraph):
                raise CliError("tuple vertices need a product graph")
            graph.join_vertex(parts)
            return parts
        v = int(text)
    except ValueError as exc:
        raise CliError(f"bad vertex {text!r}") from exc
    limit = graph.order
    if not 0 <= v < limit:
        raise CliError(f"vertex {v} out of range 0..{limit - 1}")
    return v


def _graph(text: str) -> Graph:
    return parse_graph(text)


def _circulant(text: str, what: str) -> CirculantGraph:
    g = _graph(text)
    if not isinstance(g, CirculantGraph):
        raise CliError(f"{what} needs a circulant graph, not a product")
    return g


# -- subcommands ----------------------------------------------------------


def cmd_spectrum(args, cfg: RunConfig) -> int:
    g = _circulant(args.graph, "spectrum")
    spec = sp.eigenvalues(g)
    if cfg.format == "json":
        emit(spec.to_json(), "json")
    elif cfg.format == "csv":
        sys.stdout.write("l,lambda\n")
        for l, val in enumerate(spec.values):
            sys.stdout.write(f"{l},{val:.17g}\n")
        sys.stdout.write(f"# integral={str(spec.integral).lower()}\n")
    else:
        for l, val in enumerate(spec.values):
            sys.stdout.write(f"{l:>6}  {val: .6g}\n")
        sys.stdout.write(f"integral: {spec.integral}\n")
    return 0


def cmd_amplitude(args, cfg: RunConfig) -> int:
    g = _graph(args.graph)
    u, v = parse_vertex(g, args.u), parse_vertex(g, args.v)
    res = tr.amplitude(g, u, v, parse_time(args.t))
    emit(res.to_json(), cfg.format)
    return 0


def _classify_kwargs(cfg: RunConfig, args) -> dict:
    return {"epsilon": cfg.epsilon, "q_max": cfg.q_max, "solve": bool(args.verify),
            "strategy": getattr(args, "strategy", "auto")}


def cmd_classify(args, cfg: RunConfig) -> int:
    g = _graph(args.graph)
    u = parse_vertex(g, args.u) if args.u is not None else None
    v = parse_vertex(g, args.v) if args.v is not None else None
    if (u is None) != (v is None):
        raise CliError("give both vertices or neither")
    verdict = classify_graph(g, u, v, **_classify_kwargs(cfg, args))
    out = verdict.to_json()
    code = verdict.exit_code
    if args.verify and verdict.status in (Status.PST, Status.PGST):
        m = measure_certificate(verdict, g)
        if m is None:
            out["verification"] = {"ok": False, "reason": f"no solution with q <= {cfg.q_max}"}
            code = EXIT_VERIFY_FAILED
        else:
            out["verification"] = m.to_json()
            if not m.ok:
                code = EXIT_VERIFY_FAILED
    emit(out, cfg.format)
    return code


def cmd_find_time(args, cfg: RunConfig) -> int:
    g = _graph(args.graph)
    verdict = classify_graph(g)
    if verdict.status not in (Status.PST, Status.PGST):
        raise CliError(f"{args.graph} is not in a PGST-certified family "
                       f"(classified {verdict.status.value}); run `pgstlab classify` for the certificate")
    u, v = verdict.pair
    cert = verdict.certificate
    if cert.exact_time is not None:
        res = tr.amplitude(g, u, v, cert.exact_time)
        emit({"status": "PST", "t": cert.exact_time, "fidelity": res.fidelity, "strategy": "exact"}, cfg.format)
        return 0
    if args.target is not None:
        if not 0 < args.target <= 1:
            raise CliError("target fidelity must lie in (0, 1]")
        found = kr.first_turn_reaching(g, args.target, cfg.q_max, u, v)
        if found is None:
            emit({"found": False, "target": args.target, "q_max": cfg.q_max}, cfg.format)
            return EXIT_NOT_FOUND
        out = {"found": True, "target": args.target, "strategy": "fidelity-scan"}
        out.update(found.to_json())
        emit(out, cfg.format)
        if args.verify and found.fidelity < args.target:
            return EXIT_VERIFY_FAILED
        return 0
    problem = cert.problem.with_epsilon(cfg.epsilon)
    sol = kr.solve(problem, cfg.q_max, args.strategy, cfg.threads)
    if sol is None:
        emit({"found": False, "epsilon": cfg.epsilon, "q_max": cfg.q_max, "strategy": args.strategy}, cfg.format)
        return EXIT_NOT_FOUND
    out = {"found": True}
    out.update(sol.to_json())
    fid = tr.amplitude(g, u, v, sol.exact_time).fidelity
    out["fidelity"] = fid
    bound = 1 - 2 * math.pi * sol.worst_error
    out["implied_bound"] = bound
    if isinstance(g, CirculantGraph):
        out["residuals"] = kr.phase_report(g.n, sol.exact_time, g).to_json()["residuals"]
    emit(out, cfg.format)
    if args.verify and isinstance(g, CirculantGraph) and fid < bound - 1e-9:
        return EXIT_VERIFY_FAILED
    return 0


def cmd_scan(args, cfg: RunConfig) -> int:
    g = _graph(args.graph)
    u, v = parse_vertex(g, args.u), parse_vertex(g, args.v)
    start = cfg.start if args.start is None else args.start
    stop = cfg.stop if args.stop is None else args.stop
    step = cfg.step if args.step is None else args.step
    curve = tr.fidelity_scan(g, u, v, start, stop, step, workers=cfg.threads)
    summary = curve.summary()
    fmt = args.format_override or "csv"
    if fmt != "csv":
        emit(summary, fmt)
        return 0
    line = f"# max_fidelity={summary['max_fidelity']:.17g} argmax_time={summary['argmax_time']:.17g}\n"
    if args.output:
        with open(args.output, "w") as fh:
            curve.write_csv(fh)
        sys.stdout.write(line)
    else:
        curve.write_csv(sys.stdout)
        sys.stderr.write(line)
    return 0


def cmd_certify(args, cfg: RunConfig) -> int:
    if args.kind == "independence":
        if args.n is None:
            raise CliError("certify independence needs an order n")
        try:
            cert = sp.rational_independence(args.n)
        except sp.UnsupportedOrderError as exc:
            raise CliError(f"{exc} (only powers of two are covered)") from exc
        emit(cert.to_json(), cfg.format)
        return 0
    if args.m is None or args.p is None:
        raise CliError("certify dependency needs --m and --p")
    w = sp.dependency_witness(args.m, args.p)
    emit(w.to_json(), cfg.format)
    return 0


# -- parser ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--format", choices=FORMATS, default=d, help="output format")
    p.add_argument("--config", default=d, help="key=value config file (else $PGSTLAB_CONFIG)")
    p.add_argument("--verify", action="store_true", default=d if suppress else False,
                   help="re-measure fidelity at certificate times")
    p.add_argument("--threads", type=int, default=d, help="worker threads for scans and searches")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pgstlab", description="Pretty good state transfer on circulant graphs.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="closed-form eigenvalues of a circulant")
    p.add_argument("graph")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("amplitude", help="one transition-matrix entry H(t)[u, v]")
    p.add_argument("graph")
    p.add_argument("u")
    p.add_argument("v")
    p.add_argument("t", help="time: a float or a multiple of pi such as 12pi or pi/2")
    p.set_defaults(func=cmd_amplitude)

    p = sub.add_parser("classify", help="PGST verdict with certificate")
    p.add_argument("graph")
    p.add_argument("u", nargs="?")
    p.add_argument("v", nargs="?")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--q-max", type=int, dest="q_max")
    p.add_argument("--strategy", choices=("auto", "bruteforce", "lattice"), default="auto")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("find-time", help="construct a near-perfect transfer time t = 2 pi q")
    p.add_argument("graph")
    p.add_argument("--target", type=float, help="fidelity to reach (minimal q by direct evaluation)")
    p.add_argument("--epsilon", type=float, help="coordinate tolerance for the approximation solver")
    p.add_argument("--q-max", type=int, dest="q_max")
    p.add_argument("--strategy", choices=("auto", "bruteforce", "lattice"), default="auto")
    p.set_defaults(func=cmd_find_time)

    p = sub.add_parser("scan", help="fidelity on a time grid, as CSV")
    p.add_argument("graph")
    p.add_argument("u")
    p.add_argument("v")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("certify", help="exact independence or dependency certificates")
    p.add_argument("kind", choices=("independence", "dependency"))
    p.add_argument("n", nargs="?", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=int)
    p.set_defaults(func=cmd_certify)

    for action in sub.choices.values():
        _global_flags(action, suppress=True)
    return parser


def _resolve_config(args) -> RunConfig:
    path = args.config or os.environ.get("PGSTLAB_CONFIG")
    cfg = load_config(path)
    overrides = {}
    if args.format:
        overrides["format"] = args.format
    if args.threads:
        overrides["threads"] = args.threads
    for name in ("epsilon", "q_max"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return replace(cfg, **overrides)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        args.format_override = args.format
        return args.func(args, cfg)
    except (CliError, GraphError, ValueError, IndexError, TypeError) as exc:
        sys.stderr.write(f"pgstlab: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
