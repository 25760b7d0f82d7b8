"""Command line front end.

Settings come from built-in defaults, then a ``key=value`` config file
(``--config`` or ``$GTLAB_CONFIG``), then flags.  Exit status: 0 on success,
1 when a verification fails (a witness is printed), 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from fractions import Fraction

from . import bialgebra as bi
from . import kv, suites
from .algebra import AlgebraError, TruncSeries, cyclic_canonical, format_word, parse_series, parse_word
from .geometry import GeometryError, taut_rot
from .surface import Framing, LoopSum, parse_loop_sum

CONFIG_ENV = "GTLAB_CONFIG"


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    holes: int = 2
    trunc: int = 4
    framing: tuple | None = None
    seed: int = 0
    output: str = "text"

    @property
    def framing_obj(self) -> Framing:
        return Framing(self.framing) if self.framing is not None else Framing.blackboard(self.holes)

    def validate(self) -> "Config":
        if self.holes < 1:
            raise InputError(f"holes must be >= 1, got {self.holes}")
        if self.trunc < 0:
            raise InputError(f"trunc must be >= 0, got {self.trunc}")
        if self.framing is not None and len(self.framing) != self.holes:
            raise InputError(f"framing has {len(self.framing)} entries but the surface has {self.holes} holes")
        if self.output not in ("text", "json"):
            raise InputError(f"output must be text or json, got {self.output!r}")
        return self


def _framing_tuple(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise InputError(f"bad framing {text!r}: expected integers c1,...,cn") from None


def _surface_holes(text: str) -> int:
    key, _, value = text.partition("=")
    if key.strip() != "holes" or not value.strip().isdigit():
        raise InputError(f"bad surface {text!r}: expected holes=n")
    return int(value)


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise InputError(f"bad value {value!r} for {key}") from None


def read_config(path: str) -> dict:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise InputError(f"cannot read config {path!r}: {e.strerror}") from None
    out: dict = {}
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (p.strip() for p in line.partition("="))
        if not sep:
            raise InputError(f"{path}:{num}: expected key=value, got {line!r}")
        if key in ("holes", "trunc", "seed"):
            out[key] = _int(key, value)
        elif key == "framing":
            out[key] = _framing_tuple(value)
        elif key == "output":
            out[key] = value
        elif key == "surface":
            out["holes"] = _surface_holes(value)
        else:
            raise InputError(f"{path}:{num}: unknown key {key!r}")
    return out


def resolve_config(args: argparse.Namespace, environ=os.environ) -> Config:
    cfg = Config()
    path = args.config or environ.get(CONFIG_ENV)
    if path:
        cfg = replace(cfg, **read_config(path))
    if args.surface is not None:
        cfg = replace(cfg, holes=_surface_holes(args.surface))
    if args.trunc is not None:
        cfg = replace(cfg, trunc=args.trunc)
    if args.framing is not None:
        cfg = replace(cfg, framing=_framing_tuple(args.framing))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.json:
        cfg = replace(cfg, output="json")
    return cfg.validate()


# ---------------------------------------------------------------------------
# input helpers


def _taut(n: int):
    return lambda word: taut_rot(cyclic_canonical(word), n)


def loops(text: str, cfg: Config) -> LoopSum:
    return parse_loop_sum(text, cfg.holes, _taut(cfg.holes))


def word(text: str, cfg: Config) -> tuple:
    return parse_word("" if text.strip() == "1" else text, cfg.holes)


def element(text: str, cfg: Config) -> dict:
    """Classical completed element: ``logsq:C``, ``logprod:A;B``, ``comm:C1;C2``, ``twist:C`` or a loop sum."""
    n, N = cfg.holes, cfg.trunc
    kind, sep, body = text.partition(":")
    if not sep or kind not in ("logsq", "logprod", "comm", "twist"):
        return loops(text, cfg).phi()
    parts = body.split(";")
    want = 2 if kind in ("logprod", "comm") else 1
    if len(parts) != want:
        raise InputError(f"{kind}: expects {want} word(s) separated by ';', got {len(parts)}")
    ws = [word(p, cfg) for p in parts]
    if kind == "logsq":
        return kv.log_square(ws[0], n, N)
    if kind == "twist":
        return kv.twist_log(ws[0], n, N).classical
    if kind == "logprod":
        return kv.log_product(ws[0], ws[1], N + 2)
    return bi.classical_bracket(kv.log_square(ws[0], n, N), kv.log_square(ws[1], n, N), n)


def components(texts: list[str], cfg: Config) -> list[TruncSeries]:
    if len(texts) > cfg.holes:
        raise InputError(f"got {len(texts)} components for {cfg.holes} generators")
    out = [parse_series(t, cfg.holes, cfg.trunc) for t in texts]
    return out + [TruncSeries.zero(cfg.holes, cfg.trunc)] * (cfg.holes - len(out))


def _classical_json(x: dict) -> list:
    return [[list(w), str(Fraction(v))] for w, v in sorted(x.items(), key=lambda kv: (len(kv[0]), kv[0]))]


def _classical_text(x: dict) -> str:
    if not x:
        return "0"
    return " + ".join(f"{v} * |{format_word(w)}|" for w, v in sorted(x.items(), key=lambda kv: (len(kv[0]), kv[0])))


# ---------------------------------------------------------------------------
# verbs: each returns (status, payload for json, text lines)


def cmd_bracket(args, cfg):
    s = bi.bracket(loops(args.a, cfg), loops(args.b, cfg), cfg.holes)
    return 0, {"bracket": s.to_json()}, [s.render()]


def cmd_cobracket(args, cfg):
    a = loops(args.a, cfg)
    t = bi.cobracket_reduced(a, cfg.holes) if args.reduced else bi.cobracket(a, cfg.holes)
    return 0, {"cobracket": t.to_json()}, [t.render()]


def cmd_sigma(args, cfg):
    out = bi.sigma_action(loops(args.u, cfg), word(args.word, cfg), cfg.holes, rot=args.rot)
    rows = sorted(out.items(), key=lambda kv: (len(kv[0][0]), kv[0]))
    text = " + ".join(f"{v} * ({format_word(w)}; {r})" for (w, r), v in rows) or "0"
    return 0, {"sigma": [[list(w), r, str(v)] for (w, r), v in rows]}, [text]


def cmd_twist_log(args, cfg):
    C = word(args.curve, cfg)
    if not C:
        raise InputError("twist-log needs a nontrivial curve")
    if args.check_simple and not kv.is_embedded(C, cfg.holes):
        msg = f"taut realization of {format_word(C)} has self-crossings"
        return 1, {"error": msg}, [f"FAIL {msg}"]
    t = kv.twist_log(C, cfg.holes, cfg.trunc, f=cfg.framing_obj, h=args.genus)
    payload = {"curve": list(t.curve), "rot": t.rot, "regular": t.regular.to_json(), "trace": t.trace.to_json()}
    return 0, payload, [f"rot: {t.rot}", f"regular: {t.regular.render()}", f"trace: {t.trace.render()}"]


def cmd_es_trace(args, cfg):
    out = kv.es_trace(components(args.components, cfg))
    return 0, {"es_trace": out.to_json()}, [out.render()]


def cmd_div(args, cfg):
    d = kv.TangentialDerivation(tuple(components(args.components, cfg)))
    out = kv.divergence(d)
    return 0, {"div": out.to_json()}, [out.render()]


def cmd_compare(args, cfg):
    n, N = cfg.holes, cfg.trunc
    u = element(args.element, cfg)
    member = kv.lplus_member(u, n, N + 1, cfg.seed)
    if not member:
        return 1, {"member": False, "witness": member.witness}, [f"FAIL not in L+: {member.witness}"]
    cmp = kv.compare_es_div(u, cfg.framing_obj, n, N, check=False, salt=cfg.seed)
    ok = cmp.agrees_from(3)
    payload = {
        "es": cmp.es.to_json(),
        "div": cmp.div.to_json(),
        "difference": {str(d): t.to_json() for d, t in sorted(cmp.difference.items())},
        "agrees_from_degree_3": ok,
        "low_degree_discrepancy": cmp.low_window(),
    }
    lines = [f"ES:  {cmp.es.render()}", f"div: {cmp.div.render()}"]
    lines += [f"degree {d}: {t.render()}" for d, t in sorted(cmp.difference.items())]
    lines.append(("PASS" if ok else "FAIL") + f" degrees >= 3 agree; discrepancy degrees: {cmp.low_window()}")
    return (0 if ok else 1), payload, lines


def cmd_commutator(args, cfg):
    n, N = cfg.holes, cfg.trunc
    c1, c2 = word(args.c1, cfg), word(args.c2, cfg)
    fs = [Framing.blackboard(n)]
    second = cfg.framing_obj if cfg.framing is not None and any(cfg.framing) else Framing((1,) + (0,) * (n - 1))
    fs.append(second)
    img = kv.commutator_image(c1, c2, n, N, fs, cfg.seed)
    es_zero = img.es.is_zero()
    ok = img.framing_independent and img.matches and es_zero
    payload = {
        "bracket": _classical_json(img.bracket),
        "classical": img.classical.to_json(),
        "regular": {k: v.to_json() for k, v in sorted(img.regular.items())},
        "framing_independent": img.framing_independent,
        "matches": img.matches,
        "es": img.es.to_json(),
    }
    lines = [
        f"bracket: {_classical_text(img.bracket)}",
        f"trace: {img.classical.render()}",
        f"framing independent: {img.framing_independent}",
        f"regular side matches: {img.matches}",
        f"ES_f of bracket: {img.es.render()}",
        "PASS" if ok else "FAIL",
    ]
    return (0 if ok else 1), payload, lines


def _report(checks: list[suites.Check], extra: dict | None = None):
    ok = all(c.ok for c in checks)
    payload = {"checks": [{"name": c.name, "passed": c.passed, "total": c.total, "witness": c.witness} for c in checks]}
    payload["ok"] = ok
    payload.update(extra or {})
    lines = [c.line() for c in checks] + [("PASS" if ok else "FAIL") + f" summary: {sum(c.ok for c in checks)}/{len(checks)} checks"]
    return (0 if ok else 1), payload, lines


def cmd_verify(args, cfg):
    n = cfg.holes
    classes = suites.corpus(n, cfg.seed, size=args.size)
    checks = suites.bialgebra_checks(n, classes)
    checks.append(suites.power_vanishing(n))
    checks.append(suites.cocycle_check(cfg.seed, count=args.cocycles))
    return _report(checks, {"corpus": [str(c) for c in classes]})


def cmd_oracle(args, cfg):
    n = cfg.holes
    classes = suites.corpus(n, cfg.seed, size=args.size)
    checks = [
        suites.realization_checks(n, classes),
        suites.representative_independence(n, classes),
        suites.fast_split_agreement(n, classes),
        *suites.rotation_bookkeeping(n, cfg.seed, args.loops),
    ]
    return _report(checks)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", help="holes=n")
    common.add_argument("--trunc", type=int, help="truncation degree N (default 4)")
    common.add_argument("--framing", help="c1,...,cn (default blackboard)")
    common.add_argument("--seed", type=int)
    common.add_argument("--json", action="store_true")
    common.add_argument("--config", help=f"key=value file (or ${CONFIG_ENV})")

    p = argparse.ArgumentParser(prog="gtlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def verb(name, fn, help):
        s = sub.add_parser(name, parents=[common], help=help)
        s.set_defaults(fn=fn)
        return s

    s = verb("bracket", cmd_bracket, "bracket of two loop sums")
    s.add_argument("a")
    s.add_argument("b")
    s = verb("cobracket", cmd_cobracket, "cobracket of a loop sum")
    s.add_argument("a")
    s.add_argument("--reduced", action="store_true", help="drop trivial classes first")
    s = verb("sigma", cmd_sigma, "action of a loop sum on a based loop")
    s.add_argument("u")
    s.add_argument("word")
    s.add_argument("--rot", type=int, default=0)
    s = verb("twist-log", cmd_twist_log, "logarithm of a Dehn twist")
    s.add_argument("curve")
    s.add_argument("--genus", type=int, default=None)
    s.add_argument("--check-simple", action="store_true")
    s = verb("es-trace", cmd_es_trace, "contraction trace of x_i -> f_i")
    s.add_argument("components", nargs="*")
    s = verb("div", cmd_div, "divergence of x_i -> [x_i, a_i]")
    s.add_argument("components", nargs="*")
    s = verb("compare-es-div", cmd_compare, "ES_f against div on an element of L+")
    s.add_argument("element")
    s = verb("commutator-check", cmd_commutator, "ES_f of a twist-log commutator")
    s.add_argument("c1")
    s.add_argument("c2")
    s = verb("verify-axioms", cmd_verify, "Lie bialgebra, embedded powers, cocycle")
    s.add_argument("--size", type=int, default=12)
    s.add_argument("--cocycles", type=int, default=50)
    s = verb("oracle-check", cmd_oracle, "geometric oracle and representative independence")
    s.add_argument("--size", type=int, default=12)
    s.add_argument("--loops", type=int, default=100)
    return p


def run(argv: list[str], environ=os.environ, out=sys.stdout, err=sys.stderr) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = resolve_config(args, environ)
        status, payload, lines = args.fn(args, cfg)
    except (InputError, AlgebraError, kv.KVError, GeometryError, ValueError) as e:
        print(f"error: {e}", file=err)
        return 2
    if cfg.output == "json":
        print(json.dumps({"command": args.command, "status": status, **payload}, sort_keys=True, indent=2), file=out)
    else:
        print("\n".join(lines), file=out)
    return status


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
