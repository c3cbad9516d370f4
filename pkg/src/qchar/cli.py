"""Command-line entry point ``qchar``.

Exit codes: 0 success, 2 validation error (JSON diagnostic on stderr),
64 unknown command, 74 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import config
from .errors import DegeneratePartitionError, DomainError, ResourceLimitError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_UNKNOWN = 64
EXIT_IO = 74

COMMANDS = (
    "lr", "schur", "qdim", "char-table", "mult-check", "ring-mul",
    "kms-check", "wick", "clt", "decay",
)


class _UsageError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2) with plain text
        code = EXIT_UNKNOWN if "invalid choice" in message and "command" in message else EXIT_VALIDATION
        raise _UsageError(message, code)


@dataclass
class RunConfig:
    """A parsed, validated invocation."""

    command: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        params = {k: v for k, v in vars(ns).items() if k not in ("command", "func")}
        return cls(ns.command, params)


# ---------------------------------------------------------------------------
# parsing helpers


def _ints(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise DomainError(f"expected comma-separated integers, got {text!r}") from None


def _number(text: str):
    """Exact Fraction for rational literals, float otherwise."""
    try:
        f = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a number: {text!r}") from None
    return f


def _q_value(text: str):
    if text in ("formal", "q"):
        return None
    q = _number(text)
    if q <= 0:
        raise DomainError(f"q must be positive, got {text}")
    return q


def _q_unit(text: str) -> float:
    q = float(_number(text))
    if not (0 < q <= 1):
        raise DomainError(f"q must lie in (0, 1], got {text}")
    return q


def _json_arg(text: str):
    """Inline JSON, or ``@path`` / a path to a JSON file."""
    if text.startswith("@"):
        return _read_json(text[1:])
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from None
    return _read_json(text)


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON in {path}: {exc}") from None


def _sizes(text: str) -> tuple:
    vals = _ints(text)
    if len(vals) != 2 or min(vals) < 1:
        raise DomainError(f"--sizes needs two positive integers a,b, got {text!r}")
    return vals


def _size_list(text: str) -> list:
    """``1e4..1e8`` (decades) or a comma list of sizes."""
    def one(t):
        v = float(t)
        if v != int(v) or v < 1:
            raise DomainError(f"sizes must be positive integers, got {t}")
        return int(v)

    if ".." in text:
        a, b = (one(t) for t in text.split("..", 1))
        if a > b:
            raise DomainError("size range must be increasing")
        out, v = [], a
        while v <= b:
            out.append(v)
            v *= 10
        return out
    return [one(t) for t in text.split(",") if t.strip()]


def _fmt_number(v) -> object:
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return v


def _emit(args, payload, csv_rows=None, csv_header=None):
    """Write ``payload`` as JSON, or ``csv_rows`` when ``--format csv``."""
    fmt = getattr(args, "format", "json")
    if fmt == "csv" and csv_rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if csv_header:
            w.writerow(csv_header)
        w.writerows(csv_rows)
        text = buf.getvalue()
    elif isinstance(payload, str):
        text = payload + "\n"
    else:
        text = json.dumps(payload, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_lr(args):
    from .partitions import Signature, lr_coefficient

    lam, mu, nu = _ints(args.lam), _ints(args.mu), _ints(args.nu)
    n = len(lam) + len(mu)
    if len(nu) > n:
        raise DomainError(f"nu has {len(nu)} parts but |lam| + |mu| rows = {n}")
    parts = nu + (0,) * (n - len(nu))
    c = lr_coefficient(Signature.of(lam), Signature.of(mu, lo=len(lam) + 1), Signature.of(parts))
    _emit(args, str(c), [[c]], ["c"])


def cmd_schur(args):
    from .partitions import Signature, schur_eval, schur_expand

    parts = _ints(args.lam)
    if args.point and args.nvars is None:
        args.nvars = len(args.point.split(","))
    if args.nvars is not None and args.nvars > len(parts):
        if parts and parts[-1] < 0:
            raise DomainError("zero-padding a signature with negative parts is ambiguous")
        parts = parts + (0,) * (args.nvars - len(parts))
    lam = Signature.of(parts)
    if args.point:
        point = [_number(t) for t in args.point.split(",")]
        v = schur_eval(lam, point)
        _emit(args, {"value": _fmt_number(v)}, [[_fmt_number(v)]], ["value"])
        return
    n = len(lam)
    series = schur_expand(lam, n)
    terms = sorted(series.terms.items(), reverse=True)
    _emit(
        args,
        {"n_vars": n, "terms": [{"exponent": list(e), "coeff": c} for e, c in terms]},
        [list(e) + [c] for e, c in terms],
        [f"e{i + 1}" for i in range(n)] + ["coeff"],
    )


def cmd_qdim(args):
    from .partitions import Signature, quantum_dimension

    lam = Signature.of(_ints(args.lam))
    q = _q_value(args.q)
    v = quantum_dimension(lam, q)
    if q is None:
        _emit(args, {"qdim": str(v), "rational": v.to_json()})
    else:
        _emit(args, {"qdim": _fmt_number(v) if isinstance(v, Fraction) else float(v)})


def _omega(text: str):
    from .characters import VoiculescuParams

    data = _json_arg(text)
    if not isinstance(data, dict):
        raise DomainError("--omega must be a JSON object")
    return VoiculescuParams.from_json(data)


def cmd_char_table(args):
    from .characters import character_table
    from .partitions import Interval

    table = character_table(
        _omega(args.omega), _q_unit(args.q), Interval.parse(args.interval), args.cut,
        neg_depth=args.neg_depth,
    )
    rows = [[",".join(map(str, s.parts)), v] for s, v in table.items()]
    _emit(args, table.to_json(), rows, ["parts", "value"])


def cmd_mult_check(args):
    from .characters import character_table, multiplicativity_residual
    from .partitions import Interval

    omega, q = _omega(args.omega), _q_unit(args.q)
    I, J = Interval.parse(args.I), Interval.parse(args.J)
    IJ = I.join(J)
    tabs = [character_table(omega, q, K, args.cut) for K in (I, J, IJ)]
    rep = multiplicativity_residual(*tabs)
    _emit(args, {**rep.to_json(), "mass_IJ": tabs[2].mass})


def cmd_ring_mul(args):
    from .repring import RingElement, ring_multiply

    q = _q_value(args.q)
    lhs = RingElement.from_json(_json_arg(args.lhs))
    rhs = RingElement.from_json(_json_arg(args.rhs))
    if q is not None:
        q = float(q)
    _emit(args, ring_multiply(lhs, rhs, q).to_json())


def cmd_kms_check(args):
    from .characters import VoiculescuParams, character_table
    from .kms import (
        Block, build_branching_model, factorization_residual, kms_residual,
        ocha_residual, random_element,
    )

    q = _q_unit(args.q)
    a, b = _sizes(args.sizes)
    if args.cut < 0:
        raise DomainError("--cut must be nonnegative")
    rng = np.random.default_rng(args.seed)
    kms_worst = 0.0
    for _ in range(args.draws):
        d = int(rng.integers(1, 7))
        block = Block("b", rng.uniform(0.2, 3.0, size=d))
        beta = float(rng.choice([-1.0, -0.5, 0.0]))
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        y = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        kms_worst = max(kms_worst, kms_residual(block, beta, x, y))
    model = build_branching_model(q, (a, b), args.cut, seed=args.seed)
    omega = _omega(args.omega) if args.omega else VoiculescuParams(gamma_plus=1.0)
    table = character_table(omega, q, model.joint.interval, args.cut)
    ocha = fact = 0.0
    tail = 0.0
    for _ in range(args.draws):
        x, y = random_element(model.left, rng), random_element(model.right, rng)
        ocha = max(ocha, ocha_residual(model, x, y))
        rep = factorization_residual(model, table, x, y)
        fact, tail = max(fact, rep.residual), max(tail, rep.tail_bound)
    _emit(args, {
        "q": q, "sizes": [a, b], "cut": args.cut, "seed": args.seed, "draws": args.draws,
        "joint_dim": model.joint.total_dim,
        "kms_residual": kms_worst, "ocha_residual": ocha,
        "factorization_residual": fact, "factorization_tail_bound": tail,
        "ok": kms_worst <= config.KMS_TOL and ocha <= config.OCHA_TOL
        and fact <= tail + config.MULT_TOL,
    })


def cmd_wick(args):
    from .ccr import CovarianceData, wick_moment, wick_moment_fd

    cov = CovarianceData.from_json(_json_arg(args.cov))
    word = [w.strip() for w in args.word.split(",") if w.strip()]
    m = wick_moment(cov, word)
    payload = {"word": word, "moment_re": m.real, "moment_im": m.imag}
    if args.fd:
        f = wick_moment_fd(cov, word)
        payload.update({"fd_re": f.real, "fd_im": f.imag})
    _emit(args, payload, [[m.real, m.imag]], ["moment_re", "moment_im"])


def _default_chain(n_sites):
    from .fluctsim import QuasiLocalChain

    return QuasiLocalChain.qubit(n_sites, 0.3)


def _default_observables():
    from .fluctsim import LocalObservable
    from .partitions import Interval

    return [LocalObservable(Interval(0, 0), np.diag([1.0, -1.0]), label="z")]


def _load_observables(text):
    from .fluctsim import LocalObservable

    data = _json_arg(text)
    if isinstance(data, dict):
        data = data.get("observables", [data])
    return [LocalObservable.from_json(d) for d in data]


def cmd_clt(args):
    from .fluctsim import QuasiLocalChain, clt_report

    obs = _load_observables(args.obs) if args.obs else _default_observables()
    ns = [int(float(t)) for t in args.ns.split(",") if t.strip()]
    if not ns:
        raise DomainError("--ns needs at least one value")
    if args.chain:
        chain = QuasiLocalChain.from_json(_json_arg(args.chain))
    else:
        width = max(o.support.hi - o.support.lo for o in obs)
        chain = _default_chain(max(1, max(ns) + width))
    rep = clt_report(chain, obs, ns, method=args.method)
    if args.format == "csv" or (args.out and args.out.endswith(".csv")):
        args.format = "csv"
        text = rep.to_csv()
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    _emit(args, rep.to_json())


def cmd_decay(args):
    from .fluctsim import LocalObservable, QuasiLocalChain, decay_report
    from .partitions import Interval

    sizes = _size_list(args.sizes)
    chain = QuasiLocalChain.from_json(_json_arg(args.chain)) if args.chain else QuasiLocalChain.pure_qubit(
        12, math.pi / 6, math.pi / 4
    )
    if args.obs:
        obs = _load_observables(args.obs)
        if len(obs) < 2:
            raise DomainError("decay needs two observables")
        x, y = obs[:2]
    else:
        X = np.array([[0, 1], [1, 0]])
        Y = np.array([[0, -1j], [1j, 0]])
        x = LocalObservable(Interval(0, 1), 0.5 * np.kron(X, X), label="x")
        y = LocalObservable(Interval(0, 1), 0.5 * np.kron(Y, Y), label="y")
    rows = decay_report(chain, x, y, sizes)
    data = [r.to_json() for r in rows]
    header = list(data[0]) if data else []
    _emit(args, {"log": "natural", "rows": data}, [[d[k] for k in header] for d in data], header)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qchar", description=__doc__.splitlines()[0])
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                   help="override a tolerance or bound from qchar.config")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser, metavar="command")

    def add(name, func, help_):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(func=func)
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--out", default=None, help="write output to this file")
        return s

    s = add("lr", cmd_lr, "Littlewood-Richardson coefficient")
    s.add_argument("--lam", required=True)
    s.add_argument("--mu", required=True)
    s.add_argument("--nu", required=True)

    s = add("schur", cmd_schur, "Schur polynomial expansion or value")
    s.add_argument("--lam", required=True)
    s.add_argument("--nvars", type=int, default=None)
    s.add_argument("--point", default=None, help="comma-separated rationals")

    s = add("qdim", cmd_qdim, "quantum dimension d_q(lambda)")
    s.add_argument("--lam", required=True)
    s.add_argument("--q", default="formal")

    s = add("char-table", cmd_char_table, "character table for Voiculescu parameters")
    s.add_argument("--omega", required=True, help="JSON object or path")
    s.add_argument("--q", required=True)
    s.add_argument("--interval", required=True, help="a..b")
    s.add_argument("--cut", type=int, required=True)
    s.add_argument("--neg-depth", type=int, default=None)

    s = add("mult-check", cmd_mult_check, "multiplicativity residual of character tables")
    s.add_argument("--omega", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--I", default="1..1")
    s.add_argument("--J", default="2..2")
    s.add_argument("--cut", type=int, default=8)

    s = add("ring-mul", cmd_ring_mul, "product in the representation ring")
    s.add_argument("--q", default="formal")
    s.add_argument("--lhs", required=True)
    s.add_argument("--rhs", required=True)

    s = add("kms-check", cmd_kms_check, "KMS, conditional-expectation and factorization residuals")
    s.add_argument("--q", required=True)
    s.add_argument("--sizes", required=True, help="a,b")
    s.add_argument("--cut", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--draws", type=int, default=20)
    s.add_argument("--omega", default=None)

    s = add("wick", cmd_wick, "Wick moment from a covariance")
    s.add_argument("--cov", required=True, help="covariance JSON or path")
    s.add_argument("--word", required=True, help="comma-separated labels")
    s.add_argument("--fd", action="store_true", help="also recover it by finite differences")

    s = add("clt", cmd_clt, "fluctuation characteristic function vs quasi-free limit")
    s.add_argument("--chain", default=None)
    s.add_argument("--obs", default=None)
    s.add_argument("--ns", required=True)
    s.add_argument("--method", default="auto", choices=("auto", "product", "vector", "dense"))

    s = add("decay", cmd_decay, "commutator bounds over block partitions")
    s.add_argument("--sizes", required=True, help="1e4..1e8 or a comma list")
    s.add_argument("--chain", default=None)
    s.add_argument("--obs", default=None)
    return p


def _apply_overrides(pairs: Sequence[str]):
    for item in pairs:
        name, sep, value = item.partition("=")
        if not sep or not name.isupper() or not hasattr(config, name):
            raise DomainError(f"unknown config override {item!r}")
        current = getattr(config, name)
        setattr(config, name, type(current)(float(value)) if isinstance(current, (int, float)) else value)


def _diagnostic(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        _diagnostic("unknown_command" if exc.code == EXIT_UNKNOWN else "usage", str(exc))
        return exc.code
    cfg = RunConfig.from_namespace(ns)
    saved = {k: getattr(config, k) for k in dir(config) if k.isupper()}
    try:
        _apply_overrides(cfg.params.get("set", []))
        with threadpool_limits(limits=config.max_threads()):
            ns.func(ns)
        return EXIT_OK
    except (DomainError, ResourceLimitError, DegeneratePartitionError, ValueError, KeyError, TypeError) as exc:
        _diagnostic(type(exc).__name__, str(exc))
        return EXIT_VALIDATION
    except OSError as exc:
        _diagnostic("io", str(exc))
        return EXIT_IO
    finally:
        for k, v in saved.items():
            setattr(config, k, v)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
