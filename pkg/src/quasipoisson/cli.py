"""Command line interface: validate, double, verify and eval on algebra files.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import ast
import hashlib
import json
import math
import re
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import groupgeom as gg
from .quasilie import (
    LieAlgebraSpec,
    apply_twist,
    build_pair_from_metric,
    check_identities,
    derive_quasibialgebra,
    lie_algebra,
    verify_manin_pair,
)
from .report import Check, Report
from .suites import run_suite
from .tensoralg import as_fraction, zeros

FORMAT_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line, self.column = line, column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


# algebra files

def _locate(text: str, token: str) -> tuple[int, int]:
    pos = text.find(token)
    if pos < 0:
        return 0, 0
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def _rational(value, text: str) -> Fraction:
    if not isinstance(value, (str, int)) or isinstance(value, bool):
        raise ParseError(f"rational must be a string 'p/q', got {value!r}", *_locate(text, json.dumps(value)))
    try:
        return as_fraction(value.strip() if isinstance(value, str) else value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {value!r}: {exc}", *_locate(text, json.dumps(value))) from None


def parse_algebra(text: str) -> tuple[LieAlgebraSpec, list[np.ndarray] | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1, 1)
    for key in ("format_version", "name", "dimension", "structure_constants"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}", 1, 1)
    if doc["format_version"] != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {doc['format_version']!r}", *_locate(text, '"format_version"'))
    n = doc["dimension"]
    if not isinstance(n, int) or n < 1:
        raise ParseError("dimension must be a positive integer", *_locate(text, '"dimension"'))
    labels = doc.get("basis") or [f"e{i + 1}" for i in range(n)]
    if len(labels) != n or len(set(labels)) != n:
        raise ParseError("basis must list n distinct labels", *_locate(text, '"basis"'))
    f = zeros(n, n, n)
    for rec in doc["structure_constants"]:
        try:
            i, j, k = (int(rec[c]) for c in "ijk")
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"bad structure constant record {rec!r}", *_locate(text, '"structure_constants"')) from None
        if not all(1 <= v <= n for v in (i, j, k)):
            raise ParseError(f"index out of range in {rec!r}", *_locate(text, '"structure_constants"'))
        f[i - 1, j - 1, k - 1] = _rational(rec.get("value"), text)
    K = None
    if doc.get("form") is not None:
        rows = doc["form"]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ParseError("form must be an n x n matrix", *_locate(text, '"form"'))
        K = [[_rational(v, text) for v in row] for row in rows]
    rep = None
    if doc.get("representation") is not None:
        rep = []
        for m in doc["representation"]:
            try:
                shape = tuple(m["shape"])
                re_ = np.asarray(m["real"], dtype=float).reshape(shape)
                im_ = np.asarray(m.get("imag", [0.0] * len(m["real"])), dtype=float).reshape(shape)
            except (KeyError, TypeError, ValueError):
                raise ParseError("bad representation matrix", *_locate(text, '"representation"')) from None
            rep.append(re_ + 1j * im_)
        if len(rep) != n:
            raise ParseError(f"representation needs {n} matrices", *_locate(text, '"representation"'))
    return lie_algebra(str(doc["name"]), labels, f, K), rep


def load_algebra(path) -> tuple[LieAlgebraSpec, list[np.ndarray] | None, str]:
    """Parse a file or a bundled name ('su2'); returns (algebra, representation, sha256 of the bytes)."""
    p = Path(path)
    if not p.exists() and re.fullmatch(r"[a-z0-9_]+", str(path)):
        p = bundled_path(str(path))
    raw = p.read_bytes()
    g, rep = parse_algebra(raw.decode("utf-8"))
    return g, rep, hashlib.sha256(raw).hexdigest()


def bundled_path(name: str) -> Path:
    p = Path(str(resources.files("quasipoisson") / "data" / f"{name}.json"))
    if not p.exists():
        raise FileNotFoundError(f"no bundled algebra named {name!r}")
    return p


def bundled_names() -> list[str]:
    return sorted(p.stem for p in Path(str(resources.files("quasipoisson") / "data")).glob("*.json"))


def algebra_document(g: LieAlgebraSpec, rep=None) -> dict:
    n = g.dim
    recs = [{"i": i + 1, "j": j + 1, "k": k + 1, "value": str(g.f.f[i, j, k])}
            for i in range(n) for j in range(n) for k in range(n) if g.f.f[i, j, k]]
    doc = {"format_version": FORMAT_VERSION, "name": g.name, "dimension": n, "basis": list(g.labels),
           "structure_constants": recs}
    if g.K is not None:
        doc["form"] = [[str(v) for v in row] for row in g.K]
    if rep is not None:
        doc["representation"] = [{"shape": list(m.shape), "real": [float(v) for v in np.real(m).ravel()],
                                  "imag": [float(v) for v in np.imag(m).ravel()]} for m in rep]
    return doc


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def render(report: Report, digest: str, command: str, extra: dict | None = None) -> str:
    doc = {"tool_version": __version__, "command": command, "input_sha256": digest,
           "status": "pass" if report.passed else "fail", "checks": report.to_dicts()}
    if extra:
        doc.update(extra)
    return canonical_json(doc)


# twist specs and group elements

def parse_twist(spec: str, labels) -> np.ndarray:
    """'e1^e2:1/2,e2^e3:-1' -> antisymmetric matrix t with t[e1, e2] = 1/2."""
    n = len(labels)
    t = zeros(n, n)
    if not spec.strip():
        return t
    for part in spec.split(","):
        m = re.fullmatch(r"\s*([^\s^:]+)\s*\^\s*([^\s^:]+)\s*:\s*(\S+)\s*", part)
        if not m:
            raise ParseError(f"bad twist term {part!r} (expected 'ei^ej:p/q')")
        a, b, v = m.groups()
        if a not in labels or b not in labels:
            raise ParseError(f"unknown basis label in {part!r}")
        i, j = labels.index(a), labels.index(b)
        if i == j:
            raise ParseError(f"repeated label in {part!r}")
        try:
            c = as_fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational in {part!r}: {exc}") from None
        t[i, j] += c
        t[j, i] -= c
    return t


_ALLOWED = {"pi": math.pi, "sqrt": math.sqrt, "sin": math.sin, "cos": math.cos}
_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Call, ast.Load,
          ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def _evaluate(expr: str, names: dict):
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError:
        raise ParseError(f"cannot parse {expr!r}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ParseError(f"unsupported expression {expr!r}")
        if isinstance(node, ast.Name) and node.id not in names:
            raise ParseError(f"unknown name {node.id!r} in {expr!r}")
    try:
        return eval(compile(tree, "<expr>", "eval"), {"__builtins__": {}}, names)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot evaluate {expr!r}: {exc}") from None


def _number(expr: str) -> float:
    value = _evaluate(expr, dict(_ALLOWED))
    if not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {expr!r}")
    return float(value)


def parse_vector(spec: str, labels) -> np.ndarray:
    """'1.5*e1 - e3' or '0' -> coordinates in the basis."""
    names = dict(_ALLOWED)
    names.update({l: np.eye(len(labels))[i] for i, l in enumerate(labels)})
    value = _evaluate(spec, names)
    if isinstance(value, (int, float)) and value == 0:
        return np.zeros(len(labels))
    if not isinstance(value, np.ndarray):
        raise ParseError(f"expected a linear combination of basis labels, got {spec!r}")
    return value.astype(float)


def parse_point(spec: str, model: gg.MatrixGroupModel, labels) -> gg.GroupPoint:
    spec = spec.strip()
    m = re.fullmatch(r"exp\((.*)\)", spec)
    if m:
        return model.exp_point(parse_vector(m.group(1), labels))
    m = re.fullmatch(r"diag-torus\((.*)\)", spec)
    if m:
        theta = _number(m.group(1))
        phases = [theta if i % 2 == 0 else -theta for i in range(model.size)]
        return model.point(np.diag(np.exp(1j * np.array(phases))))
    try:
        data = json.loads(spec)
    except json.JSONDecodeError:
        raise ParseError(f"cannot parse group element {spec!r}") from None
    mat = np.array([[complex(*v) if isinstance(v, list) else complex(v) for v in row] for row in data])
    return model.point(mat)


# commands

def cmd_validate(path) -> tuple[int, str]:
    g, rep, digest = load_algebra(path)
    report = g.checks().prefixed("algebra")
    if report.passed and g.K is not None:
        qt = build_pair_from_metric(g)
        report.extend(verify_manin_pair(qt.d, qt.g_rows).prefixed("double").checks)
    if report.passed and rep is not None:
        try:
            model = gg.MatrixGroupModel(g, rep, rep_tol=np.inf)
            defect = model.rep_defect()
            report.add(Check("group.rep", "representation reproduces the structure constants", defect <= 1e-12, defect))
        except ValueError as exc:
            report.add(Check("group.rep", "representation is faithful", False, float("nan"), str(exc)))
    return (EXIT_OK if report.passed else EXIT_FAIL), render(report, digest, "validate")


def cmd_double(path, complement: str = "") -> tuple[int, str]:
    g, rep, digest = load_algebra(path)
    report = g.checks().prefixed("algebra")
    if g.K is None:
        report.add(Check("double.form", "an invariant form is required", False, float("nan"), "no form"))
        return EXIT_FAIL, render(report, digest, "double")
    if not report.passed:
        return EXIT_FAIL, render(report, digest, "double")
    t = parse_twist(complement, list(g.labels))
    qt = build_pair_from_metric(g)
    qt_t = qt.twisted(t)
    qb = derive_quasibialgebra(qt_t)
    report.extend(check_identities(qt_t).prefixed("identities").checks)
    coherent = apply_twist(derive_quasibialgebra(qt), t) == qb
    report.add(Check("twist.coherence", "twisting (F, phi) agrees with re-deriving from the twisted complement",
                     coherent, Fraction(0) if coherent else Fraction(1)))
    n = g.dim
    F = {f"{g.labels[i]}:{g.labels[j]}^{g.labels[k]}": str(qb.F[i, j, k])
         for i in range(n) for j in range(n) for k in range(j + 1, n) if qb.F[i, j, k]}
    phi = {"^".join(g.labels[i] for i in key): str(c) for key, c in sorted(qb.phi.terms.items())}
    d = qt.d
    extra = {"double": algebra_document(LieAlgebraSpec(d.name, d.f, d.K)), "twist": complement,
             "F": F, "phi": phi}
    return (EXIT_OK if report.passed else EXIT_FAIL), render(report, digest, "double", extra)


def cmd_verify(path, suite: str, seed: int = 0, samples: int = 50, tol: float = 1e-9) -> tuple[int, str]:
    g, rep, digest = load_algebra(path)
    pre = g.checks().prefixed("algebra")
    if not pre.passed:
        return EXIT_FAIL, render(pre, digest, f"verify {suite}")
    group = gg.MatrixGroupModel(g, rep) if rep is not None else None
    report = run_suite(suite, g, group, seed, samples, tol)
    extra = {"suite": suite, "seed": seed, "samples": samples, "tol": repr(tol)}
    return (EXIT_OK if report.passed else EXIT_FAIL), render(report, digest, "verify", extra)


def cmd_eval(path, at: str, obj: str, complement: str = "") -> tuple[int, str]:
    g, rep, digest = load_algebra(path)
    if rep is None:
        raise ParseError("eval needs representation matrices")
    labels = list(g.labels)
    group = gg.MatrixGroupModel(g, rep)
    s = parse_point(at, group, labels)
    t = parse_twist(complement, labels)
    tf = gg.to_float(t)
    out: dict = {"tool_version": __version__, "input_sha256": digest, "at": at, "object": obj,
                 "complement": complement}
    if obj == "PG":
        qt = build_pair_from_metric(g) if g.K is not None else None
        if qt is None:
            from .quasilie import standard_triple
            value = gg.bivector_P_G(standard_triple(g), s, gg.ad_D_standard, tf)
        else:
            value = gg.bivector_P_G(qt, s, gg.ad_D_double, tf)
        out["value"] = value.tolist()
        return EXIT_OK, canonical_json(out)
    model = gg.DoubleModel(group)
    ok, margin = gg.admissibility(s, model, tf)
    out["admissible"], out["margin"] = ok, margin
    try:
        if obj == "PS":
            value = gg.bivector_P_S(s, model, tf)
        elif obj == "phiS":
            frame = gg.FrameAlgebra(g)
            field = gg.phi_S_field(frame, derive_quasibialgebra(model.triple.twisted(t)).phi)
            value = frame.evaluate(field, s)
        elif obj.startswith("hat:"):
            value = gg.hat_form(parse_vector(obj[4:], labels), s, model, tf)
        elif obj.startswith("dressing:"):
            parts = obj[len("dressing:"):].split("|")
            if len(parts) != 2:
                raise ParseError("dressing needs 'x1|x2'")
            value = gg.dressing_field(parse_vector(parts[0], labels), parse_vector(parts[1], labels), s)
        elif obj == "tau":
            value = gg.tau_map(s, model, tf)
        else:
            raise ParseError(f"unknown object {obj!r}")
    except gg.NonAdmissibleError as exc:
        out["error"] = str(exc)
        return EXIT_FAIL, canonical_json(out)
    out["value"] = np.asarray(value).tolist()
    return EXIT_OK, canonical_json(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manin", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", help="check the Lie algebra axioms, the form and the representation")
    v.add_argument("path")
    d = sub.add_parser("double", help="build g + g, derive (F, phi) and check the identities")
    d.add_argument("path")
    d.add_argument("--complement", default="", help="twist of the reference complement, e.g. 'e1^e2:1/2'")
    r = sub.add_parser("verify", help="run a verification suite")
    r.add_argument("path")
    r.add_argument("--suite", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--samples", type=int, default=50)
    r.add_argument("--tol", type=float, default=1e-9)
    e = sub.add_parser("eval", help="evaluate a pointwise object")
    e.add_argument("path")
    e.add_argument("--at", required=True, help="'exp(1.2*e1)', 'diag-torus(pi/2)' or a JSON matrix")
    e.add_argument("--object", required=True, help="PG, PS, phiS, tau, hat:x or dressing:x1|x2")
    e.add_argument("--complement", default="")
    return p


SUITES = ("algebra", "group", "moment")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "validate":
            code, text = cmd_validate(args.path)
        elif args.command == "double":
            code, text = cmd_double(args.path, args.complement)
        elif args.command == "verify":
            if args.suite not in SUITES:
                print(f"manin: unknown suite {args.suite!r} (choose from {', '.join(SUITES)})", file=sys.stderr)
                return EXIT_USAGE
            code, text = cmd_verify(args.path, args.suite, args.seed, args.samples, args.tol)
        else:
            code, text = cmd_eval(args.path, args.at, args.object, args.complement)
    except ParseError as exc:
        print(f"manin: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, UnicodeDecodeError) as exc:
        print(f"manin: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"manin: {exc}", file=sys.stderr)
        return EXIT_FAIL
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
