"""JSON documents for models, weights, morphisms and composites.

Rationals are strings in lowest terms ("3/4", "0", "1"); JSON floats are
rejected.  In files an outcome is a string or a list of outcomes (a pair in a
product space); maps keyed by outcome use the outcome's label.  Documents
referencing other files use paths relative to the referencing file.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .composites import Composite, JointWeight, make_composite
from .exactlp import to_fraction
from .morphisms import Morphism, check_morphism
from .testspace import Outcome, TestSpace, label, sorted_outcomes
from .weights import ProbModel, Weight, make_full_model


class ParseError(ValueError):
    """Malformed input, located by source name and key path."""

    def __init__(self, where: str, message: str) -> None:
        super().__init__(f"{where}: {message}")
        self.where = where


def format_fraction(v: Fraction) -> str:
    return str(v)


def dumps(doc: Any) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _no_float(text: str) -> Any:
    raise ValueError(f"floating-point number {text} is not allowed; write an exact rational string")


def loads(text: str, where: str) -> Any:
    try:
        return json.loads(text, parse_float=_no_float, parse_constant=_no_float)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{where}:{exc.lineno}:{exc.colno}", exc.msg) from None
    except ValueError as exc:
        raise ParseError(where, str(exc)) from None


def read_document(path: str) -> tuple[Any, Path]:
    """Parse ``path`` (``-`` for stdin); also return the directory for relative references."""
    if path == "-":
        return loads(sys.stdin.read(), "<stdin>"), Path.cwd()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(path, exc.strerror or str(exc)) from None
    return loads(text, path), p.resolve().parent


def _require(doc: Any, key: str, kind: type, where: str) -> Any:
    if not isinstance(doc, dict):
        raise ParseError(where, "expected an object")
    if key not in doc:
        raise ParseError(where, f"missing key {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ParseError(f"{where}.{key}", f"expected {kind.__name__}")
    return value


def outcome_to_json(x: Outcome) -> Any:
    if isinstance(x, tuple) and not hasattr(x, "context"):
        return [outcome_to_json(p) for p in x]
    return label(x)


def outcome_from_json(value: Any, where: str) -> Outcome:
    if isinstance(value, str):
        return value
    if isinstance(value, list) and value:
        return tuple(outcome_from_json(v, f"{where}[{k}]") for k, v in enumerate(value))
    raise ParseError(where, "an outcome is a string or a non-empty list of outcomes")


def rational_from_json(value: Any, where: str) -> Fraction:
    try:
        return to_fraction(value)
    except (TypeError, ValueError) as exc:
        raise ParseError(where, str(exc)) from None


# ---- test spaces and weights


def space_to_doc(M: TestSpace) -> dict:
    return {
        "outcomes": [outcome_to_json(x) for x in M.outcomes],
        "tests": [[outcome_to_json(x) for x in sorted_outcomes(E)] for E in M.tests],
    }


def space_from_doc(doc: Any, where: str) -> TestSpace:
    raw_tests = _require(doc, "tests", list, where)
    tests = []
    for k, t in enumerate(raw_tests):
        if not isinstance(t, list):
            raise ParseError(f"{where}.tests[{k}]", "expected a list of outcomes")
        tests.append([outcome_from_json(x, f"{where}.tests[{k}][{j}]") for j, x in enumerate(t)])
    outcomes = None
    if "outcomes" in doc:
        raw = _require(doc, "outcomes", list, where)
        outcomes = [outcome_from_json(x, f"{where}.outcomes[{k}]") for k, x in enumerate(raw)]
    try:
        M = TestSpace(tests, outcomes)
    except ValueError as exc:
        raise ParseError(where, str(exc)) from None
    labels = [label(x) for x in M.outcomes]
    if len(set(labels)) != len(labels):
        raise ParseError(where, "two outcomes share a label")
    return M


def weight_to_doc(w: Mapping[Outcome, Fraction]) -> dict:
    return {label(x): format_fraction(v) for x, v in w.items()}


def weight_from_doc(doc: Any, outcomes: tuple, where: str) -> Weight:
    if not isinstance(doc, dict):
        raise ParseError(where, "expected an object mapping outcome labels to rationals")
    by_label = {label(x): x for x in outcomes}
    unknown = sorted(set(doc) - set(by_label))
    if unknown:
        raise ParseError(where, f"unknown outcomes {unknown}")
    missing = [l for l in by_label if l not in doc]
    if missing:
        raise ParseError(where, f"missing outcomes {missing}")
    return Weight({by_label[l]: rational_from_json(v, f"{where}.{l}") for l, v in doc.items()})


# ---- models


def model_to_doc(A: ProbModel) -> dict:
    doc = {"kind": "model", **space_to_doc(A.space)}
    if A.full:
        doc["full"] = True
    else:
        doc["states"] = [weight_to_doc(g) for g in A.generators]
    return doc


def model_from_doc(doc: Any, where: str) -> ProbModel:
    space = space_from_doc(doc, where)
    if doc.get("full") is True:
        if "states" in doc:
            raise ParseError(where, "give either 'full': true or 'states', not both")
        return make_full_model(space)
    raw = _require(doc, "states", list, where)
    states = [weight_from_doc(s, space.outcomes, f"{where}.states[{k}]") for k, s in enumerate(raw)]
    try:
        return ProbModel(space, states)
    except ValueError as exc:
        raise ParseError(f"{where}.states", str(exc)) from None


def load_model(path: str) -> ProbModel:
    doc, _ = read_document(path)
    return model_from_doc(doc, path)


def _resolve(base: Path, ref: Any, where: str) -> str:
    if not isinstance(ref, str):
        raise ParseError(where, "expected a file path")
    return str(base / ref)


def _model_ref(doc: dict, key: str, base: Path, where: str) -> ProbModel:
    value = doc.get(key)
    if isinstance(value, dict):
        return model_from_doc(value, f"{where}.{key}")
    return load_model(_resolve(base, value, f"{where}.{key}"))


# ---- joint weights


def joint_to_doc(omega: JointWeight) -> dict:
    values: dict[str, dict[str, str]] = {}
    for (x, y), v in omega.items():
        values.setdefault(label(x), {})[label(y)] = format_fraction(v)
    return {
        "kind": "joint-weight",
        "left": space_to_doc(omega.left),
        "right": space_to_doc(omega.right),
        "values": values,
    }


def joint_from_doc(doc: Any, where: str, left: TestSpace | None = None, right: TestSpace | None = None) -> JointWeight:
    if left is None:
        left = space_from_doc(_require(doc, "left", dict, where), f"{where}.left")
    if right is None:
        right = space_from_doc(_require(doc, "right", dict, where), f"{where}.right")
    raw = _require(doc, "values", dict, where)
    xs = {label(x): x for x in left.outcomes}
    ys = {label(y): y for y in right.outcomes}
    if set(raw) != set(xs):
        raise ParseError(f"{where}.values", f"rows must be exactly {sorted(xs)}")
    values = {}
    for lx, row in raw.items():
        if not isinstance(row, dict) or set(row) != set(ys):
            raise ParseError(f"{where}.values.{lx}", f"columns must be exactly {sorted(ys)}")
        for ly, v in row.items():
            values[(xs[lx], ys[ly])] = rational_from_json(v, f"{where}.values.{lx}.{ly}")
    try:
        return JointWeight(values, left, right)
    except ValueError as exc:
        raise ParseError(f"{where}.values", str(exc)) from None


# ---- morphisms and composites


def mapping_to_doc(mapping: Mapping[Outcome, frozenset]) -> dict:
    return {label(x): [label(y) for y in sorted_outcomes(v)] for x, v in mapping.items()}


def mapping_from_doc(doc: Any, source: tuple, target: tuple, where: str) -> dict:
    if not isinstance(doc, dict):
        raise ParseError(where, "expected an object mapping outcome labels to lists of outcome labels")
    src = {label(x): x for x in source}
    tgt = {label(y): y for y in target}
    unknown = sorted(set(doc) - set(src))
    if unknown:
        raise ParseError(where, f"unknown source outcomes {unknown}")
    mapping = {}
    for l, image in doc.items():
        if not isinstance(image, list) or not all(isinstance(v, str) for v in image):
            raise ParseError(f"{where}.{l}", "expected a list of target outcome labels")
        bad = [v for v in image if v not in tgt]
        if bad:
            raise ParseError(f"{where}.{l}", f"unknown target outcomes {bad}")
        mapping[src[l]] = frozenset(tgt[v] for v in image)
    missing = [l for l in src if l not in doc]
    if missing:
        raise ParseError(where, f"map undefined on {missing}")
    return mapping


def load_morphism(path: str, *, strict: bool = False) -> Morphism:
    """Parse and validate a morphism document (raises MorphismViolation on failure)."""
    doc, base = read_document(path)
    source = _model_ref(doc, "source", base, path)
    target = _model_ref(doc, "target", base, path)
    mapping = mapping_from_doc(_require(doc, "map", dict, path), source.outcomes, target.outcomes, f"{path}.map")
    return check_morphism(source, target, mapping, strict=strict)


def morphism_to_doc(phi: Morphism) -> dict:
    return {
        "kind": "morphism",
        "source": model_to_doc(phi.source),
        "target": model_to_doc(phi.target),
        "map": mapping_to_doc(phi.mapping),
    }


def composite_from_doc(doc: Any, base: Path, where: str) -> Composite:
    left = _model_ref(doc, "left", base, where)
    right = _model_ref(doc, "right", base, where)
    total = _model_ref(doc, "total", base, where)
    mapping = None
    if "pi" in doc:
        pairs = tuple((x, y) for x in left.outcomes for y in right.outcomes)
        mapping = mapping_from_doc(doc["pi"], pairs, total.outcomes, f"{where}.pi")
    try:
        return make_composite(left, right, total, mapping)
    except ValueError as exc:
        raise ParseError(where, str(exc)) from None


def load_composite(path: str) -> Composite:
    doc, base = read_document(path)
    return composite_from_doc(doc, base, path)


def composite_to_doc(C: Composite) -> dict:
    return {
        "kind": "composite",
        "left": model_to_doc(C.left),
        "right": model_to_doc(C.right),
        "total": model_to_doc(C.total),
        "pi": mapping_to_doc(C.pi.mapping),
    }
