"""Command-line interface.

Every command prints one JSON document.  Exit status: 0 when the property
holds or the construction succeeds, 1 when it fails (the document carries a
witness), 2 on malformed input.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Callable, Sequence

from . import serialize as io
from .bell import build_pr_box, check_bell_local, local_implies_separable_check
from .classicalize import (
    FiniteBorelModel,
    Measure,
    barycenter_measure,
    borelify,
    lift_weight,
    semiclassical_cover,
)
from .composites import (
    NonSignalling,
    in_ns_state_space,
    is_separable_state,
    is_separable_weight,
    marginals_and_conditionals,
    preparable_products,
    product_space,
    product_weight,
    separable_generators,
)
from .errors import DomainError, HypothesisViolation, MorphismViolation, StructuralError
from .exactlp import Member
from .morphisms import Explanation, Morphism, check_morphism, classify, compose_explanations, pullback_weight
from .testspace import label, sorted_outcomes
from .weights import Weight, enumerate_dispersion_free, full_weight_polytope_vertices

Result = tuple[dict, int]


def _fr(v: Any) -> str:
    return io.format_fraction(v)


def _event(e: Any) -> list[str]:
    return [label(x) for x in sorted_outcomes(e)]


def _weight_arg(path: str, outcomes: tuple) -> Any:
    doc, _ = io.read_document(path)
    values = doc.get("values", doc) if isinstance(doc, dict) else doc
    return io.weight_from_doc(values, outcomes, f"{path}.values" if "values" in doc else path)


def _certificate_doc(result: Any, outcomes: Sequence, generator_names: Sequence[str]) -> dict:
    if isinstance(result, Member):
        return {
            "result": "Member",
            "mixture": [
                {"generator": generator_names[i], "index": i, "coefficient": _fr(c)}
                for i, c in result.certificate.coefficients
            ],
        }
    return {
        "result": "NotMember",
        "normal": {label(x): _fr(v) for x, v in zip(outcomes, result.normal)},
        "offset": _fr(result.offset),
    }


def _signalling_doc(witness: Any) -> dict:
    return {
        "party": witness.party,
        "outcome": label(witness.outcome),
        "tests": [_event(t) for t in witness.tests],
        "values": [_fr(v) for v in witness.values],
    }


def _split_doc(split: Any) -> dict:
    if isinstance(split, NonSignalling):
        return {
            "result": "NonSignalling",
            "first_marginal": io.weight_to_doc(split.first),
            "second_marginal": io.weight_to_doc(split.second),
            "first_given_second": {label(k): io.weight_to_doc(w) for k, w in split.first_given_second.items()},
            "second_given_first": {label(k): io.weight_to_doc(w) for k, w in split.second_given_first.items()},
        }
    return {"result": "Signalling", "witness": _signalling_doc(split.witness)}


def _classification_doc(phi: Morphism) -> dict:
    kind = classify(phi)
    return {name: getattr(kind, name) for name in kind.__dataclass_fields__}


# ---- commands


def cmd_validate(args: argparse.Namespace) -> Result:
    A = io.load_model(args.model)
    M = A.space
    return {
        "valid": True,
        "outcomes": len(M.outcomes),
        "tests": len(M.tests),
        "states": "full" if A.full else len(A.generators),
        "semiclassical": M.is_semiclassical(),
        "irredundant": M.is_irredundant(),
        "single_outcome_tests": M.count_single_outcome_tests(),
    }, 0


def _space_arg(path: str) -> Any:
    doc, _ = io.read_document(path)
    return io.space_from_doc(doc, path)


def cmd_df_enum(args: argparse.Namespace) -> Result:
    weights = enumerate_dispersion_free(_space_arg(args.model))
    return {"count": len(weights), "weights": [io.weight_to_doc(w) for w in weights]}, 0


def cmd_vertices(args: argparse.Namespace) -> Result:
    vs = full_weight_polytope_vertices(_space_arg(args.model))
    return {"count": len(vs), "vertices": [io.weight_to_doc(v) for v in vs]}, 0


def cmd_cover(args: argparse.Namespace) -> Result:
    cover, projection = semiclassical_cover(io.load_model(args.model))
    return {"cover": io.model_to_doc(cover), "projection": io.mapping_to_doc(projection.mapping)}, 0


def _blocks_doc(image: frozenset) -> list[list[int]]:
    return [sorted(b) for b in sorted(image, key=sorted)]


def cmd_borelify(args: argparse.Namespace) -> Result:
    A = io.load_model(args.model)
    try:
        b = borelify(A)
    except HypothesisViolation as exc:
        return {"result": "HypothesisViolation", "message": str(exc), "witness": [_event(t) for t in exc.witness]}, 1
    decompositions = []
    for alpha in A.generators:
        mu = barycenter_measure(b.borel, lift_weight(alpha, A.space))
        decompositions.append({"state": io.weight_to_doc(alpha), "measure": [_fr(m) for m in mu.masses]})
    return {
        "result": "Borelification",
        "points": [io.weight_to_doc(s) for s in b.points],
        "quotient": io.mapping_to_doc(b.quotient.mapping),
        "embedding": {label(x): _blocks_doc(v) for x, v in b.embedding.mapping.items()},
        "quotient_is_quotient": classify(b.quotient).quotient,
        "embedding_is_embedding": classify(b.embedding).embedding,
        "decompositions": decompositions,
    }, 0


def cmd_decompose(args: argparse.Namespace) -> Result:
    A = io.load_model(args.model)
    b = borelify(A)
    targets = [_weight_arg(args.weight, A.outcomes)] if args.weight else list(A.generators)
    rows = []
    status = 0
    for alpha in targets:
        result = barycenter_measure(b.borel, lift_weight(alpha, A.space))
        if isinstance(result, Measure):
            rows.append({"state": io.weight_to_doc(alpha), "result": "Feasible", "measure": [_fr(m) for m in result.masses]})
        else:
            status = 1
            cert = result.certificate
            rows.append({
                "state": io.weight_to_doc(alpha),
                "result": "Infeasible",
                "equality_multipliers": [_fr(v) for v in cert.equality_multipliers],
                "inequality_multipliers": [_fr(v) for v in cert.inequality_multipliers],
            })
    return {"points": len(b.points), "decompositions": rows}, status


def cmd_morphism_check(args: argparse.Namespace) -> Result:
    try:
        phi = io.load_morphism(args.morphism, strict=args.strict)
    except MorphismViolation as exc:
        return {
            "valid": False,
            "condition": exc.condition,
            "message": str(exc),
            "witness": _witness_doc(exc.witness),
        }, 1
    return {"valid": True, "strict": args.strict, "classification": _classification_doc(phi)}, 0


def _witness_doc(w: Any) -> Any:
    if isinstance(w, (tuple, list)):
        return [_witness_doc(v) for v in w]
    if isinstance(w, frozenset):
        return _event(w)
    if isinstance(w, dict) or hasattr(w, "items"):
        return {label(k): _fr(v) for k, v in w.items()}
    return label(w)


def cmd_pullback(args: argparse.Namespace) -> Result:
    phi = io.load_morphism(args.morphism)
    beta = _weight_arg(args.weight, phi.target.outcomes)
    pulled = pullback_weight(phi, beta)
    return {"weight": io.weight_to_doc(pulled), "is_state": phi.source.contains(pulled)}, 0


def _load_explanation(path: str) -> Explanation:
    doc, base = io.read_document(path)
    apex = io._model_ref(doc, "apex", base, path)
    explained = io._model_ref(doc, "explained", base, path)
    explainer = io._model_ref(doc, "explainer", base, path)
    q = io.mapping_from_doc(doc.get("quotient"), apex.outcomes, explained.outcomes, f"{path}.quotient")
    e = io.mapping_from_doc(doc.get("embedding"), apex.outcomes, explainer.outcomes, f"{path}.embedding")
    return Explanation(apex, check_morphism(apex, explained, q), check_morphism(apex, explainer, e))


def explanation_to_doc(ex: Explanation) -> dict:
    return {
        "kind": "explanation",
        "apex": io.model_to_doc(ex.apex),
        "explained": io.model_to_doc(ex.explained),
        "explainer": io.model_to_doc(ex.explainer),
        "quotient": io.mapping_to_doc(ex.quotient_leg.mapping),
        "embedding": io.mapping_to_doc(ex.embedding_leg.mapping),
    }


def cmd_compose_explanations(args: argparse.Namespace) -> Result:
    first, second = _load_explanation(args.first), _load_explanation(args.second)
    for name, ex in (("first", first), ("second", second)):
        if not ex.is_valid():
            return {"valid": False, "message": f"the {name} explanation does not have quotient and embedding legs"}, 1
    composed = compose_explanations(first, second)
    valid = composed.is_valid()
    return {"valid": valid, "explanation": explanation_to_doc(composed)}, 0 if valid else 1


def cmd_product(args: argparse.Namespace) -> Result:
    A, B = io.load_model(args.first), io.load_model(args.second)
    if args.weights:
        alpha = _weight_arg(args.weights[0], A.outcomes)
        beta = _weight_arg(args.weights[1], B.outcomes)
        try:
            return io.joint_to_doc(product_weight(alpha, beta, A, B)), 0
        except ValueError as exc:
            raise io.ParseError("--weights", str(exc)) from None
    return {"kind": "test-space", **io.space_to_doc(product_space(A, B))}, 0


def _joint_arg(path: str, parts: Sequence[str] | None) -> tuple[Any, Any, Any]:
    doc, _ = io.read_document(path)
    if parts:
        A, B = io.load_model(parts[0]), io.load_model(parts[1])
        return io.joint_from_doc(doc, path, A.space, B.space), A, B
    omega = io.joint_from_doc(doc, path)
    return omega, None, None


def cmd_ns_check(args: argparse.Namespace) -> Result:
    omega, A, B = _joint_arg(args.joint, args.parts)
    split = marginals_and_conditionals(omega)
    doc = _split_doc(split)
    if A is not None:
        doc["ns_state"] = in_ns_state_space(A, B, omega)
    return doc, 0 if isinstance(split, NonSignalling) else 1


def cmd_separable_check(args: argparse.Namespace) -> Result:
    if args.composite:
        C = io.load_composite(args.composite)
        omega = _weight_arg(args.joint, C.total.outcomes)
        try:
            result = is_separable_state(C, omega)
        except DomainError as exc:
            raise io.ParseError(args.joint, str(exc)) from None
        names = [label(p) for p in _product_names(preparable_products(C))]
        doc = {"mode": "state", **_certificate_doc(result, C.pi.source.outcomes, names)}
        return doc, 0 if result else 1
    omega, A, B = _joint_arg(args.joint, args.parts)
    left, right = omega.left, omega.right
    result = is_separable_weight(omega, left, right)
    gens = separable_generators(left, right)
    doc = {"mode": "weight", **_certificate_doc(result, product_space(left, right).outcomes, _product_names(gens))}
    return doc, 0 if result else 1


def _product_names(gens: Sequence[Any]) -> list[str]:
    names = []
    for g in gens:
        split = marginals_and_conditionals(g)
        first = ",".join(f"{label(x)}={_fr(v)}" for x, v in split.first.items() if v)
        second = ",".join(f"{label(y)}={_fr(v)}" for y, v in split.second.items() if v)
        names.append(f"[{first}]x[{second}]")
    return names


def cmd_composite_flags(args: argparse.Namespace) -> Result:
    C = io.load_composite(args.composite)
    return {
        "locally_tomographic": C.locally_tomographic,
        "strong": C.strong,
        "generators": len(C.total.generators),
    }, 0


def _load_embedding(path: str, C: Any) -> Morphism:
    doc, _ = io.read_document(path)
    n = io._require(doc, "points", int, path)
    raw = io._require(doc, "map", dict, path)
    cover, _ = semiclassical_cover(C.total)
    by_label = {label(x): x for x in cover.outcomes}
    if set(raw) != set(by_label):
        raise io.ParseError(f"{path}.map", f"keys must be exactly the cover outcomes {sorted(by_label)}")
    mapping = {}
    for l, block in raw.items():
        if not isinstance(block, list) or not all(isinstance(i, int) and 0 <= i < n for i in block):
            raise io.ParseError(f"{path}.map.{l}", f"expected a list of point indices below {n}")
        mapping[by_label[l]] = frozenset([frozenset(block)]) if block else frozenset()
    points = [
        Weight({x: 1 if any(s in b for b in mapping[x]) else 0 for x in cover.outcomes}) for s in range(n)
    ]
    return Morphism(cover, FiniteBorelModel(points, cover), mapping)


def cmd_bell_check(args: argparse.Namespace) -> Result:
    C = io.load_composite(args.composite)
    emb = _load_embedding(args.embedding, C) if args.embedding else None
    try:
        verdict = check_bell_local(C, emb)
    except DomainError as exc:
        raise io.ParseError(args.embedding or args.composite, str(exc)) from None
    doc: dict[str, Any] = {"local": verdict.local, "points": len(verdict.witnesses) + len(verdict.factorization)}
    if verdict.local:
        report = local_implies_separable_check(C, emb)
        doc["factorization"] = {
            str(s): {"first": io.weight_to_doc(a), "second": io.weight_to_doc(b)}
            for s, (a, b) in sorted(verdict.factorization.items())
        }
        doc["decompositions"] = [
            {
                "state": io.weight_to_doc(d.state),
                "measure": {str(s): _fr(m) for s, m in enumerate(d.measure) if m},
                "restriction": io.joint_to_doc(d.restriction)["values"],
                "separable_weight": True,
            }
            for d in report.decompositions
        ]
        return doc, 0
    doc["signalling_witnesses"] = sum(w.signalling for w in verdict.witnesses)
    doc["witnesses"] = [
        {
            "point": w.point,
            "signalling": w.signalling,
            "restriction": None if w.restriction is None else io.joint_to_doc(w.restriction)["values"],
            "minor": None
            if w.minor is None
            else {"rows": [label(w.minor[0]), label(w.minor[1])], "columns": [label(w.minor[2]), label(w.minor[3])], "determinant": _fr(w.minor[4])},
        }
        for w in verdict.witnesses
    ]
    return doc, 1


def cmd_pr_box(args: argparse.Namespace) -> Result:
    pr = build_pr_box()
    doc = io.joint_to_doc(pr.box)
    doc["components"] = [io.joint_to_doc(pr.omega), io.joint_to_doc(pr.omega_prime)]
    doc["component_signalling"] = [_split_doc(marginals_and_conditionals(w)) for w in (pr.omega, pr.omega_prime)]
    doc["parts"] = io.model_to_doc(pr.composite.left)
    return doc, 0


# ---- dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probmodels", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable[[argparse.Namespace], Result], help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate, "parse and summarize a model").add_argument("model")
    add("df-enum", cmd_df_enum, "dispersion-free weights of a test space").add_argument("model")
    add("vertices", cmd_vertices, "vertices of the full weight polytope").add_argument("model")
    add("cover", cmd_cover, "semiclassical cover and its projection").add_argument("model")
    add("borelify", cmd_borelify, "canonical classical explanation").add_argument("model")
    p = add("decompose", cmd_decompose, "representing measures on the dispersion-free points")
    p.add_argument("model")
    p.add_argument("--weight", help="a weight document; defaults to every state generator")
    p = add("morphism-check", cmd_morphism_check, "validate and classify a morphism")
    p.add_argument("morphism")
    p.add_argument("--strict", action="store_true", help="check perspectivity on all pairs of events")
    p = add("pullback", cmd_pullback, "pull a target weight back along a morphism")
    p.add_argument("morphism")
    p.add_argument("weight")
    p = add("compose-explanations", cmd_compose_explanations, "compose two explanations by pullback")
    p.add_argument("first")
    p.add_argument("second")
    p = add("product", cmd_product, "product test space, or product weight with --weights")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--weights", nargs=2, metavar=("ALPHA", "BETA"))
    p = add("ns-check", cmd_ns_check, "marginals and conditionals of a joint weight")
    p.add_argument("joint")
    p.add_argument("--parts", nargs=2, metavar=("A", "B"))
    p = add("separable-check", cmd_separable_check, "separability as a weight or as a state")
    p.add_argument("joint")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--parts", nargs=2, metavar=("A", "B"))
    mode.add_argument("--composite", help="composite document; the weight is then a state of its joint model")
    add("composite-flags", cmd_composite_flags, "local tomography and strength").add_argument("composite")
    p = add("bell-check", cmd_bell_check, "Bell locality of the canonical (or given) classical embedding")
    p.add_argument("composite")
    p.add_argument("--embedding", help="embedding document; defaults to the canonical one")
    add("pr-box", cmd_pr_box, "the PR box and its two signalling components")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc, status = args.fn(args)
    except (io.ParseError, StructuralError, DomainError, MorphismViolation, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(io.dumps(doc))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
