"""Small named test spaces, models and composites used by the CLI and tests."""

from __future__ import annotations

import contextlib
import io
import os
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .composites import (
    Composite,
    make_composite,
    minimal_ns_composite,
    product_space,
    product_weight,
    separable_generators,
)
from .exactlp import ONE, ZERO
from .testspace import TestSpace
from .weights import ProbModel, Weight, convex_combination, full_weight_polytope_vertices, make_full_model

HALF = Fraction(1, 2)

SQUARE = TestSpace([["a", "b"], ["u", "v"]])
PR_SQUARE = TestSpace([["x", "y"], ["u", "v"]])
TRIANGLE = TestSpace([["a", "b"], ["b", "c"], ["c", "a"]])
BIT = TestSpace([["x", "y"]])
TRIT = TestSpace([["p", "q", "r"]])
WEDGE = TestSpace([["a", "b"], ["b", "c"]])
SINGLES = TestSpace([["a"], ["b"]])

SPACES = {
    "square": SQUARE,
    "pr_square": PR_SQUARE,
    "triangle": TRIANGLE,
    "bit": BIT,
    "trit": TRIT,
    "wedge": WEDGE,
}


def quadrilateral_trit() -> ProbModel:
    """A single three-outcome test whose states form a quadrilateral, not a simplex."""
    gens = [(1, 0, 0), (HALF, HALF, 0), (HALF, 0, HALF), (0, HALF, HALF)]
    return ProbModel(TRIT, [dict(zip(TRIT.outcomes, g)) for g in gens])


def segment_trit() -> ProbModel:
    third = Fraction(1, 3)
    return ProbModel(TRIT, [{"p": 1, "q": 0, "r": 0}, {"p": third, "q": third, "r": third}])


def square_state(a: object, u: object) -> Weight:
    """The weight on :data:`SQUARE` fixed by its values at ``a`` and ``u``."""
    a, u = Fraction(a), Fraction(u)
    return Weight({"a": a, "b": 1 - a, "u": u, "v": 1 - u})


def models() -> dict[str, ProbModel]:
    out = {name: make_full_model(space) for name, space in SPACES.items()}
    out["quadrilateral_trit"] = quadrilateral_trit()
    out["segment_trit"] = segment_trit()
    out["square_third_quarter"] = ProbModel(SQUARE, [square_state(Fraction(1, 3), Fraction(1, 4))])
    return out


def _joint(space_a: TestSpace, space_b: TestSpace, ones: list[tuple[str, str]]) -> Weight:
    values = {(x, y): ZERO for x in space_a.outcomes for y in space_b.outcomes}
    for pair in ones:
        values[pair] = ONE
    return Weight(values)


def pr_box_weight() -> Weight:
    omega = _joint(PR_SQUARE, PR_SQUARE, [("x", "x"), ("x", "u"), ("u", "x"), ("u", "v")])
    omega_prime = _joint(PR_SQUARE, PR_SQUARE, [("y", "y"), ("y", "v"), ("v", "y"), ("v", "u")])
    return convex_combination([(HALF, omega), (HALF, omega_prime)])


def coarse_bit_composite() -> Composite:
    """Two bits whose joint model adds a same/different test.

    The five states include one that agrees with another on the bit pairs but
    not on the extra test, so the composite is not locally tomographic.
    """
    space = TestSpace(list(product_space(BIT, BIT).tests) + [["same", "diff"]])
    gens = []
    for x in BIT.outcomes:
        for y in BIT.outcomes:
            w = {p: ZERO for p in space.outcomes}
            w[(x, y)] = ONE
            w["same" if x == y else "diff"] = ONE
            gens.append(w)
    quarter = Fraction(1, 4)
    gens.append({**{p: quarter for p in product_space(BIT, BIT).outcomes}, "same": ONE, "diff": ZERO})
    bit = make_full_model(BIT)
    return make_composite(bit, bit, ProbModel(space, gens))


@lru_cache(maxsize=1)
def composites() -> dict[str, Composite]:
    """Every fixture composite, keyed by name."""
    bit = make_full_model(BIT)
    pr = make_full_model(PR_SQUARE)
    seg = segment_trit()
    quad = quadrilateral_trit()
    joint = product_space(PR_SQUARE, PR_SQUARE)
    vertices = full_weight_polytope_vertices(PR_SQUARE)
    uniform = convex_combination([(Fraction(1, 4), v) for v in vertices])
    uniform_product = product_weight(uniform, uniform, PR_SQUARE, PR_SQUARE)
    return {
        "bit_bit": minimal_ns_composite(bit, bit),
        "bit_segment": minimal_ns_composite(bit, seg),
        "coarse_bit": coarse_bit_composite(),
        "pr_square_minimal": minimal_ns_composite(pr, pr),
        "pr_square_pr_and_product": make_composite(
            pr, pr, ProbModel(joint, [pr_box_weight(), uniform_product])
        ),
        "pr_square_single_product": make_composite(pr, pr, ProbModel(joint, [uniform_product])),
        "pr_square_bosonic": make_composite(
            pr, pr, ProbModel(joint, [product_weight(v, v, PR_SQUARE, PR_SQUARE) for v in vertices])
        ),
        "pr_square_separable": make_composite(pr, pr, ProbModel(joint, separable_generators(PR_SQUARE, PR_SQUARE))),
        "bit_pr_square": minimal_ns_composite(bit, pr),
        "quadrilateral_minimal": minimal_ns_composite(quad, quad),
    }


# ---- small models for morphism fixtures

PAIR = TestSpace([["a1", "a2"]])
SQUARE_B = TestSpace([["b1", "b2"], ["b3", "b4"]])
TRIT_C = TestSpace([["c1", "c2", "c3"]])
SPLIT_SINGLES = TestSpace([["b"], ["d"]])
SPLIT_PAIRS = TestSpace([["a", "b"], ["c", "d"]])
SQUARE_SUPPORT = TestSpace([["a"], ["u"]])

FUNCTOR_F = {"a1": {"b1"}, "a2": {"b2"}}
FUNCTOR_G = {"b1": {"c1"}, "b2": {"c2", "c3"}, "b3": {"c1", "c2"}, "b4": {"c3"}}

COMPOSITE_PARTS = {
    "bit_bit": ("bit", "bit"),
    "bit_segment": ("bit", "segment_trit"),
    "coarse_bit": ("bit", "bit"),
    "pr_square_minimal": ("pr_square", "pr_square"),
    "pr_square_pr_and_product": ("pr_square", "pr_square"),
    "pr_square_single_product": ("pr_square", "pr_square"),
    "pr_square_bosonic": ("pr_square", "pr_square"),
    "pr_square_separable": ("pr_square", "pr_square"),
    "bit_pr_square": ("bit", "pr_square"),
    "quadrilateral_minimal": ("quadrilateral_trit", "quadrilateral_trit"),
}


def fixture_documents() -> dict[str, dict]:
    """Every fixture file as ``relative path -> document``."""
    from .classicalize import semiclassical_cover
    from .composites import JointWeight
    from .serialize import joint_to_doc, mapping_to_doc, model_to_doc, weight_to_doc

    docs: dict[str, dict] = {}
    all_models = models()
    all_models.update(
        pair=make_full_model(PAIR),
        square_b=make_full_model(SQUARE_B),
        trit_c=make_full_model(TRIT_C),
        split_singles=make_full_model(SPLIT_SINGLES),
        split_pairs=make_full_model(SPLIT_PAIRS),
        square_support=make_full_model(SQUARE_SUPPORT),
    )
    for name, A in all_models.items():
        docs[f"{name}.model"] = model_to_doc(A)

    for name, C in composites().items():
        left, right = COMPOSITE_PARTS[name]
        docs[f"{name}.total.model"] = model_to_doc(C.total)
        docs[f"{name}.composite"] = {
            "kind": "composite",
            "left": f"{left}.model",
            "right": f"{right}.model",
            "total": f"{name}.total.model",
            "pi": mapping_to_doc(C.pi.mapping),
        }

    def morphism(source: str, target: str, mapping: dict) -> dict:
        return {"kind": "morphism", "source": f"{source}.model", "target": f"{target}.model", "map": mapping_to_doc(mapping)}

    docs["functor_f.morphism"] = morphism("pair", "square_b", FUNCTOR_F)
    docs["functor_g.morphism"] = morphism("square_b", "trit_c", FUNCTOR_G)
    docs["split_inclusion.morphism"] = morphism("split_singles", "split_pairs", {"b": {"b"}, "d": {"d"}})
    support = {x: ({x} if x in ("a", "u") else set()) for x in SQUARE.outcomes}
    docs["square_support.morphism"] = morphism("square", "square_support", support)

    cover, projection = semiclassical_cover(make_full_model(TRIANGLE))
    cover_doc = model_to_doc(cover)
    docs["triangle_cover.model"] = cover_doc
    labels = cover_doc["outcomes"]
    docs["triangle_by_cover.explanation"] = {
        "kind": "explanation",
        "apex": "triangle_cover.model",
        "explained": "triangle.model",
        "explainer": "triangle_cover.model",
        "quotient": {l: [l.split("@")[0]] for l in labels},
        "embedding": {l: [l] for l in labels},
    }
    docs["triangle_cover_identity.explanation"] = {
        "kind": "explanation",
        "apex": "triangle_cover.model",
        "explained": "triangle_cover.model",
        "explainer": "triangle_cover.model",
        "quotient": {l: [l] for l in labels},
        "embedding": {l: [l] for l in labels},
    }

    docs["square_third_quarter.weight"] = {"kind": "weight", "values": {"a": "1/3", "b": "2/3", "u": "1/4", "v": "3/4"}}
    docs["trit_uniform.weight"] = {"kind": "weight", "values": {"c1": "1/3", "c2": "1/3", "c3": "1/3"}}
    docs["pr_box.state"] = {"kind": "weight", "values": weight_to_doc(pr_box_weight())}
    docs["pr_box.joint"] = joint_to_doc(JointWeight(pr_box_weight(), PR_SQUARE, PR_SQUARE))
    docs["signalling_omega.joint"] = joint_to_doc(
        JointWeight(_joint(PR_SQUARE, PR_SQUARE, [("x", "x"), ("x", "u"), ("u", "x"), ("u", "v")]), PR_SQUARE, PR_SQUARE)
    )
    return docs


GOLDEN_COMMANDS = {
    "validate_square": ["validate", "square.model"],
    "df_enum_square": ["df-enum", "square.model"],
    "df_enum_triangle": ["df-enum", "triangle.model"],
    "vertices_triangle": ["vertices", "triangle.model"],
    "cover_triangle": ["cover", "triangle.model"],
    "borelify_square": ["borelify", "square.model"],
    "borelify_triangle": ["borelify", "triangle.model"],
    "decompose_square": ["decompose", "square.model", "--weight", "square_third_quarter.weight"],
    "morphism_check_g": ["morphism-check", "functor_g.morphism"],
    "morphism_check_split": ["morphism-check", "split_inclusion.morphism"],
    "morphism_check_support": ["morphism-check", "square_support.morphism", "--strict"],
    "pullback_g": ["pullback", "functor_g.morphism", "trit_uniform.weight"],
    "compose_explanations_triangle": [
        "compose-explanations",
        "triangle_by_cover.explanation",
        "triangle_cover_identity.explanation",
    ],
    "product_bit_square": ["product", "bit.model", "pr_square.model"],
    "ns_check_pr_box": ["ns-check", "pr_box.joint"],
    "ns_check_omega": ["ns-check", "signalling_omega.joint"],
    "separable_check_pr_box": ["separable-check", "pr_box.joint", "--parts", "pr_square.model", "pr_square.model"],
    "separable_check_state": ["separable-check", "pr_box.state", "--composite", "pr_square_minimal.composite"],
    "composite_flags_bosonic": ["composite-flags", "pr_square_bosonic.composite"],
    "bell_check_bit_bit": ["bell-check", "bit_bit.composite"],
    "bell_check_coarse_bit": ["bell-check", "coarse_bit.composite"],
    "bell_check_bit_pr_square": ["bell-check", "bit_pr_square.composite"],
    "pr_box": ["pr-box"],
}


def golden_output(directory: Path, argv: list[str]) -> tuple[str, int]:
    """Run one CLI command with ``directory`` as working directory; return stdout and status."""
    from .cli import main

    previous = os.getcwd()
    buffer = io.StringIO()
    try:
        os.chdir(directory)
        with contextlib.redirect_stdout(buffer):
            status = main(argv)
    finally:
        os.chdir(previous)
    return buffer.getvalue(), status


def write_fixture_files(directory: Path) -> None:
    """Write every fixture document and the golden CLI outputs under ``directory``."""
    from .serialize import dumps

    directory.mkdir(parents=True, exist_ok=True)
    for name, doc in fixture_documents().items():
        (directory / name).write_text(dumps(doc), encoding="utf-8")
    golden = directory / "golden"
    golden.mkdir(exist_ok=True)
    for name, argv in GOLDEN_COMMANDS.items():
        out, status = golden_output(directory, argv)
        (golden / f"{name}.json").write_text(out, encoding="utf-8")
        (golden / f"{name}.status").write_text(f"{status}\n", encoding="utf-8")

