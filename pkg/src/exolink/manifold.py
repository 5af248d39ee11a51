"""Symbolic records of closed oriented smooth 4-manifolds.

A record tracks exactly the data the surgery calculus transforms: a finite
presentation of the fundamental group, the Euler characteristic, the
intersection Gram matrix over a labeled basis of H_2, an optional
Seiberg-Witten element of the group ring Z[H_2] with relative factors
attached to marked square-zero tori, and the marked submanifolds (tori,
loops, sphere-link components) that later operations cut along.

Records are immutable; every constructor seeds a replayable provenance
trace and every surgery appends one step, so any record can be rebuilt
from its trace and compared field for field.

The closed-manifold bookkeeping identity chi = 2 - 2*b1 + b2 (Poincare
duality with b3 = b1, b0 = b4 = 1) is enforced at construction time, which
is what catches most bookkeeping mistakes in the surgery rules.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .groupring import GroupRingElement, from_text as ring_from_text, to_text as ring_to_text
from .grouppres import (
    GroupPresentation,
    pi1_Ng,
    pi1_product_surface,
    pi1_Z,
    pi1_Z2,
    tietze_simplify,
    trivial_presentation,
    word_to_text,
)
from .lattice import (
    IntSymMatrix,
    admissible_check,
    direct_sum,
    hyperbolic_pair,
    invariants,
)

FORMAT_SPEC = "exolink/manifold-spec/v1"
FORMAT_RECORD = "exolink/manifold-record/v1"

MARK_KINDS = ("torus", "loop", "sphere_link_component")


def unit_vector(n: int, i: int) -> tuple[int, ...]:
    if not 0 <= i < n:
        raise ValueError(f"basis index {i} out of range for rank {n}")
    return tuple(1 if j == i else 0 for j in range(n))


def u_factor(nvars: int, torus_class: tuple[int, ...]) -> GroupRingElement:
    """The unit-difference factor t^-[T] - t^[T] for a square-zero torus.

    This is the factor the torus contributes to relative Seiberg-Witten
    data under the gluing rule; it vanishes identically for a
    nullhomologous class, which is why that case is refused.
    """
    if len(torus_class) != nvars:
        raise ValueError("torus class length does not match the basis rank")
    if not any(torus_class):
        raise ValueError("torus class is nullhomologous; no relative factor")
    neg = tuple(-c for c in torus_class)
    return GroupRingElement.from_terms(nvars, {neg: 1, tuple(torus_class): -1})


@dataclass(frozen=True)
class MarkedSubmanifold:
    """A tracked torus, loop, or sphere-link component inside a record.

    ``homology_class`` is a coordinate vector in the record's H_2 basis
    (None for loops and for nullhomologous spheres).  ``pi1_words`` are
    texts in the ambient fundamental-group generators: two words spanning a
    torus, one free-homotopy word for a loop, none for spheres.  ``framing``
    is an opaque tag; equal tags mean equal framings, nothing more.
    ``complement`` optionally carries a presentation of the fundamental
    group of the complement of a torus together with its meridian word, for
    gluings where that model is known exactly.
    """

    kind: str
    label: str
    homology_class: tuple[int, ...] | None
    pi1_words: tuple[str, ...] = ()
    framing: str = "product"
    flags: frozenset[str] = frozenset()
    complement: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if self.kind not in MARK_KINDS:
            raise ValueError(f"unknown mark kind {self.kind!r}")
        if self.kind == "loop" and len(self.pi1_words) != 1:
            raise ValueError(f"loop mark {self.label!r} needs exactly one word")
        if self.kind == "torus" and len(self.pi1_words) not in (0, 2):
            raise ValueError(
                f"torus mark {self.label!r} needs zero or two spanning words"
            )
        if self.kind == "sphere_link_component":
            if self.pi1_words:
                raise ValueError(f"sphere mark {self.label!r} carries no words")
            if "trivial_normal_bundle" not in self.flags:
                raise ValueError(
                    f"sphere mark {self.label!r} must carry trivial_normal_bundle"
                )
        if self.kind == "loop" and self.homology_class is not None:
            raise ValueError(f"loop mark {self.label!r} carries no homology class")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "class": None if self.homology_class is None else list(self.homology_class),
            "pi1_words": list(self.pi1_words),
            "framing": self.framing,
            "flags": sorted(self.flags),
            "complement": None if self.complement is None else list(self.complement),
        }

    @classmethod
    def from_json(cls, data: dict) -> "MarkedSubmanifold":
        cls_field = data.get("class")
        complement = data.get("complement")
        return cls(
            kind=data["kind"],
            label=data["label"],
            homology_class=None if cls_field is None else tuple(cls_field),
            pi1_words=tuple(data.get("pi1_words", ())),
            framing=data.get("framing", "product"),
            flags=frozenset(data.get("flags", ())),
            complement=None if complement is None else (complement[0], complement[1]),
        )


@dataclass(frozen=True)
class ManifoldRecord:
    """A closed oriented smooth 4-manifold as tracked invariants plus marks."""

    name: str
    pi1: GroupPresentation
    euler: int
    form: IntSymMatrix
    basis: tuple[str, ...]
    sw: GroupRingElement | None
    sw_reason: str
    rel_sw: tuple[tuple[str, GroupRingElement], ...]
    marks: tuple[MarkedSubmanifold, ...]
    flags: frozenset[str] = frozenset()
    trace: tuple[dict, ...] = ()

    def __post_init__(self) -> None:
        b2 = self.form.n
        if len(self.basis) != b2:
            raise ValueError("basis labels do not match the form rank")
        if len(set(self.basis)) != b2:
            raise ValueError("basis labels must be distinct")
        b1 = self.b1
        if self.euler != 2 - 2 * b1 + b2:
            raise ValueError(
                f"{self.name}: chi = {self.euler} but 2 - 2*b1 + b2 = "
                f"{2 - 2 * b1 + b2} (b1 = {b1}, b2 = {b2})"
            )
        if self.sw is None:
            if not self.sw_reason:
                raise ValueError("untracked sw needs a reason")
        elif self.sw.nvars != b2:
            raise ValueError("sw exponent vectors must match the H_2 basis rank")
        labels = [m.label for m in self.marks]
        if len(set(labels)) != len(labels):
            raise ValueError("mark labels must be distinct")
        by_label = {m.label: m for m in self.marks}
        for mark in self.marks:
            if mark.homology_class is not None and len(mark.homology_class) != b2:
                raise ValueError(
                    f"mark {mark.label!r} class length does not match basis"
                )
            if (
                mark.kind == "torus"
                and "self_intersection_zero" in mark.flags
                and mark.homology_class is not None
                and self.form.pair(mark.homology_class, mark.homology_class) != 0
            ):
                raise ValueError(
                    f"torus mark {mark.label!r} flagged square-zero but Q(c,c) != 0"
                )
            for text in mark.pi1_words:
                self.pi1.word(text)
        seen = set()
        for label, factor in self.rel_sw:
            if label in seen:
                raise ValueError(f"duplicate relative factor for {label!r}")
            seen.add(label)
            mark = by_label.get(label)
            if mark is None or mark.kind != "torus":
                raise ValueError(f"relative factor {label!r} is not a marked torus")
            if factor.nvars != b2:
                raise ValueError("relative factor lives in the wrong group ring")
            if self.sw is not None and mark.homology_class is not None:
                expected = self.sw * u_factor(b2, mark.homology_class)
                if factor != expected:
                    raise ValueError(
                        f"relative factor for {label!r} disagrees with sw"
                    )

    @property
    def b1(self) -> int:
        return self.pi1.abelianization()[0]

    @property
    def b2(self) -> int:
        return self.form.n

    @property
    def signature(self) -> int:
        return invariants(self.form).signature

    @property
    def parity(self) -> str:
        return "even" if self.form.is_even() else "odd"

    def mark(self, label: str) -> MarkedSubmanifold:
        for m in self.marks:
            if m.label == label:
                return m
        raise KeyError(f"no mark labeled {label!r} in {self.name}")

    def rel_sw_map(self) -> dict[str, GroupRingElement]:
        return dict(self.rel_sw)

    def self_intersection(self, label: str) -> int:
        mark = self.mark(label)
        if mark.homology_class is None:
            return 0
        return self.form.pair(mark.homology_class, mark.homology_class)


def invariant_tuple(record: ManifoldRecord) -> dict:
    """The comparison tuple used for homeomorphism-type style agreement."""
    free, torsion = record.pi1.abelianization()
    return {
        "euler": record.euler,
        "b1": record.b1,
        "b2": record.b2,
        "signature": record.signature,
        "parity": record.parity,
        "pi1_free_rank": free,
        "pi1_torsion": list(torsion),
    }


def simplifies_trivial(p: GroupPresentation, budget: int | None = None) -> bool:
    simplified, _ = tietze_simplify(p, budget)
    return not simplified.generators and not simplified.relators


# -- serialization ---------------------------------------------------------------


def canonical_json(obj) -> str:
    """Deterministic rendering used for reports and field-for-field equality."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": "))


def record_to_json(record: ManifoldRecord) -> dict:
    return {
        "format": FORMAT_RECORD,
        "name": record.name,
        "euler": record.euler,
        "pi1": record.pi1.to_text(),
        "basis": list(record.basis),
        "gram": [list(row) for row in record.form.rows],
        "sw": None if record.sw is None else ring_to_text(record.sw),
        "sw_reason": record.sw_reason,
        "rel_sw": {label: ring_to_text(f) for label, f in record.rel_sw},
        "marks": [m.to_json() for m in record.marks],
        "flags": sorted(record.flags),
        "trace": [dict(step) for step in record.trace],
    }


def record_from_json(data: dict) -> ManifoldRecord:
    if data.get("format") != FORMAT_RECORD:
        raise ValueError(f"not a {FORMAT_RECORD} document")
    basis = tuple(data["basis"])
    b2 = len(basis)
    sw = None if data["sw"] is None else ring_from_text(data["sw"], b2)
    rel = tuple(
        sorted(
            (label, ring_from_text(text, b2))
            for label, text in data.get("rel_sw", {}).items()
        )
    )
    return ManifoldRecord(
        name=data["name"],
        pi1=GroupPresentation.parse(data["pi1"]),
        euler=data["euler"],
        form=IntSymMatrix.from_rows(data["gram"]),
        basis=basis,
        sw=sw,
        sw_reason=data["sw_reason"],
        rel_sw=rel,
        marks=tuple(MarkedSubmanifold.from_json(m) for m in data["marks"]),
        flags=frozenset(data.get("flags", ())),
        trace=tuple(data.get("trace", ())),
    )


# -- standard blocks -------------------------------------------------------------


def standard_block(name: str) -> ManifoldRecord:
    """The small closed blocks the calculus keeps on the shelf.

    S4, S2xS2, the twisted bundle S2xS2_twisted (odd form), T2xS2 with its
    marked product torus, and S1xS3.
    """
    trace = ({"op": "base", "constructor": "standard_block", "args": {"name": name}},)
    untracked = "untracked (standard block)"
    if name == "S4":
        return ManifoldRecord(
            name="S4",
            pi1=trivial_presentation(),
            euler=2,
            form=IntSymMatrix.empty(),
            basis=(),
            sw=None,
            sw_reason=untracked,
            rel_sw=(),
            marks=(),
            trace=trace,
        )
    if name == "S2xS2":
        return ManifoldRecord(
            name="S2xS2",
            pi1=trivial_presentation(),
            euler=4,
            form=hyperbolic_pair(),
            basis=("Sa", "Sb"),
            sw=None,
            sw_reason=untracked,
            rel_sw=(),
            marks=(),
            trace=trace,
        )
    if name == "S2xS2_twisted":
        return ManifoldRecord(
            name="S2xS2_twisted",
            pi1=trivial_presentation(),
            euler=4,
            form=IntSymMatrix.diagonal((1, -1)),
            basis=("Ca", "Cb"),
            sw=None,
            sw_reason=untracked,
            rel_sw=(),
            marks=(),
            trace=trace,
        )
    if name == "T2xS2":
        complement = ("gens: x, y; rels: [x, y]", "1")
        torus = MarkedSubmanifold(
            kind="torus",
            label="T",
            homology_class=(1, 0),
            pi1_words=("x", "y"),
            framing="product",
            flags=frozenset({"self_intersection_zero"}),
            complement=complement,
        )
        return ManifoldRecord(
            name="T2xS2",
            pi1=pi1_Z2(),
            euler=0,
            form=hyperbolic_pair(),
            basis=("T", "S"),
            sw=None,
            sw_reason=untracked,
            rel_sw=(),
            marks=(torus,),
            trace=trace,
        )
    if name == "S1xS3":
        return ManifoldRecord(
            name="S1xS3",
            pi1=pi1_Z(),
            euler=0,
            form=IntSymMatrix.empty(),
            basis=(),
            sw=None,
            sw_reason=untracked,
            rel_sw=(),
            marks=(),
            trace=trace,
        )
    raise ValueError(f"unknown standard block {name!r}")


def product_T2_Sigma_g(g: int) -> ManifoldRecord:
    """The product of the torus with a genus-g surface, fully marked.

    H_2 has rank 4g + 2 in the product basis: the fiber torus T, the
    surface S, and for each handle the four mixed classes.  The closed
    Seiberg-Witten element is (t^-1 - t)^(2g-2) in the variable of [T],
    with relative factor (t^-1 - t)^(2g-1) attached to T for the gluing
    rule; the exponent bookkeeping of those two seeds is exactly what the
    fiber-sum composition test pins down.
    """
    if g < 1:
        raise ValueError("g must be >= 1")
    basis: list[str] = ["T", "S"]
    for i in range(1, g + 1):
        basis.extend((f"xa{i}", f"yb{i}", f"xb{i}", f"ya{i}"))
    b2 = len(basis)
    form = direct_sum(*([hyperbolic_pair()] * (2 * g + 1)))
    u = u_factor(b2, unit_vector(b2, 0))
    sw = u ** (2 * g - 2)
    pi1 = pi1_product_surface(g)
    complement_pres = GroupPresentation(pi1.generators, pi1.relators[:-1])
    meridian = word_to_text(pi1.relators[-1], pi1.generators)
    marks: list[MarkedSubmanifold] = [
        MarkedSubmanifold(
            kind="torus",
            label="T",
            homology_class=unit_vector(b2, 0),
            pi1_words=("x", "y"),
            framing="product",
            flags=frozenset({"self_intersection_zero", "symplectic"}),
            complement=(complement_pres.to_text(), meridian),
        )
    ]
    for i in range(1, g + 1):
        base = 2 + 4 * (i - 1)
        for offset, label, words in (
            (0, f"xa{i}", ("x", f"a{i}")),
            (2, f"xb{i}", ("x", f"b{i}")),
            (3, f"ya{i}", ("y", f"a{i}")),
        ):
            marks.append(
                MarkedSubmanifold(
                    kind="torus",
                    label=label,
                    homology_class=unit_vector(b2, base + offset),
                    pi1_words=words,
                    framing="lagrangian",
                    flags=frozenset({"self_intersection_zero", "lagrangian"}),
                )
            )
    for i in range(1, g + 1):
        marks.append(
            MarkedSubmanifold(
                kind="loop",
                label=f"loop_a{i}",
                homology_class=None,
                pi1_words=(f"a{i}",),
                framing="product",
            )
        )
        marks.append(
            MarkedSubmanifold(
                kind="loop",
                label=f"loop_b{i}",
                homology_class=None,
                pi1_words=(f"b{i}",),
                framing="product",
            )
        )
    return ManifoldRecord(
        name=f"T2xSigma{g}",
        pi1=pi1,
        euler=0,
        form=form,
        basis=tuple(basis),
        sw=sw,
        sw_reason="tracked",
        rel_sw=(("T", sw * u),),
        marks=tuple(marks),
        trace=(
            {"op": "base", "constructor": "product_T2_Sigma_g", "args": {"g": g}},
        ),
    )


def kodaira_thurston_block(g: int) -> ManifoldRecord:
    """The twisted counterpart of the product block, with free-quotient pi1.

    The fundamental group is the circle-times-mapping-torus group whose
    quotient by the two torus directions x, y is free of rank g.  H_2 has
    rank 2g + 2: the symplectic torus T = x x y with a dual F, and one
    hyperbolic pair of Lagrangian classes per handle.  Seiberg-Witten
    seeds match the product block: (t^-1 - t)^(2g-2) closed, relative
    factor (t^-1 - t)^(2g-1) on T, so iterated fiber sums of the g = 1
    block reproduce the g > 1 blocks at the tracked-invariant level.
    """
    if g < 1:
        raise ValueError("g must be >= 1")
    basis: list[str] = ["T", "F"]
    for i in range(1, g + 1):
        basis.extend((f"xb{i}", f"ya{i}"))
    b2 = len(basis)
    form = direct_sum(*([hyperbolic_pair()] * (g + 1)))
    u = u_factor(b2, unit_vector(b2, 0))
    sw = u ** (2 * g - 2)
    marks: list[MarkedSubmanifold] = [
        MarkedSubmanifold(
            kind="torus",
            label="T",
            homology_class=unit_vector(b2, 0),
            pi1_words=("x", "y"),
            framing="symplectic",
            flags=frozenset({"self_intersection_zero", "symplectic"}),
        )
    ]
    for i in range(1, g + 1):
        marks.append(
            MarkedSubmanifold(
                kind="torus",
                label=f"xb{i}",
                homology_class=unit_vector(b2, 2 + 2 * (i - 1)),
                pi1_words=("x", f"b{i}"),
                framing="lagrangian",
                flags=frozenset({"self_intersection_zero", "lagrangian"}),
            )
        )
    for i in range(1, g + 1):
        marks.append(
            MarkedSubmanifold(
                kind="loop",
                label=f"loop_b{i}",
                homology_class=None,
                pi1_words=(f"b{i}",),
                framing="lagrangian",
            )
        )
    return ManifoldRecord(
        name=f"N{g}",
        pi1=pi1_Ng(g),
        euler=0,
        form=form,
        basis=tuple(basis),
        sw=sw,
        sw_reason="tracked",
        rel_sw=(("T", sw * u),),
        marks=tuple(marks),
        trace=(
            {
                "op": "base",
                "constructor": "kodaira_thurston_block",
                "args": {"g": g},
            },
        ),
    )


# -- admissible input manifolds --------------------------------------------------


class AdmissibilityError(ValueError):
    """Raised with the full list of failed admissibility clauses."""

    def __init__(self, violations: list[str]):
        self.violations = tuple(violations)
        super().__init__("; ".join(violations))


def admissible_from_spec(spec_text: str) -> ManifoldRecord:
    """Validate a manifold spec document and build its record.

    The document must supply a fundamental group that simplifies to the
    trivial presentation, a unimodular indefinite Gram matrix with two
    marked square-zero tori in hyperbolic position (each with a dual, all
    cross pairings zero), simply-connected-complement flags on both tori,
    a nonzero Seiberg-Witten element, and rank >= |signature| + 4.  Every
    failed clause is reported, not just the first.
    """
    try:
        data = json.loads(spec_text)
    except json.JSONDecodeError as exc:
        raise AdmissibilityError([f"spec is not valid JSON: {exc}"]) from exc
    if data.get("format") != FORMAT_SPEC:
        raise AdmissibilityError(
            [f"spec format must be {FORMAT_SPEC!r}, got {data.get('format')!r}"]
        )
    violations: list[str] = []
    try:
        basis = tuple(str(b) for b in data["basis"])
        form = IntSymMatrix.from_rows(data["gram"])
        euler = int(data["euler"])
        pi1 = GroupPresentation.parse(data["pi1"])
        marks = tuple(MarkedSubmanifold.from_json(m) for m in data["marks"])
        roles = {str(k): str(v) for k, v in data["admissible"].items()}
        name = str(data.get("name", "M"))
    except (KeyError, ValueError, TypeError) as exc:
        raise AdmissibilityError([f"malformed spec: {exc}"]) from exc
    if len(basis) != form.n:
        raise AdmissibilityError(["basis labels do not match the Gram rank"])
    try:
        sw = ring_from_text(data["sw"], form.n)
    except (KeyError, ValueError) as exc:
        raise AdmissibilityError([f"malformed sw element: {exc}"]) from exc

    if not simplifies_trivial(pi1):
        violations.append("pi1 does not simplify to the trivial presentation")
    if sw.is_zero:
        violations.append("no basic class (sw = 0)")

    indices: dict[str, int] = {}
    for role in ("T1", "S1", "T2", "S2"):
        label = roles.get(role)
        if label is None or label not in basis:
            violations.append(f"admissible role {role} missing or not a basis label")
        else:
            indices[role] = basis.index(label)
    if len(indices) == 4:
        report = admissible_check(form, indices)
        violations.extend(report.violations)

    mark_by_label = {m.label: m for m in marks}
    for role in ("T1", "T2"):
        label = roles.get(role)
        mark = mark_by_label.get(label) if label else None
        if mark is None or mark.kind != "torus":
            violations.append(f"no torus mark for admissible role {role}")
            continue
        if "complement_simply_connected" not in mark.flags:
            violations.append(f"torus {label} lacks complement_simply_connected")
        if role in indices and mark.homology_class != unit_vector(
            form.n, indices[role]
        ):
            violations.append(
                f"torus {label} class must be the {role} basis vector"
            )
    free_rank, torsion = pi1.abelianization()
    if free_rank or torsion:
        violations.append("pi1 abelianization is nontrivial")
    if euler != 2 + form.n:
        violations.append(
            f"Euler characteristic {euler} != 2 + b2 = {2 + form.n} "
            "for a simply connected record"
        )
    if violations:
        raise AdmissibilityError(violations)

    rel: list[tuple[str, GroupRingElement]] = []
    for role in ("T1", "T2"):
        mark = mark_by_label[roles[role]]
        assert mark.homology_class is not None
        rel.append((mark.label, sw * u_factor(form.n, mark.homology_class)))
    return ManifoldRecord(
        name=name,
        pi1=pi1,
        euler=euler,
        form=form,
        basis=basis,
        sw=sw,
        sw_reason="tracked",
        rel_sw=tuple(sorted(rel)),
        marks=marks,
        trace=(
            {"op": "base", "constructor": "admissible_from_spec", "args": {"spec": data}},
        ),
    )


BASE_CONSTRUCTORS = {
    "standard_block": lambda args: standard_block(args["name"]),
    "product_T2_Sigma_g": lambda args: product_T2_Sigma_g(args["g"]),
    "kodaira_thurston_block": lambda args: kodaira_thurston_block(args["g"]),
    "admissible_from_spec": lambda args: admissible_from_spec(
        json.dumps(args["spec"])
    ),
}
