"""Recipe executor: builds the 2-link families and assembles certificates.

The recipe runs over a knot family: surger each knot into the admissible
base along its first marked torus, fiber-sum the result with the group
block along the second, then perform the block's loop surgeries so the
belt spheres form the marked link.  The emitted report partitions every
certificate entry into COMPUTED (re-derivable arithmetic over records in
the report, each with a replayable trace) and TRUSTED (a cited classical
rule, fired only with machine-checked hypotheses that are themselves
COMPUTED entries).  `validate_certificate_partition` enforces that split;
it runs on every report before it leaves `run_recipe`.

Reports carry no timestamps and iterate in configuration order, so a
fixed configuration yields byte-identical output.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

from .groupring import GroupRingElement, equal_up_to_units, to_text as ring_to_text
from .grouppres import (
    GroupPresentation,
    pi1_Ng,
    recognize_free,
    recognize_surface,
)
from .knots import KnotRecord, braid_to_text, knot_from_spec
from .lattice import IntSymMatrix, indefinite_unimodular_iso, invariants
from .manifold import (
    ManifoldRecord,
    MarkedSubmanifold,
    admissible_from_spec,
    canonical_json,
    invariant_tuple,
    kodaira_thurston_block,
    product_T2_Sigma_g,
    record_to_json,
    simplifies_trivial,
    standard_block,
)
from .surgery import (
    SurgeryError,
    build_from_trace,
    connected_sum,
    dissolve_knot_surgery_after_stabilization,
    fiber_sum,
    knot_surgery,
    loop_surgery,
    mandelbaum_gompf_hypotheses,
    sphere_surgery,
)

REPORT_FORMAT = "exolink/report/v1"

CITE_SW_DISTINGUISHES = (
    "distinct Seiberg-Witten elements obstruct any smooth equivalence of the "
    "2-links: diffeomorphism invariance of the basic classes up to sign and "
    "conjugation (Witten; Taubes), knot-surgery product formula "
    "(Fintushel-Stern)"
)
CITE_AMBIENT_DIFFEO = (
    "invariant-level agreement upgrades to a diffeomorphism with the "
    "stabilized model: dissolution of knot-surgered pieces after loop "
    "surgeries (Akbulut; Auckly; Baykur) and stable classification of simply "
    "connected 4-manifolds (Wall)"
)
CITE_TOP_ISOTOPY = (
    "pairwise topological isotopy and componentwise topological unknotting "
    "of the links: topological classification of simply connected "
    "4-manifolds (Freedman), realization of form isomorphisms (Wall), "
    "topological isotopy of homeomorphisms (Quinn; Perron)"
)
CITE_SYMMETRY = (
    "ambient symmetry permuting the framed loop set: mapping classes of the "
    "base surface act by fiber-preserving diffeomorphisms of the block "
    "(Thurston; Lickorish)"
)
CITE_TWO_FRAMINGS = (
    "a framed loop in an orientable 4-manifold admits exactly two framings, "
    "pi_1(SO(3)) = Z/2 (Wallace; Milnor)"
)
CITE_MG_RULE = (
    "one stabilization turns the fiber sum into a connected sum with the "
    "pushoff-surgered block (Mandelbaum; Gompf; Moishezon decomposition)"
)
CITE_BRUNNIAN = (
    "sublinks of the stabilized families become smoothly equivalent, giving "
    "the Brunnian-type conclusion (Mandelbaum-Gompf rewriting plus the "
    "dissolution rule of Akbulut; Auckly; Baykur)"
)


class ConfigError(ValueError):
    """A recipe configuration violates its own invariants."""


class CertificateError(RuntimeError):
    """A COMPUTED certificate check failed; carries the completed report."""

    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class RecipeConfig:
    """Inputs to `run_recipe`, validated on construction."""

    spec_text: str
    group_kind: str  # "free" | "surface"
    genus: int
    knots: tuple[KnotRecord, ...]
    budget_tietze: int | None = None
    comparison_mode: str = "conjugation"  # "conjugation" | "strict"

    def __post_init__(self) -> None:
        if self.group_kind not in ("free", "surface"):
            raise ConfigError(f"group kind must be free or surface, got {self.group_kind!r}")
        if self.genus < 1:
            raise ConfigError(f"genus must be >= 1, got {self.genus}")
        if not self.knots:
            raise ConfigError("knot family is empty")
        first = self.knots[0]
        if first.alexander != GroupRingElement.one(first.alexander.nvars):
            raise ConfigError(
                "knot family must start with the unknot (Alexander polynomial 1); "
                f"first entry {first.name!r} has "
                f"{ring_to_text(first.alexander)}"
            )
        if self.comparison_mode not in ("conjugation", "strict"):
            raise ConfigError(
                f"comparison mode must be conjugation or strict, got {self.comparison_mode!r}"
            )
        names = [k.name for k in self.knots]
        if len(set(names)) != len(names):
            raise ConfigError("knot names must be distinct")

    @property
    def loop_count(self) -> int:
        return self.genus if self.group_kind == "free" else 2 * self.genus


def parse_group_arg(text: str) -> tuple[str, int]:
    """Parse "free:2" / "surface:1" into (kind, genus)."""
    kind, sep, g_text = text.partition(":")
    if not sep:
        raise ConfigError(f"group must look like free:G or surface:G, got {text!r}")
    try:
        genus = int(g_text)
    except ValueError as exc:
        raise ConfigError(f"bad genus {g_text!r}") from exc
    return kind.strip(), genus


def parse_knots_arg(text: str) -> tuple[KnotRecord, ...]:
    """Parse "twist:A..B" (or any `knot_from_spec` form) or "name=braid;..."."""
    text = text.strip()
    if "=" in text:
        records = []
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            name, sep, braid = chunk.partition("=")
            if not sep:
                raise ConfigError(f"bad knot entry {chunk!r}; expected name=braid")
            records.append(KnotRecord.from_braid(name.strip(), braid.strip()))
        if not records:
            raise ConfigError("explicit knot list is empty")
        return tuple(records)
    try:
        return knot_from_spec(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# -- report assembly helpers ------------------------------------------------------


class _Report:
    """Accumulates records, partition entries, and check outcomes."""

    def __init__(self, cfg: RecipeConfig, spec_data: dict):
        self.cfg = cfg
        self.data: dict = {
            "format": REPORT_FORMAT,
            "config": {
                "admissible_spec": spec_data,
                "group": f"{cfg.group_kind}:{cfg.genus}",
                "knots": [
                    {"name": k.name, "braid": braid_to_text(k.braid)}
                    for k in cfg.knots
                ],
                "budget_tietze": cfg.budget_tietze,
                "comparison_mode": cfg.comparison_mode,
            },
            "records": {},
            "certificates": {},
            "entries": [],
            "checks": [],
        }

    def add_record(self, name: str, record: ManifoldRecord) -> None:
        self.data["records"][name] = record_to_json(record)

    def add_entry(
        self,
        entry_id: str,
        status: str,
        claim: str,
        *,
        citation: str | None = None,
        hypotheses: tuple[str, ...] = (),
        rules: tuple[str, ...] = (),
        depends: tuple[str, ...] = (),
        records: tuple[str, ...] = (),
        data: dict | None = None,
    ) -> None:
        entry = {
            "id": entry_id,
            "status": status,
            "claim": claim,
            "depends": list(depends),
            "records": list(records),
        }
        if status == "TRUSTED":
            entry["citation"] = citation
            entry["hypotheses"] = list(hypotheses)
            entry["rules"] = list(rules)
        if data is not None:
            entry["data"] = data
        self.data["entries"].append(entry)

    def check(self, check_id: str, description: str, passed: bool) -> bool:
        self.data["checks"].append(
            {"id": check_id, "description": description, "pass": passed}
        )
        return passed


def validate_certificate_partition(report: dict) -> list[str]:
    """Schema-level soundness of the COMPUTED / TRUSTED split.

    COMPUTED entries may depend only on COMPUTED entries and must point at
    something re-derivable (a record with a trace, a dependency, or inline
    data).  TRUSTED entries must carry a citation, and every hypothesis
    they list must resolve to a COMPUTED entry; chained rules must resolve
    to TRUSTED entries.  Returns the violation list (empty means valid).
    """
    violations: list[str] = []
    entries = report.get("entries", [])
    by_id: dict[str, dict] = {}
    for entry in entries:
        eid = entry.get("id")
        if eid in by_id:
            violations.append(f"duplicate entry id {eid!r}")
        by_id[eid] = entry
    records = report.get("records", {})
    for entry in entries:
        eid, status = entry.get("id"), entry.get("status")
        if status not in ("COMPUTED", "TRUSTED"):
            violations.append(f"{eid}: unknown status {status!r}")
            continue
        for dep in entry.get("depends", []):
            target = by_id.get(dep)
            if target is None:
                violations.append(f"{eid}: depends on unknown entry {dep!r}")
            elif status == "COMPUTED" and target.get("status") != "COMPUTED":
                violations.append(
                    f"{eid}: COMPUTED entry depends on non-computed entry {dep!r}"
                )
        for name in entry.get("records", []):
            stored = records.get(name)
            if stored is None:
                violations.append(f"{eid}: references unknown record {name!r}")
            elif not stored.get("trace"):
                violations.append(f"{eid}: record {name!r} has no replayable trace")
        if status == "COMPUTED":
            if entry.get("citation"):
                violations.append(f"{eid}: COMPUTED entry carries a citation")
            if not (entry.get("records") or entry.get("depends") or "data" in entry):
                violations.append(f"{eid}: COMPUTED entry is not re-derivable")
        else:
            if not entry.get("citation"):
                violations.append(f"{eid}: TRUSTED entry lacks a citation")
            for hyp in entry.get("hypotheses", []):
                target = by_id.get(hyp)
                if target is None:
                    violations.append(f"{eid}: unknown hypothesis {hyp!r}")
                elif target.get("status") != "COMPUTED":
                    violations.append(
                        f"{eid}: hypothesis {hyp!r} is not a COMPUTED entry"
                    )
            for rule in entry.get("rules", []):
                target = by_id.get(rule)
                if target is None:
                    violations.append(f"{eid}: unknown rule {rule!r}")
                elif target.get("status") != "TRUSTED":
                    violations.append(f"{eid}: rule {rule!r} is not a TRUSTED entry")
    return violations


# -- the recipe --------------------------------------------------------------------


def _group_block(cfg: RecipeConfig) -> ManifoldRecord:
    if cfg.group_kind == "free":
        return kodaira_thurston_block(cfg.genus)
    return product_T2_Sigma_g(cfg.genus)


def _loop_labels(cfg: RecipeConfig) -> tuple[str, ...]:
    if cfg.group_kind == "free":
        return tuple(f"loop_b{i}" for i in range(1, cfg.genus + 1))
    a = tuple(f"loop_a{i}" for i in range(1, cfg.genus + 1))
    b = tuple(f"loop_b{i}" for i in range(1, cfg.genus + 1))
    return a + b


def run_recipe(cfg: RecipeConfig) -> dict:
    """Execute the construction over the knot family and certify the claims.

    Returns the completed report; raises CertificateError (which carries
    that same report) if any COMPUTED check fails, naming the failing
    clause and pair.
    """
    spec_data = json.loads(cfg.spec_text)
    base = admissible_from_spec(cfg.spec_text)
    roles = spec_data["admissible"]
    t1_label, t2_label = roles["T1"], roles["T2"]
    block = _group_block(cfg)
    loops = _loop_labels(cfg)
    rep = _Report(cfg, spec_data)
    rep.add_record("M", base)
    rep.add_record("B_G", block)
    rep.add_entry(
        "admissible_base",
        "COMPUTED",
        "the base record satisfies every admissibility clause",
        records=("M",),
        data=invariant_tuple(base),
    )

    z_records: dict[str, ManifoldRecord] = {}
    zstar_records: dict[str, ManifoldRecord] = {}
    links: dict[str, tuple[str, ...]] = {}
    for knot in cfg.knots:
        surgered = knot_surgery(base, t1_label, knot)
        z = fiber_sum(surgered, t2_label, block, "T")
        zs = z
        for label in loops:
            zs = loop_surgery(zs, label)
        z_records[knot.name] = z
        zstar_records[knot.name] = zs
        links[knot.name] = tuple(f"belt[{label}]" for label in loops)
        rep.add_record(f"Z[{knot.name}]", z)
        rep.add_record(f"Zstar[{knot.name}]", zs)
    rep.data["link_components"] = {k: list(v) for k, v in links.items()}

    _certify_link_group(rep, cfg, z_records)
    _certify_smooth_inequivalence(rep, cfg, z_records)
    ambient = _certify_ambient(rep, cfg, base, zstar_records)
    _certify_topological_isotopy(rep, cfg, base, zstar_records)
    _certify_surgery_consistency(rep, cfg, z_records, zstar_records, links)
    rep.data["certificates"]["symmetry"] = _symmetry_section(rep, cfg, block, zstar_records, loops)
    rep.data["certificates"]["brunnian"] = brunnian_certificate_section(
        rep, cfg, base, t2_label, z_records
    )

    partition = validate_certificate_partition(rep.data)
    rep.check(
        "partition",
        "certificate partition validates (computed never rests on a citation)",
        not partition,
    )
    if partition:
        rep.data["certificates"]["partition_violations"] = partition

    failed = [c for c in rep.data["checks"] if not c["pass"]]
    rep.data["verdict"] = "pass" if not failed else "fail"
    if failed:
        raise CertificateError(
            "; ".join(c["description"] for c in failed), rep.data
        )
    return rep.data


def _certify_link_group(rep: _Report, cfg: RecipeConfig, z_records) -> None:
    if cfg.group_kind == "free":
        expected = f"free group of rank {cfg.genus}"
    else:
        expected = f"genus-{cfg.genus} surface group"
    per_knot = {}
    for name, z in z_records.items():
        if cfg.group_kind == "free":
            rank = recognize_free(z.pi1, cfg.budget_tietze)
            ok = rank == cfg.genus
            per_knot[name] = {"recognized": ok, "rank": rank}
        else:
            ok = recognize_surface(z.pi1, cfg.genus, cfg.budget_tietze)
            per_knot[name] = {"recognized": ok}
        rep.check(
            f"link_group/{name}",
            f"2-link group of {name} recognized as the {expected}",
            ok,
        )
    rep.data["certificates"]["link_group"] = {
        "expected": expected,
        "per_knot": per_knot,
    }
    rep.add_entry(
        "link_group",
        "COMPUTED",
        f"every family member's 2-link group is recognized as the {expected}",
        records=tuple(f"Z[{n}]" for n in z_records),
        data={"expected": expected},
    )


def _certify_smooth_inequivalence(rep: _Report, cfg: RecipeConfig, z_records) -> None:
    names = list(z_records)
    pairs = {}
    for a, b in combinations(names, 2):
        sa, sb = z_records[a].sw, z_records[b].sw
        strict = equal_up_to_units(sa, sb, allow_inversion=False).equal
        conj = equal_up_to_units(sa, sb, allow_inversion=True).equal
        verdict_equal = conj if cfg.comparison_mode == "conjugation" else strict
        pairs[f"{a}|{b}"] = {
            "strict_equal": strict,
            "conjugation_equal": conj,
            "equal": verdict_equal,
        }
        rep.check(
            f"sw_distinct/{a}|{b}",
            f"sw elements of {a} and {b} differ up to units ({cfg.comparison_mode})",
            not verdict_equal,
        )
    rep.data["certificates"]["smooth_inequivalence"] = {
        "comparison_mode": cfg.comparison_mode,
        "pairs": pairs,
    }
    rep.add_entry(
        "sw_pairwise_distinct",
        "COMPUTED",
        "the tracked sw elements are pairwise distinct up to units",
        records=tuple(f"Z[{n}]" for n in names),
        data={"pair_count": len(pairs)},
    )
    rep.add_entry(
        "smooth_inequivalence",
        "TRUSTED",
        "the 2-links are pairwise smoothly inequivalent",
        citation=CITE_SW_DISTINGUISHES,
        hypotheses=("sw_pairwise_distinct",),
    )


def _certify_ambient(rep: _Report, cfg: RecipeConfig, base, zstar_records) -> ManifoldRecord:
    ambient = base
    for _ in range(cfg.loop_count):
        ambient = connected_sum(ambient, standard_block("S2xS2"))
    rep.add_record("ambient_reference", ambient)
    target = invariant_tuple(ambient)
    per_knot = {}
    all_ok = True
    for name, zs in zstar_records.items():
        tup = invariant_tuple(zs)
        same_tuple = tup == target
        form_iso = indefinite_unimodular_iso(zs.form, ambient.form)
        per_knot[name] = {
            "invariants": tup,
            "matches_reference": same_tuple,
            "form_isomorphic": form_iso,
        }
        ok = same_tuple and form_iso
        all_ok = all_ok and ok
        rep.check(
            f"ambient/{name}",
            f"Zstar[{name}] matches the stabilized reference at invariant level",
            ok,
        )
    rep.data["certificates"]["ambient"] = {
        "reference": target,
        "stabilizations": cfg.loop_count,
        "per_knot": per_knot,
    }
    rep.add_entry(
        "ambient_tuples_match",
        "COMPUTED",
        "every stabilized record matches the reference connected sum: equal "
        "invariant tuples and isomorphic indefinite unimodular forms",
        records=tuple(f"Zstar[{n}]" for n in zstar_records) + ("ambient_reference",),
        data={"reference": target},
    )
    rep.add_entry(
        "ambient_diffeomorphism",
        "TRUSTED",
        "the stabilized records are diffeomorphic to the reference connected sum",
        citation=CITE_AMBIENT_DIFFEO,
        hypotheses=("ambient_tuples_match",),
    )
    return ambient


def _certify_topological_isotopy(rep: _Report, cfg: RecipeConfig, base, zstar_records) -> None:
    trivial = {
        name: simplifies_trivial(zs.pi1, cfg.budget_tietze)
        for name, zs in zstar_records.items()
    }
    rep.check(
        "ambient_simply_connected",
        "every stabilized record's group simplifies to the trivial presentation",
        all(trivial.values()),
    )
    rep.add_entry(
        "ambient_simply_connected",
        "COMPUTED",
        "every stabilized record is certified simply connected",
        records=tuple(f"Zstar[{n}]" for n in zstar_records),
        data=trivial,
    )
    indefinite = {
        name: invariants(zs.form).indefinite for name, zs in zstar_records.items()
    }
    rep.check(
        "forms_indefinite",
        "every stabilized intersection form is indefinite",
        all(indefinite.values()),
    )
    rep.add_entry(
        "forms_indefinite",
        "COMPUTED",
        "every stabilized intersection form is indefinite, so form "
        "isomorphisms are realizable",
        records=tuple(f"Zstar[{n}]" for n in zstar_records),
        data=indefinite,
    )
    flags_ok = all(
        "complement_simply_connected" in base.mark(label).flags
        for label in (m.label for m in base.marks if m.kind == "torus")
    )
    rep.check(
        "fixture_complement_flags",
        "both base tori carry the simply-connected-complement flag",
        flags_ok,
    )
    rep.add_entry(
        "fixture_complement_flags",
        "COMPUTED",
        "the base record's marked tori carry simply connected complements",
        records=("M",),
        data={"ok": flags_ok},
    )
    rep.add_entry(
        "topological_isotopy",
        "TRUSTED",
        "the 2-links are pairwise topologically isotopic and componentwise "
        "topologically unknotted",
        citation=CITE_TOP_ISOTOPY,
        hypotheses=(
            "ambient_tuples_match",
            "ambient_simply_connected",
            "forms_indefinite",
            "fixture_complement_flags",
        ),
    )
    rep.data["certificates"]["topological_isotopy"] = {
        "citation": CITE_TOP_ISOTOPY,
        "computed_prerequisites": [
            "ambient_tuples_match",
            "ambient_simply_connected",
            "forms_indefinite",
            "fixture_complement_flags",
        ],
    }


def _certify_surgery_consistency(rep, cfg, z_records, zstar_records, links) -> None:
    per_knot = {}
    for name, zs in zstar_records.items():
        current = zs
        for sphere in links[name]:
            current = sphere_surgery(current, sphere)
        same = canonical_json(record_to_json(current)) == canonical_json(
            record_to_json(z_records[name])
        )
        per_knot[name] = same
        rep.check(
            f"surgery_consistency/{name}",
            f"surgering all of {name}'s link components reproduces Z[{name}] "
            "field for field",
            same,
        )
    rep.data["certificates"]["surgery_consistency"] = {"per_knot": per_knot}
    rep.add_entry(
        "surgery_consistency",
        "COMPUTED",
        "reversing every component's loop surgery reproduces the ancestor "
        "record byte for byte",
        records=tuple(f"Z[{n}]" for n in z_records)
        + tuple(f"Zstar[{n}]" for n in zstar_records),
        data={"per_knot": per_knot},
    )


def _symmetry_section(rep, cfg: RecipeConfig, block, zstar_records, loops) -> dict:
    framings = [block.mark(label).framing for label in loops]
    words = [block.mark(label).pi1_words for label in loops]
    single_generators = all(
        len(ws) == 1 and ws[0] in block.pi1.generators for ws in words
    )
    distinct = len(set(words)) == len(words)
    same_framing = len(set(framings)) <= 1
    belts_uniform = True
    for zs in zstar_records.values():
        belt_marks = [zs.mark(f"belt[{label}]") for label in loops]
        shapes = {
            (m.kind, m.framing, m.flags, m.homology_class) for m in belt_marks
        }
        belts_uniform = belts_uniform and len(shapes) == 1
    interchangeable = single_generators and distinct and same_framing and belts_uniform
    rep.check(
        "symmetry_relabeling",
        "the marked loops are interchangeable by relabeling the block's "
        "generators",
        interchangeable,
    )
    rep.add_entry(
        "symmetry_relabeling",
        "COMPUTED",
        "the block's loop marks share one framing tag and are distinct "
        "single generators, and all belt components are congruent",
        records=("B_G",) + tuple(f"Zstar[{n}]" for n in zstar_records),
        data={
            "framings": framings,
            "words": [list(w) for w in words],
            "belts_uniform": belts_uniform,
        },
    )
    rep.add_entry(
        "symmetry",
        "TRUSTED",
        "each family member is a smoothly symmetric 2-link",
        citation=CITE_SYMMETRY,
        hypotheses=("symmetry_relabeling",),
    )
    return {
        "interchangeable_by_relabeling": interchangeable,
        "citation": CITE_SYMMETRY,
    }


def brunnian_certificate_section(rep, cfg: RecipeConfig, base, t2_label, z_records) -> dict:
    """Assemble the Brunnian-type section of the report.

    For a surface group configuration the strong conclusion is not
    available and the section says so; for a free configuration it
    records the stabilization byte-identity, the rewrite-rule hypothesis
    branch, and the explicit pigeonhole over framing buckets.
    """
    if cfg.group_kind != "free":
        note = (
            "surface-group configuration: disregarding a pair of components "
            "yields smoothly equivalent sublinks, the weaker paired-component "
            "property only"
        )
        rep.add_entry(
            "brunnian_scope",
            "COMPUTED",
            "the Brunnian-type conclusion is restricted to free-group "
            "configurations; this run is a surface configuration",
            data={"group": f"{cfg.group_kind}:{cfg.genus}"},
        )
        return {"status": "weaker paired-component property only", "note": note}

    # stabilization clause: after one connected sum with S2xS2 the knot
    # surgery dissolves, and the result is one record independent of the knot
    stabilized_core: dict[str, str] = {}
    for name, z in z_records.items():
        stabilized = connected_sum(z, standard_block("S2xS2"))
        dissolved = dissolve_knot_surgery_after_stabilization(stabilized)
        core = {k: v for k, v in record_to_json(dissolved).items() if k != "trace"}
        stabilized_core[name] = canonical_json(core)
    names = list(stabilized_core)
    identical = len(set(stabilized_core.values())) == 1
    rep.check(
        "brunnian_stabilization",
        "one stabilization dissolves the knot surgery to a single record "
        "shared by every family member",
        identical,
    )
    rep.add_entry(
        "stabilization_dissolve",
        "COMPUTED",
        "connected sum with one S2xS2 followed by the dissolution rewrite "
        "yields byte-identical records (traces aside) for every knot",
        records=tuple(f"Z[{n}]" for n in names),
        data={"identical": identical},
    )

    try:
        branch, detail = mandelbaum_gompf_hypotheses(base, t2_label)
        mg = {"certified": True, "branch": branch, "detail": detail}
    except SurgeryError as exc:
        mg = {"certified": False, "blocked_by": str(exc)}
    rep.check(
        "brunnian_mg_hypotheses",
        "the fiber-sum-to-connected-sum rewrite hypotheses are certified on "
        "the base record",
        mg["certified"],
    )
    rep.add_entry(
        "mg_hypotheses",
        "COMPUTED",
        "the base record satisfies the rewrite rule's hypotheses "
        f"({mg.get('branch', 'uncertified')} branch)",
        records=("M",),
        data=mg,
    )
    rep.add_entry(
        "mg_rewrite_rule",
        "TRUSTED",
        "with those hypotheses, one stabilization rewrites the fiber sum as "
        "a connected sum with the pushoff-surgered block",
        citation=CITE_MG_RULE,
        hypotheses=("mg_hypotheses",),
    )
    rep.add_entry(
        "framing_two_per_loop",
        "TRUSTED",
        "each loop surgery has exactly two framings, so a pair of loop "
        "surgeries produces at most four diffeomorphism types",
        citation=CITE_TWO_FRAMINGS,
    )

    knot_count = len(cfg.knots)
    buckets = 4
    bound = math.ceil(knot_count / buckets)
    rep.add_entry(
        "brunnian_pigeonhole",
        "COMPUTED",
        f"pigeonhole over at most {buckets} framing buckets keeps a "
        f"subfamily of at least {bound} of the {knot_count} knots",
        data={"knots": knot_count, "buckets": buckets, "bound": bound},
    )
    rep.add_entry(
        "brunnian",
        "TRUSTED",
        "a subfamily of the stated size is pairwise Brunnianly exotic",
        citation=CITE_BRUNNIAN,
        hypotheses=(
            "stabilization_dissolve",
            "mg_hypotheses",
            "brunnian_pigeonhole",
            "symmetry_relabeling",
            "sw_pairwise_distinct",
        ),
        rules=("mg_rewrite_rule", "framing_two_per_loop", "smooth_inequivalence"),
    )
    return {
        "stabilization_identical": identical,
        "mg_hypotheses": mg,
        "framing_buckets": buckets,
        "family_size": knot_count,
        "subfamily_bound": bound,
        "note": (
            "framings are opaque tags, so equal tags do not certify equal "
            "framings; the bound is the worst case over the four buckets and "
            "sharper framing tracking could raise it to the full family"
        ),
    }


# -- block lemma suite --------------------------------------------------------------


def _zero_log_transform(m: ManifoldRecord, torus_label: str) -> ManifoldRecord:
    """Multiplicity-zero log transform along a marked Lagrangian torus.

    The regluing sends the meridian to the pushoff of the torus direction
    named by the mark's second word, so the group is quotiented by that
    word, the torus and its hyperbolic dual leave the second homology,
    and the Euler characteristic is unchanged.  Lemma-suite scaffolding:
    the result is rebuilt as a fresh record (no trace step), used only
    for invariant-level comparisons.
    """
    mark = m.mark(torus_label)
    if mark.kind != "torus" or mark.homology_class is None:
        raise SurgeryError(f"{torus_label!r} is not a marked homology torus")
    idx = mark.homology_class.index(1)
    partner = next(
        (j for j in range(m.form.n) if j != idx and m.form.entry(idx, j) != 0), None
    )
    if partner is None:
        raise SurgeryError(f"{torus_label!r} has no hyperbolic dual to remove")
    if len(mark.pi1_words) != 2:
        raise SurgeryError(f"{torus_label!r} does not carry its two directions")
    direction = m.pi1.word(mark.pi1_words[1])
    removed = {idx, partner}
    keep = [i for i in range(m.form.n) if i not in removed]
    rows = [[m.form.entry(i, j) for j in keep] for i in keep]
    marks = []
    for old in m.marks:
        if old.label == torus_label:
            continue
        cls = old.homology_class
        if cls is not None and any(cls[i] for i in removed):
            continue
        marks.append(
            MarkedSubmanifold(
                kind=old.kind,
                label=old.label,
                homology_class=None if cls is None else tuple(cls[i] for i in keep),
                pi1_words=old.pi1_words,
                framing=old.framing,
                flags=old.flags,
                complement=old.complement,
            )
        )
    return ManifoldRecord(
        name=f"{m.name}_L0[{torus_label}]",
        pi1=m.pi1.quotient_by_normal_closure([direction]),
        euler=m.euler,
        form=IntSymMatrix.from_rows(rows),
        basis=tuple(m.basis[i] for i in keep),
        sw=None,
        sw_reason="untracked (zero log transform)",
        rel_sw=(),
        marks=tuple(marks),
        flags=m.flags,
    )


def _tuple_check(name: str, left_label: str, left: dict, right_label: str, right: dict) -> dict:
    return {
        "name": name,
        "pass": left == right,
        left_label: left,
        right_label: right,
    }


def lemma_free_quotient(p: GroupPresentation, genus: int, budget: int | None = None) -> dict:
    """Check that killing x and y in the block group leaves a rank-g free group."""
    quotient = p.quotient_by_normal_closure([p.word("x"), p.word("y")])
    rank = recognize_free(quotient, budget)
    return {
        "name": f"free_quotient_g{genus}",
        "pass": rank == genus,
        "recognized_rank": rank,
        "expected_rank": genus,
    }


def verify_lemma_suite(gmax: int, budget: int | None = None) -> dict:
    """Invariant-level verification of the block identities for g = 1..gmax.

    Every compared tuple is recomputed from constructors and operations;
    no value is hand-entered.  Returns a report with per-check tuples;
    "pass" is the conjunction.
    """
    if gmax < 1:
        raise ConfigError(f"gmax must be >= 1, got {gmax}")
    checks: list[dict] = []
    t2xs2 = standard_block("T2xS2")

    def stabilized_reference(copies: int) -> ManifoldRecord:
        ref = t2xs2
        for _ in range(copies):
            ref = connected_sum(ref, standard_block("S2xS2"))
        return ref

    for g in range(1, gmax + 1):
        product = product_T2_Sigma_g(g)

        # zero log transforms along both Lagrangian directions of every
        # handle reduce the product block to T2 x S2
        bhat = product
        for i in range(1, g + 1):
            bhat = _zero_log_transform(bhat, f"xa{i}")
            bhat = _zero_log_transform(bhat, f"xb{i}")
        checks.append(
            _tuple_check(
                f"bhat_g{g}",
                "transformed",
                invariant_tuple(bhat),
                "reference",
                invariant_tuple(t2xs2),
            )
        )

        # direct route: loop surgeries along all 2g loops of the product,
        # compared with the connected sum rebuilt from standard blocks
        direct = product
        for i in range(1, g + 1):
            direct = loop_surgery(direct, f"loop_a{i}")
            direct = loop_surgery(direct, f"loop_b{i}")
        checks.append(
            _tuple_check(
                f"bstar_direct_g{g}",
                "surgered",
                invariant_tuple(direct),
                "reference",
                invariant_tuple(stabilized_reference(2 * g)),
            )
        )

        # Moishezon route: stabilize the transformed block 2g times with
        # certified nullhomotopic loops; must agree with the direct route
        moishezon = bhat
        for i in range(1, 2 * g + 1):
            moishezon = loop_surgery(
                moishezon, f"c{i}", word="1", nullhomotopic=True
            )
        checks.append(
            _tuple_check(
                f"bstar_moishezon_g{g}",
                "moishezon",
                invariant_tuple(moishezon),
                "direct",
                invariant_tuple(direct),
            )
        )

        # the free-group block: surger every b-loop out of N_g
        block = kodaira_thurston_block(g)
        nstar = block
        for i in range(1, g + 1):
            nstar = loop_surgery(nstar, f"loop_b{i}")
        checks.append(
            _tuple_check(
                f"nstar_g{g}",
                "surgered",
                invariant_tuple(nstar),
                "reference",
                invariant_tuple(stabilized_reference(g)),
            )
        )

        checks.append(lemma_free_quotient(pi1_Ng(g), g, budget))

        # iterated fiber sum of g copies of the g=1 block matches the
        # direct constructor, tracked invariants and sw alike
        iterated = kodaira_thurston_block(1)
        for _ in range(g - 1):
            iterated = fiber_sum(iterated, "T", kodaira_thurston_block(1), "T")
        same_form = iterated.form.rows == block.form.rows
        same_sw = iterated.sw == block.sw
        checks.append(
            {
                "name": f"iterated_fiber_sum_g{g}",
                "pass": invariant_tuple(iterated) == invariant_tuple(block)
                and same_form
                and same_sw,
                "iterated": invariant_tuple(iterated),
                "reference": invariant_tuple(block),
                "same_form": same_form,
                "same_sw": same_sw,
            }
        )

    return {
        "format": "exolink/lemma-report/v1",
        "gmax": gmax,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


# -- trace verification ---------------------------------------------------------------


def verify_trace_report(report: dict, step: int | None = None) -> dict:
    """Replay every record trace in a report.

    Full replay (default) compares the rebuilt record byte for byte with
    the stored one.  With ``step`` = k, only the first k steps are
    replayed (clamped to each record's trace length) and the
    intermediate invariants are reported; no byte comparison is possible
    mid-trace.
    """
    if step is not None and step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    results = {}
    for name in sorted(report.get("records", {})):
        stored = report["records"][name]
        trace = stored.get("trace", [])
        entry: dict = {"steps": len(trace)}
        try:
            if step is None:
                rebuilt = build_from_trace(trace)
                entry["identical"] = canonical_json(record_to_json(rebuilt)) == canonical_json(stored)
            else:
                upto = min(step, len(trace))
                partial = build_from_trace(trace[:upto])
                entry["replayed_steps"] = upto
                entry["invariants"] = invariant_tuple(partial)
        except (ValueError, KeyError, SurgeryError) as exc:
            entry["error"] = str(exc)
            entry["identical"] = False
        results[name] = entry
    ok = all(
        e.get("identical", True) and "error" not in e for e in results.values()
    )
    return {"format": "exolink/trace-report/v1", "records": results, "pass": ok}
