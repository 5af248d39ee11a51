"""Built-in admissible manifold spec documents for tests and CLI examples.

Two documents share the marked-pair pattern (two disjoint square-zero tori
in hyperbolic position, simply connected complements, trivial group,
nonzero Seiberg-Witten element "1"):

* the even one carries the K3 invariants (chi 24, signature -16, Gram
  3H + 2(-E8)), the classical home of this construction;
* the odd one carries 2H + <1> + 3<-1> (chi 10, signature -2) and exists
  to exercise the non-spin witness branch of the bookkeeping.

Both are data-level exemplars: the validator checks exactly the listed
clauses, nothing more.
"""
from __future__ import annotations

import json

from .lattice import IntSymMatrix, direct_sum, e8_gram, hyperbolic_pair, negate
from .manifold import FORMAT_SPEC


def _torus_mark(label: str, index: int, rank: int) -> dict:
    cls = [0] * rank
    cls[index] = 1
    return {
        "kind": "torus",
        "label": label,
        "class": cls,
        "pi1_words": [],
        "framing": "product",
        "flags": ["complement_simply_connected", "self_intersection_zero"],
    }


def _spec(name: str, basis: list[str], form: IntSymMatrix) -> dict:
    return {
        "format": FORMAT_SPEC,
        "name": name,
        "euler": 2 + form.n,
        "pi1": "gens: ; rels: ",
        "basis": basis,
        "gram": [list(row) for row in form.rows],
        "sw": "1",
        "marks": [_torus_mark("T1", 0, form.n), _torus_mark("T2", 2, form.n)],
        "admissible": {"T1": "T1", "S1": "S1", "T2": "T2", "S2": "S2"},
    }


def even_spec() -> dict:
    form = direct_sum(
        hyperbolic_pair(),
        hyperbolic_pair(),
        hyperbolic_pair(),
        negate(e8_gram()),
        negate(e8_gram()),
    )
    basis = ["T1", "S1", "T2", "S2", "A", "B"] + [f"E{i}" for i in range(1, 17)]
    return _spec("M_even", basis, form)


def odd_spec() -> dict:
    form = direct_sum(
        hyperbolic_pair(),
        hyperbolic_pair(),
        IntSymMatrix.diagonal((1, -1, -1, -1)),
    )
    basis = ["T1", "S1", "T2", "S2", "C1", "C2", "C3", "C4"]
    return _spec("M_odd", basis, form)


def spec_text(which: str) -> str:
    """Canonical JSON text of a built-in spec ("even" or "odd")."""
    builders = {"even": even_spec, "odd": odd_spec}
    if which not in builders:
        raise ValueError(f"unknown fixture {which!r}; choose from {sorted(builders)}")
    return json.dumps(builders[which](), sort_keys=True, indent=2) + "\n"
