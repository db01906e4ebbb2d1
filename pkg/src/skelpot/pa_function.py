"""Continuous piecewise-affine functions on a metric graph and their
discrete Laplacian measure (sum of outgoing slopes at each point).

Everything here is exact: profiles, slopes, masses, and pairings are
Fractions, so all identities (total mass zero, pairing symmetry,
linearity) are tested with exact equality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .graph import (EdgePoint, GraphError, GraphPoint, MetricGraph,
                    TangentDirection, Vertex, point_from_json, point_sort_key,
                    point_to_json)
from .rational import format_rational, parse_rational

Profile = tuple[tuple[Fraction, Fraction], ...]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported signed measure; support canonically ordered,
    zero masses dropped."""

    support: tuple[tuple[GraphPoint, Fraction], ...]

    @classmethod
    def of(cls, pairs) -> "DiscreteMeasure":
        acc: dict[GraphPoint, Fraction] = {}
        for p, m in pairs:
            acc[p] = acc.get(p, Fraction(0)) + m
        items = [(p, m) for p, m in acc.items() if m != 0]
        items.sort(key=lambda pm: point_sort_key(pm[0]))
        return cls(tuple(items))

    def mass_at(self, p: GraphPoint) -> Fraction:
        for q, m in self.support:
            if q == p:
                return m
        return Fraction(0)

    def total_mass(self) -> Fraction:
        return sum((m for _, m in self.support), Fraction(0))

    def total_variation(self) -> Fraction:
        return sum((abs(m) for _, m in self.support), Fraction(0))

    def restrict(self, keep) -> "DiscreteMeasure":
        return DiscreteMeasure.of((p, m) for p, m in self.support if keep(p))

    def scale(self, c: Fraction) -> "DiscreteMeasure":
        return DiscreteMeasure.of((p, c * m) for p, m in self.support)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure.of(list(self.support) + list(other.support))

    def to_json_list(self) -> list:
        return [{"at": point_to_json(p), "mass": format_rational(m)}
                for p, m in self.support]

    @classmethod
    def from_json_list(cls, lst) -> "DiscreteMeasure":
        return cls.of((point_from_json(d["at"]), parse_rational(d["mass"]))
                      for d in lst)


@dataclass(frozen=True)
class SlopeVerdict:
    ok: bool
    witnesses: tuple[tuple[GraphPoint, Fraction], ...]


class PAFunction:
    """Continuous piecewise-affine function, one breakpoint profile per edge.

    Profiles run from offset 0 (value at u) to offset = length (value at v);
    the function is affine between consecutive breakpoints.
    """

    def __init__(self, graph: MetricGraph, profiles: dict):
        self.graph = graph
        norm: dict[str, Profile] = {}
        for e in graph.edges:
            if e.id not in profiles:
                raise GraphError(f"missing profile for edge {e.id}")
            prof = tuple((Fraction(o), Fraction(v)) for o, v in profiles[e.id])
            if len(prof) < 2 or prof[0][0] != 0 or prof[-1][0] != e.length:
                raise GraphError(
                    f"edge {e.id}: profile must span offsets 0..{e.length}")
            for (o1, _), (o2, _) in zip(prof, prof[1:]):
                if o2 <= o1:
                    raise GraphError(f"edge {e.id}: offsets not increasing")
            norm[e.id] = prof
        extra = set(profiles) - {e.id for e in graph.edges}
        if extra:
            raise GraphError(f"profiles for unknown edges {sorted(extra)}")
        self.profiles = norm
        self._vertex_values = self._check_continuity()

    def _check_continuity(self) -> dict[str, Fraction]:
        values: dict[str, Fraction] = {}
        for e in self.graph.edges:
            prof = self.profiles[e.id]
            for vid, val in ((e.u, prof[0][1]), (e.v, prof[-1][1])):
                if vid in values:
                    if values[vid] != val:
                        raise GraphError(
                            f"discontinuity at vertex {vid}: "
                            f"{values[vid]} vs {val}")
                else:
                    values[vid] = val
        missing = set(self.graph.vertices) - set(values)
        if missing:
            raise GraphError(
                f"isolated vertices carry no value: {sorted(missing)}")
        return values

    # -- evaluation ---------------------------------------------------------

    def vertex_value(self, vid: str) -> Fraction:
        return self._vertex_values[vid]

    def eval(self, p: GraphPoint) -> Fraction:
        p = self.graph.normalize_point(p)
        if isinstance(p, Vertex):
            return self._vertex_values[p.id]
        prof = self.profiles[p.edge]
        for (o1, v1), (o2, v2) in zip(prof, prof[1:]):
            if o1 <= p.offset <= o2:
                return v1 + (v2 - v1) * (p.offset - o1) / (o2 - o1)
        raise GraphError(f"offset {p.offset} outside edge {p.edge}")

    def outgoing_slope(self, d: TangentDirection) -> Fraction:
        """One-sided derivative at d.base in the direction of d."""
        self.graph.require_point(d.base)
        e = self.graph.edge(d.edge)
        prof = self.profiles[e.id]
        if isinstance(d.base, Vertex):
            base_off = Fraction(0) if d.toward_v else e.length
            if (d.toward_v and d.base.id != e.u) or \
               (not d.toward_v and d.base.id != e.v):
                raise GraphError(f"direction {d} does not start at its base")
        else:
            if d.base.edge != e.id:
                raise GraphError(f"direction {d} not on its base's edge")
            base_off = d.base.offset
        base_val = self.eval(d.base) if isinstance(d.base, EdgePoint) \
            else self._vertex_values[d.base.id]
        if d.toward_v:
            nxt = next((ov for ov in prof if ov[0] > base_off), None)
        else:
            nxt = next((ov for ov in reversed(prof) if ov[0] < base_off), None)
        if nxt is None:
            raise GraphError(f"no room in direction {d}")
        o, v = nxt
        return (v - base_val) / abs(o - base_off)

    # -- Laplacian measure ----------------------------------------------------

    def breakpoints(self) -> list[GraphPoint]:
        """All vertices plus interior profile breakpoints (kinked or not)."""
        pts: list[GraphPoint] = [Vertex(v) for v in self.graph.vertices]
        for e in self.graph.edges:
            for o, _ in self.profiles[e.id][1:-1]:
                pts.append(EdgePoint(e.id, o))
        pts.sort(key=point_sort_key)
        return pts

    def ddc(self) -> DiscreteMeasure:
        """Sum of outgoing slopes at every vertex and interior breakpoint."""
        pairs = []
        for e in self.graph.edges:
            prof = self.profiles[e.id]
            slopes = [(v2 - v1) / (o2 - o1)
                      for (o1, v1), (o2, v2) in zip(prof, prof[1:])]
            pairs.append((Vertex(e.u), slopes[0]))
            pairs.append((Vertex(e.v), -slopes[-1]))
            for i, (o, _) in enumerate(prof[1:-1], start=1):
                kink = slopes[i] - slopes[i - 1]
                pairs.append((EdgePoint(e.id, o), kink))
        return DiscreteMeasure.of(pairs)

    # -- predicates -----------------------------------------------------------

    def is_subharmonic_slope(self) -> SlopeVerdict:
        """True iff the Laplacian mass is >= 0 at every non-boundary point."""
        bad = [(p, m) for p, m in self.ddc().support
               if m < 0 and not (isinstance(p, Vertex)
                                 and p.id in self.graph.boundary)]
        return SlopeVerdict(not bad, tuple(bad))

    def is_harmonic_on(self, excluded) -> bool:
        """True iff ddc is supported inside the excluded point set."""
        excluded = set(excluded)
        return all(p in excluded for p, _ in self.ddc().support)

    # -- surgery --------------------------------------------------------------

    def subdivide_at(self, p: EdgePoint) -> tuple["PAFunction", str]:
        """Carry this function onto the graph subdivided at p."""
        g2, new_v = self.graph.subdivide(p)
        e = self.graph.edge(p.edge)
        val = self.eval(p)
        prof = self.profiles[e.id]
        left = [bp for bp in prof if bp[0] < p.offset] + [(p.offset, val)]
        right = [(Fraction(0), val)] + \
                [(o - p.offset, v) for o, v in prof if o > p.offset]
        profiles = {eid: pr for eid, pr in self.profiles.items() if eid != e.id}
        profiles[f"{e.id}.l"] = left
        profiles[f"{e.id}.r"] = right
        return PAFunction(g2, profiles), new_v

    def promote_interior_breakpoints(self) -> "PAFunction":
        """Subdivide the graph at every interior breakpoint, making the
        function affine on every edge."""
        f = self
        while True:
            pt = next((p for p in f.breakpoints() if isinstance(p, EdgePoint)),
                      None)
            if pt is None:
                return f
            f, _ = f.subdivide_at(pt)

    # -- serialization ----------------------------------------------------------

    def to_json_dict(self, inline_graph: bool = True) -> dict:
        d = {"profiles": {eid: [[format_rational(o), format_rational(v)]
                                for o, v in prof]
                          for eid, prof in sorted(self.profiles.items())}}
        if inline_graph:
            d["graph"] = self.graph.to_json_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict, graph: MetricGraph | None = None,
                       **graph_kw) -> "PAFunction":
        if graph is None:
            graph = MetricGraph.from_json_dict(d["graph"], **graph_kw)
        profiles = {eid: [(parse_rational(o), parse_rational(v))
                          for o, v in prof]
                    for eid, prof in d["profiles"].items()}
        return cls(graph, profiles)

    @classmethod
    def from_json(cls, s: str, **kw) -> "PAFunction":
        return cls.from_json_dict(json.loads(s), **kw)

    # -- misc ---------------------------------------------------------------

    @classmethod
    def constant(cls, graph: MetricGraph, c: Fraction) -> "PAFunction":
        c = Fraction(c)
        return cls(graph, {e.id: [(Fraction(0), c), (e.length, c)]
                           for e in graph.edges})

    @classmethod
    def from_vertex_values(cls, graph: MetricGraph, values: dict) -> "PAFunction":
        """Edge-affine interpolation of per-vertex values."""
        return cls(graph, {
            e.id: [(Fraction(0), Fraction(values[e.u])),
                   (e.length, Fraction(values[e.v]))]
            for e in graph.edges})

    def max_abs_slope(self) -> Fraction:
        """A Lipschitz constant (exact, metric-graph arc length)."""
        best = Fraction(0)
        for e in self.graph.edges:
            prof = self.profiles[e.id]
            for (o1, v1), (o2, v2) in zip(prof, prof[1:]):
                best = max(best, abs((v2 - v1) / (o2 - o1)))
        return best

    def __eq__(self, other):
        return (isinstance(other, PAFunction)
                and self.graph == other.graph
                and self.profiles == other.profiles)

    def __repr__(self):
        return f"PAFunction(on {self.graph!r})"


def linear_combine(coeffs: list[tuple[Fraction, PAFunction]]) -> PAFunction:
    """Pointwise linear combination; breakpoint offsets are unioned."""
    if not coeffs:
        raise ValueError("empty combination")
    graph = coeffs[0][1].graph
    for _, f in coeffs:
        if f.graph != graph:
            raise GraphError("linear_combine: graph mismatch")
    profiles = {}
    for e in graph.edges:
        offsets = sorted({o for _, f in coeffs for o, _ in f.profiles[e.id]})
        prof = []
        for o in offsets:
            p = Vertex(e.u) if o == 0 else (
                Vertex(e.v) if o == e.length else EdgePoint(e.id, o))
            val = sum((Fraction(c) * f.eval(p) for c, f in coeffs), Fraction(0))
            prof.append((o, val))
        profiles[e.id] = prof
    return PAFunction(graph, profiles)


def integrate(f: PAFunction, mu: DiscreteMeasure) -> Fraction:
    """Exact pairing  sum f(x) * mu({x})  over the support of mu."""
    return sum((f.eval(p) * m for p, m in mu.support), Fraction(0))
