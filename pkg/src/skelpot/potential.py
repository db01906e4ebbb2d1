"""Harmonic extension, Green's functions, the Poisson evaluation formula,
and the Green-pairing subharmonicity test.

Harmonicity on the graph is the Kirchhoff characterization: affine on
every edge and zero sum of outgoing slopes at each non-boundary vertex.
All solves are exact over the rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graph import (EdgePoint, GraphError, GraphPoint, MetricGraph, Vertex)
from .linalg import solve_exact
from .pa_function import DiscreteMeasure, PAFunction, integrate


class NotHarmonicError(ValueError):
    pass


class NotSubharmonicError(ValueError):
    """Raised when an operation's precondition (subharmonicity) fails."""


@dataclass(frozen=True)
class HarmonicExtension:
    result: PAFunction
    boundary_values: dict


@dataclass(frozen=True)
class GreenFunction:
    pole: GraphPoint
    result: PAFunction
    boundary_masses: DiscreteMeasure


def _check_dirichlet_pre(g: MetricGraph):
    if not g.boundary:
        raise GraphError("empty boundary")
    if not g.is_connected():
        raise GraphError("graph is not connected")


def _solve_laplacian(g: MetricGraph, boundary_values: dict,
                     sources: dict | None = None) -> dict:
    """Vertex values with fixed boundary data and prescribed Laplacian
    masses at interior vertices (sum of outgoing slopes = sources[v])."""
    sources = sources or {}
    interior = [v for v in g.vertices if v not in g.boundary]
    index = {v: i for i, v in enumerate(interior)}
    n = len(interior)
    a = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(-sources.get(v, Fraction(0))) for v in interior]
    for v in interior:
        i = index[v]
        for e, tv in g.incident_ends(v):
            w = e.v if tv else e.u
            c = Fraction(1) / e.length
            a[i][i] += c
            if w in index:
                a[i][index[w]] -= c
            else:
                b[i] += c * Fraction(boundary_values[w])
    x = solve_exact(a, b) if n else []
    values = {v: Fraction(boundary_values[v]) for v in g.boundary}
    values.update({v: x[index[v]] for v in interior})
    return values


def dirichlet_solve(g: MetricGraph, boundary_values: dict) -> HarmonicExtension:
    """Unique edge-affine function matching the boundary values with
    Kirchhoff balance at every interior vertex."""
    _check_dirichlet_pre(g)
    missing = g.boundary - set(boundary_values)
    if missing:
        raise GraphError(f"missing boundary values for {sorted(missing)}")
    values = _solve_laplacian(g, boundary_values)
    result = PAFunction.from_vertex_values(g, values)
    return HarmonicExtension(result, {v: Fraction(boundary_values[v])
                                      for v in sorted(g.boundary)})


def green(g: MetricGraph, x: GraphPoint) -> GreenFunction:
    """Green's function with pole x: zero on the boundary, Laplacian mass
    -1 at x, nonnegative boundary masses summing to 1."""
    _check_dirichlet_pre(g)
    g.require_point(x)
    if isinstance(x, Vertex) and x.id in g.boundary:
        raise GraphError("pole on the boundary")

    if isinstance(x, EdgePoint):
        sub, pole_vid = g.subdivide(x)
    else:
        sub, pole_vid = g, x.id

    zero = {v: Fraction(0) for v in sub.boundary}
    values = _solve_laplacian(sub, zero, sources={pole_vid: Fraction(-1)})

    if isinstance(x, EdgePoint):
        e = g.edge(x.edge)
        profiles = {}
        for e2 in g.edges:
            if e2.id == x.edge:
                profiles[e2.id] = [(Fraction(0), values[e2.u]),
                                   (x.offset, values[pole_vid]),
                                   (e2.length, values[e2.v])]
            else:
                profiles[e2.id] = [(Fraction(0), values[e2.u]),
                                   (e2.length, values[e2.v])]
        result = PAFunction(g, profiles)
    else:
        result = PAFunction.from_vertex_values(g, values)

    masses = result.ddc().restrict(
        lambda p: isinstance(p, Vertex) and p.id in g.boundary)
    return GreenFunction(x, result, masses)


def evaluation_formula_check(g: MetricGraph, x: GraphPoint,
                             h: PAFunction) -> tuple[Fraction, Fraction]:
    """Return (h(x), integral of h against the Green boundary masses);
    the two agree exactly for harmonic h."""
    if h.graph != g:
        raise GraphError("function lives on a different graph")
    excluded = {Vertex(v) for v in g.boundary}
    if not h.is_harmonic_on(excluded):
        raise NotHarmonicError("h is not harmonic off the boundary")
    gf = green(g, x)
    return h.eval(x), integrate(h, gf.boundary_masses)


@dataclass(frozen=True)
class GreenVerdict:
    ok: bool
    violations: tuple[tuple[GraphPoint, Fraction], ...]  # (pole, pairing)


def _arm_length(f: PAFunction, base: GraphPoint, edge_id: str,
                toward_v: bool) -> Fraction:
    """Half the distance from base to the nearest breakpoint (or endpoint)
    of f along the given edge-end: inside that arm f is affine."""
    e = f.graph.edge(edge_id)
    if isinstance(base, Vertex):
        base_off = Fraction(0) if toward_v else e.length
    else:
        base_off = base.offset
    offsets = [o for o, _ in f.profiles[edge_id]]
    if toward_v:
        nxt = min(o for o in offsets + [e.length] if o > base_off)
        return (nxt - base_off) / 2
    prv = max(o for o in offsets + [Fraction(0)] if o < base_off)
    return (base_off - prv) / 2


def local_green_pairing(f: PAFunction, x: GraphPoint) -> Fraction:
    """Pairing of f against ddc of the Green function of a small star-shaped
    subdomain around the interior point x (pole at x).

    The star's arms stay inside single affine pieces of f, mirroring the
    choice of a small affinoid neighborhood around the pole.
    """
    g = f.graph
    g.require_point(x)
    dirs = g.star(x)
    if isinstance(x, Vertex) and x.id in g.boundary:
        raise GraphError("pole on the boundary")
    if not dirs:
        raise GraphError("isolated point")

    # Build the abstract star graph: center c, one leaf per direction.
    leaves, edges, global_pts = [], [], {}
    for i, d in enumerate(dirs):
        arm = _arm_length(f, x, d.edge, d.toward_v)
        leaf = f"l{i}"
        leaves.append(leaf)
        edges.append((("c"), leaf, arm, f"a{i}"))
        e = g.edge(d.edge)
        if isinstance(x, Vertex):
            off = arm if d.toward_v else e.length - arm
        else:
            off = x.offset + arm if d.toward_v else x.offset - arm
        if off == 0:
            global_pts[leaf] = Vertex(e.u)
        elif off == e.length:
            global_pts[leaf] = Vertex(e.v)
        else:
            global_pts[leaf] = EdgePoint(d.edge, off)
    star = MetricGraph(["c"] + leaves, edges, leaves, allow_parallel=True)
    gf = green(star, Vertex("c"))
    mu = gf.result.ddc()
    total = Fraction(0)
    for p, m in mu.support:
        if isinstance(p, Vertex) and p.id == "c":
            total += m * f.eval(x)
        else:
            total += m * f.eval(global_pts[p.id])
    return total


def default_pole_sample(f: PAFunction) -> list[GraphPoint]:
    """Interior vertices, interior breakpoints of f, and edge midpoints.

    The pairing vanishes at non-kink poles, so this sample makes the
    Green-pairing verdict exact for piecewise-affine f.
    """
    g = f.graph
    pts: list[GraphPoint] = [Vertex(v) for v in g.vertices
                             if v not in g.boundary]
    for p in f.breakpoints():
        if isinstance(p, EdgePoint):
            pts.append(p)
    for e in g.edges:
        mid = EdgePoint(e.id, e.length / 2)
        if all(o != mid.offset for o, _ in f.profiles[e.id]):
            pts.append(mid)
    return pts


def is_subharmonic_green(f: PAFunction,
                         sample: list[GraphPoint] | None = None) -> GreenVerdict:
    """Subharmonicity via Green pairings: f is subharmonic iff the pairing
    of f against ddc of a local Green kernel is >= 0 for every interior pole.

    With the default sample (all kinks plus midpoints) the verdict is
    exact, since the pairing is zero at poles where f has no kink.
    """
    if sample is None:
        sample = default_pole_sample(f)
    bad = []
    for x in sample:
        val = local_green_pairing(f, x)
        if val < 0:
            bad.append((x, val))
    bad.sort(key=lambda pv: (str(pv[0])))
    return GreenVerdict(not bad, tuple(bad))


def maximum_principle_check(f: PAFunction) -> bool:
    """For subharmonic f: the harmonic extension of its boundary values
    dominates it at every vertex and breakpoint."""
    verdict = f.is_subharmonic_slope()
    if not verdict.ok:
        raise NotSubharmonicError(
            f"f is not subharmonic; witnesses: {verdict.witnesses}")
    g = f.graph
    _check_dirichlet_pre(g)
    h = dirichlet_solve(g, {v: f.vertex_value(v) for v in g.boundary}).result
    return all(f.eval(p) <= h.eval(p) for p in f.breakpoints())


def green_to_json_dict(gf: GreenFunction) -> dict:
    from .graph import point_to_json
    return {"pole": point_to_json(gf.pole),
            "function": gf.result.to_json_dict(),
            "boundary_masses": gf.boundary_masses.to_json_list()}
