"""Smooth-max machinery and the monotone regularization sequence.

theta is a C^1 Huber spline equal to |t| outside [-eps, eps]; the
two-argument smooth max m_eps(a, b) = (a + b + theta(a - b)) / 2 keeps
the exact-max behavior whenever |a - b| >= eps.  The n-argument smooth
max is a kernel-smoothed expected maximum evaluated in closed form, so
arguments far below the maximum drop out bit-exactly.

The regularization sequence replaces a subharmonic piecewise-affine f
near each positive-mass peak x by m_{eps/2}(G_x + eps, f), where G_x is
a dominated harmonic cone at x, with a geometrically shrinking eps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graph import EdgePoint, GraphError, GraphPoint, MetricGraph, Vertex
from .pa_function import PAFunction
from .potential import NotSubharmonicError


# -- scalar smooth-max calculus ------------------------------------------------


def theta(eps: float, t: float) -> float:
    """Symmetric convex 1-Lipschitz spline, strictly positive,
    equal to |t| for |t| >= eps."""
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = float(t)
    if abs(t) >= eps:
        return abs(t)
    return t * t / (2 * eps) + eps / 2


def smooth_max(eps: float, a: float, b: float) -> float:
    """Smoothed maximum: exact max when |a - b| >= eps, overshoot <= eps/4."""
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    a = float(a)
    b = float(b)
    if abs(a - b) >= eps:
        return a if a > b else b
    return (a + b + theta(eps, a - b)) / 2


def _poly_mul(p: list[float], q: list[float]) -> list[float]:
    out = [0.0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            out[i + j] += pi * qj
    return out


def _poly_int(p: list[float], lo: float, hi: float) -> float:
    acc = 0.0
    for k, c in enumerate(p):
        acc += c * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
    return acc


def smooth_max_n(delta: float, ts) -> float:
    """Smoothed maximum of n+1 arguments with overshoot at most delta.

    Realized as E[max_i (t_i + X_i)] for i.i.d. X_i uniform on
    [-delta/2, delta/2], integrated in closed form.  Guarantees:
    max <= M <= max + delta; convex and nondecreasing in each argument;
    translation-equivariant; and any argument with t_l + delta <= max
    (in particular t_l + 2*delta <= max) contributes nothing at all, so
    perturbing it below that threshold leaves the value bit-identical.
    """
    delta = float(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    ts = [float(t) for t in ts]
    if not ts:
        raise ValueError("need at least one argument")
    if len(ts) == 1:
        return ts[0]
    m = max(ts)
    h = delta / 2
    a = m - h
    # arguments whose kernel window lies entirely below the domain drop out
    keep = sorted((t for t in ts if t + h > a), reverse=True)
    if len(keep) == 1:
        return keep[0]
    cuts = {a, m + h}
    for t in keep:
        for c in (t - h, t + h):
            if a < c < m + h:
                cuts.add(c)
    cuts = sorted(cuts)
    total = a
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        # product of CDFs of t_i + X_i, as a polynomial in s = u - lo
        poly = [1.0]
        for t in keep:
            if mid >= t + h:
                continue  # factor is exactly 1 here
            if mid <= t - h:
                poly = None  # factor 0: integrand is 1 on this piece
                break
            poly = _poly_mul(poly, [(lo - t + h) / (2 * h), 1 / (2 * h)])
        w = hi - lo
        if poly is None:
            total += w
        else:
            total += w - _poly_int(poly, 0.0, w)
    return total


# -- smoothed functions on a graph ---------------------------------------------


class SmoothedFunction:
    """Expression-tree node; evaluation is real-valued and total on the
    graph's points."""

    graph: MetricGraph

    def value(self, p: GraphPoint) -> float:
        raise NotImplementedError


class PALeaf(SmoothedFunction):
    def __init__(self, f: PAFunction):
        self.graph = f.graph
        self.f = f

    def value(self, p: GraphPoint) -> float:
        return float(self.f.eval(p))


class ArcAffineLeaf(SmoothedFunction):
    """Affine in arc length on a set of edges: per edge, values at the two
    endpoints (offset 0 and offset length)."""

    def __init__(self, graph: MetricGraph, arcs: dict):
        self.graph = graph
        self.arcs = {eid: (Fraction(a), Fraction(b))
                     for eid, (a, b) in arcs.items()}

    def value_exact(self, p: GraphPoint) -> Fraction:
        if isinstance(p, Vertex):
            for eid, (va, vb) in self.arcs.items():
                e = self.graph.edge(eid)
                if e.u == p.id:
                    return va
                if e.v == p.id:
                    return vb
            raise GraphError(f"vertex {p.id} outside the arc domain")
        if p.edge not in self.arcs:
            raise GraphError(f"edge {p.edge} outside the arc domain")
        va, vb = self.arcs[p.edge]
        e = self.graph.edge(p.edge)
        return va + (vb - va) * p.offset / e.length

    def value(self, p: GraphPoint) -> float:
        return float(self.value_exact(p))


class ShiftNode(SmoothedFunction):
    def __init__(self, c, child: SmoothedFunction):
        self.graph = child.graph
        self.c = c
        self.child = child

    def value(self, p: GraphPoint) -> float:
        return self.child.value(p) + float(self.c)


class SmoothMaxNode(SmoothedFunction):
    def __init__(self, eps, left: SmoothedFunction, right: SmoothedFunction):
        self.graph = left.graph
        self.eps = eps
        self.left = left
        self.right = right

    def value(self, p: GraphPoint) -> float:
        return smooth_max(float(self.eps), self.left.value(p),
                          self.right.value(p))


class PatchNode(SmoothedFunction):
    """inside on the (open) star of a center vertex, outside elsewhere;
    the star region is the center plus the interiors of its edges."""

    def __init__(self, center: str, region_edges, inside: SmoothedFunction,
                 outside: SmoothedFunction):
        self.graph = inside.graph
        self.center = center
        self.region_edges = frozenset(region_edges)
        self.inside = inside
        self.outside = outside

    def _in_region(self, p: GraphPoint) -> bool:
        if isinstance(p, Vertex):
            return p.id == self.center
        return p.edge in self.region_edges

    def value(self, p: GraphPoint) -> float:
        return (self.inside if self._in_region(p) else self.outside).value(p)


def eval_smoothed(s: SmoothedFunction, p: GraphPoint) -> float:
    return s.value(s.graph.normalize_point(p))


def arc_second_difference(s: SmoothedFunction, edge_id: str, offset, h) -> float:
    """Central second difference along an edge, (s(o-h)-2s(o)+s(o+h))/h^2."""
    e = s.graph.edge(edge_id)
    off = Fraction(offset)
    step = Fraction(h)
    if step <= 0 or off - step <= 0 or off + step >= e.length:
        raise GraphError("offset +- h must stay strictly inside the edge")
    vm = s.value(EdgePoint(edge_id, off - step))
    v0 = s.value(EdgePoint(edge_id, off))
    vp = s.value(EdgePoint(edge_id, off + step))
    return (vm - 2 * v0 + vp) / float(step) ** 2


# -- the monotone regularization sequence ---------------------------------------


@dataclass(frozen=True)
class Patch:
    """One peak's data: the dominated harmonic cone G_x on the star arcs."""

    center: str
    mass: Fraction
    cone: ArcAffineLeaf           # G_x on the star edges
    arc_eps: dict                 # edge id -> (f(x_i) - G_x(x_i)) / 3


@dataclass(frozen=True)
class RegularizationSequence:
    base: PAFunction              # f on the (subdivided) working graph
    graph: MetricGraph
    patches: tuple[Patch, ...]
    epsilons: tuple[Fraction, ...]
    terms: tuple[SmoothedFunction, ...]


def _subdivide_between_peaks(f: PAFunction) -> PAFunction:
    """Split every edge whose two endpoints both carry positive interior
    Laplacian mass, so peak stars are pairwise disjoint."""
    while True:
        peaks = {p.id for p, m in f.ddc().support
                 if isinstance(p, Vertex) and m > 0
                 and p.id not in f.graph.boundary}
        target = next((e for e in f.graph.edges
                       if e.u in peaks and e.v in peaks), None)
        if target is None:
            return f
        f, _ = f.subdivide_at(EdgePoint(target.id, target.length / 2))


def build_regularization(graph: MetricGraph, f: PAFunction,
                         n_terms: int = 10) -> RegularizationSequence:
    """Monotone sequence of smoothed functions decreasing to subharmonic f.

    Peaks (positive interior Laplacian mass) are promoted to vertices and
    separated by midpoint subdivisions; each gets a harmonic cone G_x with
    arc slopes  d_i f(x) - mass/deg(x), an epsilon budget of a third of
    the arc gap, and the smoothing  m_{eps/2}(G_x + eps, f)  on its star.
    """
    if f.graph != graph:
        raise GraphError("function lives on a different graph")
    verdict = f.is_subharmonic_slope()
    if not verdict.ok:
        raise NotSubharmonicError(
            f"f is not subharmonic; witnesses: {verdict.witnesses}")

    f = f.promote_interior_breakpoints()
    f = _subdivide_between_peaks(f)
    g = f.graph

    patches = []
    eps0 = None
    for p, mass in f.ddc().support:
        if not isinstance(p, Vertex) or p.id in g.boundary or mass <= 0:
            continue
        dirs = g.star(p)
        deg = len(dirs)
        arcs = {}
        arc_eps = {}
        fx = f.vertex_value(p.id)
        for d in dirs:
            e = g.edge(d.edge)
            slope = f.outgoing_slope(d) - mass / deg
            far = fx + slope * e.length
            arcs[e.id] = (fx, far) if d.toward_v else (far, fx)
            other = e.v if d.toward_v else e.u
            gap = f.vertex_value(other) - far
            assert gap > 0
            arc_eps[e.id] = gap / 3
            if eps0 is None or arc_eps[e.id] < eps0:
                eps0 = arc_eps[e.id]
        patches.append(Patch(p.id, mass, ArcAffineLeaf(g, arcs), arc_eps))

    if not patches:
        leaf = PALeaf(f)
        return RegularizationSequence(f, g, (), (), (leaf,) * n_terms)

    epsilons = tuple(eps0 / 4 ** k for k in range(n_terms))
    terms = []
    for eps in epsilons:
        expr: SmoothedFunction = PALeaf(f)
        for patch in patches:
            inside = SmoothMaxNode(eps / 2,
                                   ShiftNode(eps, patch.cone),
                                   PALeaf(f))
            expr = PatchNode(patch.center, patch.cone.arcs.keys(),
                             inside, expr)
        terms.append(expr)
    return RegularizationSequence(f, g, tuple(patches), epsilons, tuple(terms))


def sample_points(g: MetricGraph, f: PAFunction, per_edge: int = 32):
    """Vertices, breakpoints, and a uniform grid on every edge."""
    pts = list(f.breakpoints())
    for e in g.edges:
        for i in range(1, per_edge):
            off = e.length * i / per_edge
            if all(o != off for o, _ in f.profiles[e.id]):
                pts.append(EdgePoint(e.id, off))
    return pts
