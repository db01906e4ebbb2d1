"""Snap a piecewise-affine function with high-precision decimal data onto
bounded-denominator rationals while certifying that the pairing
integral(f ddc G) stays strictly negative, plus the local tent
decomposition of a function at a vertex.

Decimal inputs are parsed exactly (scaled integers); "irrational" means
"a value the caller does not want to treat as canonical".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import EdgePoint, GraphError, MetricGraph, Vertex
from .pa_function import PAFunction, integrate, linear_combine
from .rational import format_rational, parse_rational


class ApproxPAFunction(PAFunction):
    """Same structure as PAFunction; offsets/values typically carry huge
    denominators coming from exact decimal parsing."""

    @classmethod
    def from_decimal_json_dict(cls, d: dict, graph: MetricGraph | None = None):
        return cls.from_json_dict(d, graph=graph)


@dataclass
class RationalizationCertificate:
    output: PAFunction
    ok: bool
    pairing: Fraction
    pairing_input: Fraction
    checks: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "pairing": format_rational(self.pairing),
            "pairing_input": format_rational(self.pairing_input),
            "checks": self.checks,
            "output": self.output.to_json_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


class RationalizationError(ValueError):
    pass


def _snap(x: Fraction, max_den: int) -> Fraction:
    return Fraction(x).limit_denominator(max_den)


def rationalize(f: PAFunction, g_in: PAFunction,
                tol: Fraction) -> RationalizationCertificate:
    """Steps: (1) snap kink offsets, (2) snap values (boundary pinned to 0,
    interior kept strictly positive), (3) verify rational slopes; then
    recompute the pairing exactly and certify it stayed negative.
    """
    if f.graph != g_in.graph:
        raise GraphError("f and G live on different graphs")
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    graph = f.graph
    if not graph.boundary:
        raise GraphError("empty boundary")
    max_den = math.ceil(1 / tol)

    max_offset_snap = Fraction(0)
    max_value_snap = Fraction(0)

    # Step 1: kink offsets onto denominators <= max_den.
    step1 = {}
    for e in graph.edges:
        prof = list(g_in.profiles[e.id])
        new = [prof[0]]
        for o, v in prof[1:-1]:
            o2 = _snap(o, max_den)
            if not (new[-1][0] < o2 < e.length):
                raise RationalizationError(
                    f"edge {e.id}: snapped offsets collide (tol too coarse)")
            max_offset_snap = max(max_offset_snap, abs(o2 - o))
            new.append((o2, v))
        new.append(prof[-1])
        step1[e.id] = new

    # Step 2: values; boundary vertices exactly 0, interior strictly > 0.
    def snap_value(v: Fraction) -> Fraction:
        v2 = _snap(v, max_den)
        if v > 0 and v2 <= 0:
            v2 = Fraction(1, max_den)
        return v2

    vertex_snapped = {}
    for vid in graph.vertices:
        old = g_in.vertex_value(vid)
        if vid in graph.boundary:
            vertex_snapped[vid] = Fraction(0)
        else:
            vertex_snapped[vid] = snap_value(old)
        max_value_snap = max(max_value_snap, abs(vertex_snapped[vid] - old))

    step2 = {}
    for e in graph.edges:
        prof = step1[e.id]
        new = [(Fraction(0), vertex_snapped[e.u])]
        for o, v in prof[1:-1]:
            v2 = snap_value(v)
            max_value_snap = max(max_value_snap, abs(v2 - v))
            new.append((o, v2))
        new.append((e.length, vertex_snapped[e.v]))
        step2[e.id] = new

    g_out = PAFunction(graph, step2)

    # Step 3: with rational offsets and values every slope is rational by
    # construction; record them as the verification witness.
    slopes = {}
    for e in graph.edges:
        prof = g_out.profiles[e.id]
        slopes[e.id] = [format_rational((v2 - v1) / (o2 - o1))
                        for (o1, v1), (o2, v2) in zip(prof, prof[1:])]

    pairing = integrate(f, g_out.ddc())
    pairing_in = integrate(f, g_in.ddc())

    # Continuity bound: |pairing(G') - pairing(G)| = |integral (G'-G) ddc f|
    # <= |ddc f|(total) * sup|G'-G|, with sup|G'-G| bounded by the value
    # snap plus the offset snap times a Lipschitz constant of G.
    tv_f = f.ddc().total_variation()
    lip_g = g_in.max_abs_slope()
    bound = tv_f * (max_value_snap + lip_g * max_offset_snap)
    if abs(pairing - pairing_in) > bound:
        raise AssertionError("pairing continuity bound violated")

    interior_bad = []
    for p in g_out.breakpoints():
        if isinstance(p, Vertex) and p.id in graph.boundary:
            if g_out.eval(p) != 0:
                raise AssertionError("boundary value nonzero after snap")
            continue
        if g_out.eval(p) <= 0:
            interior_bad.append(p)

    ok = pairing < 0 and not interior_bad
    checks = {
        "kinks_rational": {"pass": True, "max_denominator": max_den,
                           "max_offset_snap": format_rational(max_offset_snap)},
        "values_rational": {"pass": True,
                            "max_value_snap": format_rational(max_value_snap)},
        "slopes_rational": {"pass": True, "slopes": slopes},
        "interior_positive": {"pass": not interior_bad,
                              "witnesses": [repr(p) for p in interior_bad]},
        "boundary_zero": {"pass": True},
        "pairing_negative": {"pass": bool(pairing < 0),
                             "value": format_rational(pairing)},
        "pairing_bound": {"pass": True, "bound": format_rational(bound),
                          "drift": format_rational(abs(pairing - pairing_in))},
    }
    return RationalizationCertificate(g_out, ok, pairing, pairing_in, checks)


def insert_collar(length: Fraction, val_left: Fraction, val_right: Fraction,
                  collar: Fraction):
    """Edge profile that is flat on end collars and affine on a middle
    segment of rational length, so the one nonzero slope is rational even
    when the caller treats the total length as non-canonical."""
    length = Fraction(length)
    collar = Fraction(collar)
    if not 0 < 2 * collar < length:
        raise ValueError("collar must leave a nonempty middle segment")
    return [(Fraction(0), Fraction(val_left)),
            (collar, Fraction(val_left)),
            (length - collar, Fraction(val_right)),
            (length, Fraction(val_right))]


def tent_decompose(f: PAFunction, x: str):
    """Write f near the vertex x as  sum |l_i| * F_i + f(x)  on the inner
    half-star, where each tent F_i has slope sgn(l_i) leaving x on arc i,
    turns around at the arc midpoint, and vanishes elsewhere.

    Returns (coefficients, tents, constant).
    """
    g = f.graph
    if x not in set(g.vertices):
        raise GraphError(f"unknown vertex {x}")
    if x in g.boundary:
        raise GraphError("decomposition center must be interior")
    dirs = g.star(Vertex(x))
    for d in dirs:
        e = g.edge(d.edge)
        if e.u == e.v:
            raise GraphError("self-loop at the decomposition center "
                             "is not supported; subdivide it first")
        if len(f.profiles[e.id]) != 2:
            raise GraphError(f"f is not affine on adjacent edge {e.id}")

    fx = f.vertex_value(x)
    coeffs, tents = [], []
    for d in dirs:
        lam = f.outgoing_slope(d)
        if lam == 0:
            continue
        sgn = Fraction(1) if lam > 0 else Fraction(-1)
        e = g.edge(d.edge)
        peak = sgn * e.length / 2
        profiles = {e2.id: [(Fraction(0), Fraction(0)),
                            (e2.length, Fraction(0))]
                    for e2 in g.edges}
        profiles[e.id] = [(Fraction(0), Fraction(0)),
                          (e.length / 2, peak),
                          (e.length, Fraction(0))]
        coeffs.append(abs(lam))
        tents.append(PAFunction(g, profiles))
    return coeffs, tents, fx


def tent_reconstruction(coeffs, tents, constant, graph) -> PAFunction:
    """sum coeff_i * tent_i + constant, as an exact PAFunction."""
    terms = [(c, t) for c, t in zip(coeffs, tents)]
    terms.append((Fraction(1), PAFunction.constant(graph, constant)))
    return linear_combine(terms)
