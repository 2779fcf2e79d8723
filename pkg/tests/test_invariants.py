"""Cross-module property checks at the sample counts the modules promise."""

import math
from fractions import Fraction

import numpy as np
import pytest

from holoflux.connections import random_connection
from holoflux.cylindrical import (
    cylfun,
    evaluate,
    gsn,
    inner_product_exact,
    inner_product_mc,
    is_gsn,
    refine_for_surface,
)
from holoflux.geometry import Graph, OrientedSurface, PolyPath, Simplex
from holoflux.liegroup import haar_sample, parse_irrep
from holoflux.weylops import apply_weyl, apply_weyl_connection, weyl_constant

HALF = "su2:1/2"
ONE = "su2:1"


def random_cylfun(graph, rng, max_monomials=3):
    monomials = []
    for _ in range(int(rng.integers(1, max_monomials + 1))):
        coeff = complex(rng.normal(), rng.normal())
        factors = {}
        for eid in graph.edges:
            choice = rng.integers(3)
            if choice == 0:
                continue
            rho = HALF if choice == 1 else ONE
            d = parse_irrep(rho).dim
            factors[eid] = (rho, int(rng.integers(d)), int(rng.integers(d)))
        monomials.append((coeff, factors))
    return cylfun(graph, "su2", monomials)


def test_exact_vs_mc_on_fifty_random_pairs():
    rng = np.random.default_rng(41)
    for trial in range(50):
        n_edges = int(rng.integers(1, 5))
        pts = [(i, 0) for i in range(n_edges + 1)]
        graph = Graph.from_paths(
            [PolyPath([pts[i], pts[i + 1]]) for i in range(n_edges)]
        )
        f1 = random_cylfun(graph, rng)
        f2 = random_cylfun(graph, rng)
        exact = inner_product_exact(f1, f2)
        mc, se = inner_product_mc(f1, f2, 1000, rng)
        assert abs(mc - exact) <= 3 * se + 0.05, trial


def plane_surface():
    tri = Simplex([(0, -9, -9), (0, 20, -9), (0, -9, 20)], normal=(1, 0, 0))
    return OrientedSurface([tri], piece_ids=("p0",))


def test_pullback_consistency_thousand_instances():
    """(W f)(A) = f(flux(A)) across 1000 random (W, f, A) triples."""
    rng = np.random.default_rng(43)
    surface = plane_surface()
    graph = Graph.from_paths([PolyPath([(-1, 0, 0), (1, 0, 0)])])
    worst = 0.0
    for _ in range(25):
        rho = HALF if rng.integers(2) else ONE
        d = parse_irrep(rho).dim
        f = gsn(graph, "su2", {"e0": (rho, int(rng.integers(d)), int(rng.integers(d)))})
        w = weyl_constant(surface, haar_sample(rng, "su2"))
        wf = apply_weyl(w, f)
        f_ref = refine_for_surface(f, surface)
        for _ in range(40):
            conn = random_connection(wf.graph, "su2", rng)
            lhs = evaluate(wf, conn)
            rhs = evaluate(f_ref, apply_weyl_connection(w, conn))
            worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-12


def test_weyl_image_expands_in_refined_gsn_basis():
    """The operator maps spin networks into the span of refined-graph spin
    networks: every output monomial is itself a (scaled) GSN there."""
    rng = np.random.default_rng(47)
    surface = plane_surface()
    graph = Graph.from_paths([PolyPath([(-1, 0, 0), (1, 0, 0)])])
    for _ in range(20):
        rho = HALF if rng.integers(2) else ONE
        d = parse_irrep(rho).dim
        t = gsn(graph, "su2", {"e0": (rho, int(rng.integers(d)), int(rng.integers(d)))})
        wt = apply_weyl(w := weyl_constant(surface, haar_sample(rng, "su2")), t)
        all_edges = set(wt.graph.edges)
        total = 0.0
        for key, coeff in wt.terms.items():
            factors = dict(key)
            assert set(factors) == all_edges  # nontrivial on every edge
            state = gsn(wt.graph, "su2", factors)
            assert is_gsn(state)
            total += abs(coeff) ** 2
        # unitarity at the coefficient level: the expansion is normalized
        assert total == pytest.approx(1.0, abs=1e-12)
