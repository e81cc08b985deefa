"""Numeric kernels: clamp distance, level-set boxes, height solver, oracle."""

import math

import numpy as np
import pytest

from conceptspaces import (Concept, Core, Cuboid, LatticeSizeError, Space,
                           ValidationError, Weights, alpha_cut_bbox,
                           distance_to_cuboid, grid_oracle_max_min,
                           height_of_intersection, oracle_bounds)
from conceptspaces.optimize import _pair_objective

from conftest import LINE, PLANE, box_core, brute_min_distance, line_concept


class TestDistanceToCuboid:
    def test_zero_inside(self):
        c = Cuboid.from_bounds(PLANE, ["width", "height"],
                               {"x": 0.0, "y": 0.0}, {"x": 2.0, "y": 2.0})
        w = Weights.uniform(PLANE)
        assert distance_to_cuboid(PLANE.point({"x": 1.0, "y": 2.0}), c, w) == 0.0

    def test_one_dimensional_clamp(self):
        c = Cuboid.from_bounds(LINE, ["val"], {"x": 0.0}, {"x": 1.0})
        w = Weights.uniform(LINE)
        assert distance_to_cuboid(LINE.point({"x": 3.0}), c, w) == 2.0

    def test_zero_iff_contained(self):
        rng = np.random.default_rng(31)
        c = Cuboid.from_bounds(PLANE, ["width", "height"],
                               {"x": -0.5, "y": 0.0}, {"x": 0.5, "y": 1.0})
        w = Weights.uniform(PLANE)
        for _ in range(300):
            p = PLANE.point({"x": rng.uniform(-1, 1), "y": rng.uniform(-1, 2)})
            assert (distance_to_cuboid(p, c, w) == 0.0) == c.contains(p)

    def test_matches_lattice_oracle(self):
        rng = np.random.default_rng(32)
        space = Space((("a", ("a1", "a2")), ("b", ("b1",))))
        step = 1e-2
        for _ in range(20):
            lo = rng.uniform(-1, 0.5, 3)
            hi = lo + rng.integers(5, 30, 3) * step
            c = Cuboid.from_bounds(space, ["a", "b"],
                                   dict(zip(space.dim_names, lo)),
                                   dict(zip(space.dim_names, hi)))
            w = Weights.normalized(
                {"a": rng.uniform(0.6, 1.4), "b": rng.uniform(0.6, 1.4)},
                {"a": {"a1": rng.uniform(0.5, 1.5), "a2": rng.uniform(0.5, 1.5)},
                 "b": {"b1": 1.0}})
            coords = rng.uniform(-2, 2, 3)
            x = space.point(dict(zip(space.dim_names, coords)))
            exact = distance_to_cuboid(x, c, w)
            brute = brute_min_distance(space, w, c, coords, step)
            assert exact <= brute + 1e-12
            assert brute - exact <= 2 * step

    def test_requires_covering_weights(self):
        c = Cuboid.from_bounds(PLANE, ["width", "height"],
                               {"x": 0.0, "y": 0.0}, {"x": 1.0, "y": 1.0})
        w = Weights.uniform(PLANE, ["width"])
        with pytest.raises(ValidationError):
            distance_to_cuboid(PLANE.point({"x": 0.0, "y": 0.0}), c, w)


class TestAlphaCutBbox:
    def test_identity_at_peak(self):
        c = Cuboid.from_bounds(LINE, ["val"], {"x": 0.0}, {"x": 1.0})
        w = Weights.uniform(LINE)
        assert alpha_cut_bbox(c, 1.0, 1.0, w, 1.0) == c

    def test_unit_example(self):
        c = Cuboid.from_bounds(LINE, ["val"], {"x": 0.0}, {"x": 1.0})
        w = Weights.uniform(LINE)
        got = alpha_cut_bbox(c, 1.0, 1.0, w, math.exp(-1.0))
        assert got.p_min[0] == pytest.approx(-1.0, abs=1e-12)
        assert got.p_max[0] == pytest.approx(2.0, abs=1e-12)

    def test_rejects_level_above_peak(self):
        c = Cuboid.from_bounds(LINE, ["val"], {"x": 0.0}, {"x": 1.0})
        with pytest.raises(ValidationError):
            alpha_cut_bbox(c, 0.5, 1.0, Weights.uniform(LINE), 0.75)

    def test_faces_touch_the_level_set(self):
        space = PLANE
        w = Weights.normalized({"width": 1.2, "height": 0.8},
                               {"width": {"x": 1.0}, "height": {"y": 1.0}})
        cub = Cuboid.from_bounds(space, ["width", "height"],
                                 {"x": 0.0, "y": 0.0}, {"x": 2.0, "y": 1.0})
        concept = Concept(Core((cub,)), 0.9, 1.7, w)
        alpha = 0.4
        box = alpha_cut_bbox(cub, concept.peak, concept.decay, w, alpha)
        mid = 0.5 * (cub.lo + cub.hi)
        for i in range(space.n):
            for bound in (box.p_min[i], box.p_max[i]):
                face = mid.copy()
                face[i] = bound
                value = concept.membership(
                    space.point(dict(zip(space.dim_names, face))))
                assert value == pytest.approx(alpha, abs=1e-9)

    def test_contains_the_level_set(self):
        rng = np.random.default_rng(33)
        w = Weights.uniform(PLANE)
        cub = Cuboid.from_bounds(PLANE, ["width", "height"],
                                 {"x": 0.0, "y": 0.0}, {"x": 1.0, "y": 1.0})
        concept = Concept(Core((cub,)), 1.0, 0.8, w)
        alpha = 0.3
        box = alpha_cut_bbox(cub, 1.0, 0.8, w, alpha)
        pts = rng.uniform(-4, 5, size=(4000, 2))
        members = concept.membership_batch(pts) >= alpha
        assert box.contains_batch(pts)[members].all()

    def test_unbounded_dimensions_stay_unbounded(self):
        space = Space((("a", ("a1",)), ("b", ("b1",))))
        cub = Cuboid.from_bounds(space, ["a"], {"a1": 0.0}, {"a1": 1.0})
        got = alpha_cut_bbox(cub, 1.0, 1.0, Weights.uniform(space), 0.5)
        assert got.p_min[1] == -math.inf and got.p_max[1] == math.inf
        assert got.domains == {"a"}


class TestHeightOfIntersection:
    def test_identical_concepts_short_circuit(self):
        a = line_concept(0, 1, peak=0.8)
        res = height_of_intersection(a, a)
        assert res.value == 0.8
        assert res.iterations == 0
        assert res.converged
        assert a.membership(res.witness) == 0.8

    def test_disjoint_unit_boxes(self):
        a = line_concept(0, 1)
        b = line_concept(3, 4)
        res = height_of_intersection(a, b)
        assert res.value == pytest.approx(math.exp(-1.0), abs=1e-9)
        assert res.witness.coords[0] == pytest.approx(2.0, abs=1e-6)
        assert res.converged

    def test_asymmetric_decay(self):
        a = line_concept(0, 0, decay=1.0)
        b = line_concept(3, 3, decay=2.0)
        res = height_of_intersection(a, b)
        assert res.value == pytest.approx(math.exp(-2.0), abs=1e-9)
        assert res.witness.coords[0] == pytest.approx(2.0, abs=1e-6)

    def test_witness_attains_value(self):
        a = line_concept(0, 1, peak=0.7, decay=1.3)
        b = line_concept(2.5, 4, peak=0.9, decay=0.6)
        res = height_of_intersection(a, b)
        attained = min(a.membership(res.witness), b.membership(res.witness))
        assert attained == pytest.approx(res.value, rel=1e-12)

    def test_never_below_midpoint_heuristic(self):
        rng = np.random.default_rng(34)
        from conftest import random_concept, random_space
        for _ in range(25):
            space = random_space(rng)
            c1 = random_concept(rng, space)
            c2 = random_concept(rng, space)
            res = height_of_intersection(c1, c2)
            for x in c1.core.cuboids:
                for y in c2.core.cuboids:
                    mid_arr = 0.5 * (x.inner_point() + y.inner_point())
                    mid = space.point(dict(zip(space.dim_names, mid_arr)))
                    bound = min(c1.membership(mid), c2.membership(mid))
                    assert res.value >= bound - 1e-12

    def test_pair_objective_is_convex_along_segments(self):
        rng = np.random.default_rng(35)
        a = Concept(box_core(PLANE, [({"x": 0.0, "y": 0.0},
                                      {"x": 1.0, "y": 2.0})]),
                    0.9, 1.2, Weights.normalized(
                        {"width": 1.3, "height": 0.7},
                        {"width": {"x": 1.0}, "height": {"y": 1.0}}))
        b = Concept(box_core(PLANE, [({"x": 3.0, "y": 1.0},
                                      {"x": 4.0, "y": 4.0})]),
                    1.0, 0.8, Weights.uniform(PLANE))
        obj = _pair_objective(a, a.core.cuboids[0], b, b.core.cuboids[0])
        for _ in range(500):
            x, y = rng.uniform(-5, 8, (2, 2))
            mid = 0.5 * (x + y)
            assert obj(mid) <= 0.5 * (obj(x) + obj(y)) + 1e-9


class TestGridOracle:
    def test_identical_concepts(self):
        a = line_concept(0, 1, peak=0.85, decay=1.1)
        got = grid_oracle_max_min(a, a, oracle_bounds(a, a), 1e-3)
        assert got == pytest.approx(0.85, abs=0.85 * 1.1 * 1e-3)

    def test_disjoint_boxes_fixture(self):
        a = line_concept(0, 1)
        b = line_concept(3, 4)
        got = grid_oracle_max_min(a, b, oracle_bounds(a, b), 1e-4)
        assert got == pytest.approx(math.exp(-1.0), abs=1e-4)

    def test_matches_solver_in_two_domains(self):
        a = Concept(box_core(PLANE, [({"x": 0.0, "y": 0.0},
                                      {"x": 1.0, "y": 1.0})]),
                    1.0, 1.0, Weights.uniform(PLANE))
        b = Concept(box_core(PLANE, [({"x": 2.0, "y": 0.0},
                                      {"x": 3.0, "y": 1.0})]),
                    1.0, 1.0, Weights.uniform(PLANE))
        solver = height_of_intersection(a, b).value
        oracle = grid_oracle_max_min(a, b, oracle_bounds(a, b), 5e-3)
        assert solver == pytest.approx(oracle, abs=1e-3)

    def test_lattice_cap(self):
        a = line_concept(0, 1)
        b = line_concept(3, 4)
        with pytest.raises(LatticeSizeError):
            grid_oracle_max_min(a, b, {"x": (0.0, 1.0)}, 1e-9)

    def test_bounds_must_cover_all_dimensions(self):
        a = Concept(box_core(PLANE, [({"x": 0.0, "y": 0.0},
                                      {"x": 1.0, "y": 1.0})]),
                    1.0, 1.0, Weights.uniform(PLANE))
        with pytest.raises(ValidationError):
            grid_oracle_max_min(a, a, {"x": (-1.0, 2.0)}, 0.1)


def test_oracle_bounds_enclose_cores():
    a = line_concept(0, 1, decay=2.0)
    b = line_concept(3, 4, decay=0.5)
    bounds = oracle_bounds(a, b)
    lo, hi = bounds["x"]
    assert lo <= 0 - 3 / 2.0
    assert hi >= 4 + 3 / 0.5
