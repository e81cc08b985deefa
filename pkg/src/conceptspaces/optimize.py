"""Numeric kernels.

Exact point-to-cuboid distance via per-dimension clamping, the height of
intersection of two fuzzy concepts (largest membership level at which their
level sets still meet) solved as a convex min-max per cuboid pair, and a
brute-force lattice oracle used to cross-check the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import LatticeSizeError, ValidationError
from .geometry import Core, Cuboid, cores_intersect, nearest_points
from .space import Point, Space, Weights

if TYPE_CHECKING:  # pragma: no cover
    from .concept import Concept

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 10_000
DEFAULT_CELL_CAP = 20_000_000

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class _MetricArrays(NamedTuple):
    """Weights compiled against a space for vectorized distance evaluation."""

    starts: np.ndarray   # first dimension index of every domain
    wdom: np.ndarray     # per-domain weight, 0 for uncovered domains
    wdim: np.ndarray     # per-dimension weight, 0 for uncovered dimensions


def _compile(space: Space, weights: Weights) -> _MetricArrays:
    unknown = weights.domain_set - set(space.domain_names)
    if unknown:
        raise ValidationError(f"weights cover unknown domains {sorted(unknown)}")
    starts = []
    wdom = []
    wdim = np.zeros(space.n)
    pos = 0
    for name, dims in space.domains:
        starts.append(pos)
        if name in weights.domain_set:
            wdom.append(weights.domain_weights[name])
            for d in dims:
                wdim[pos] = weights.dim_weight(name, d)
                pos += 1
        else:
            wdom.append(0.0)
            pos += len(dims)
    return _MetricArrays(np.asarray(starts), np.asarray(wdom), wdim)


def _dist_to_box(x: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                 m: _MetricArrays) -> float:
    gap = np.maximum(lo - x, 0.0) + np.maximum(x - hi, 0.0)
    sq = m.wdim * gap * gap
    return float(np.sqrt(np.add.reduceat(sq, m.starts)) @ m.wdom)


def _dist_to_box_batch(coords: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                       m: _MetricArrays) -> np.ndarray:
    gap = np.maximum(lo - coords, 0.0) + np.maximum(coords - hi, 0.0)
    sq = gap * gap * m.wdim
    return np.sqrt(np.add.reduceat(sq, m.starts, axis=1)) @ m.wdom


def distance_to_cuboid(x: Point, cuboid: Cuboid, weights: Weights) -> float:
    """Exact minimum combined distance from a point to a cuboid.

    Clamping each coordinate into the cuboid's bounds yields the nearest
    point because the combined metric treats dimensions independently.
    """
    if x.space != cuboid.space:
        raise ValidationError("point and cuboid belong to different spaces")
    if not cuboid.domains <= weights.domain_set:
        missing = sorted(cuboid.domains - weights.domain_set)
        raise ValidationError(f"weights do not cover domains {missing}")
    m = _compile(x.space, weights)
    return _dist_to_box(x.array, cuboid.lo, cuboid.hi, m)


def core_distance_batch(coords: np.ndarray, core: Core,
                        weights: Weights) -> np.ndarray:
    """Minimum combined distance from each coordinate row to a core."""
    coords = np.asarray(coords, dtype=float)
    m = _compile(core.space, weights)
    best = _dist_to_box_batch(coords, core.cuboids[0].lo, core.cuboids[0].hi, m)
    for c in core.cuboids[1:]:
        np.minimum(best, _dist_to_box_batch(coords, c.lo, c.hi, m), out=best)
    return best


def alpha_cut_bbox(cuboid: Cuboid, peak: float, decay: float,
                   weights: Weights, alpha: float) -> Cuboid:
    """Tight bounding box of one cuboid's membership level set.

    Every finite bound moves outward by ``r / (w_domain * sqrt(w_dim))``
    with ``r = ln(peak / alpha) / decay``: the cheapest way to gain combined
    distance ``r`` along a single dimension.  The box contains the true
    level set and touches it on every face.
    """
    if not 0 < alpha <= peak:
        raise ValidationError(
            f"level {alpha!r} must be in (0, peak]; peak is {peak!r}")
    if not decay > 0:
        raise ValidationError("decay rate must be positive")
    if not cuboid.domains <= weights.domain_set:
        missing = sorted(cuboid.domains - weights.domain_set)
        raise ValidationError(f"weights do not cover domains {missing}")
    r = math.log(peak / alpha) / decay
    space = cuboid.space
    lo = list(cuboid.p_min)
    hi = list(cuboid.p_max)
    for name in cuboid.domains:
        w_dom = weights.weight_of(name)
        for d in space.dims_of(name):
            off = r / (w_dom * math.sqrt(weights.dim_weight(name, d)))
            i = space.index_of(d)
            lo[i] -= off
            hi[i] += off
    return Cuboid(space, cuboid.domains, tuple(lo), tuple(hi))


@dataclass(frozen=True)
class HeightResult:
    """Outcome of a height-of-intersection computation.

    ``value`` is the best membership level found, ``witness`` a point
    attaining it.  When ``converged`` is true the final sweep improved the
    objective by no more than the requested tolerance (reported as ``gap``).
    """

    value: float
    witness: Point
    iterations: int
    converged: bool
    gap: float = 0.0


def _golden_min(f: Callable[[float], float], a: float, b: float,
                xtol: float) -> tuple[float, float, int]:
    """Golden-section minimization of a convex function on [a, b]."""
    if b - a <= xtol:
        x = 0.5 * (a + b)
        return x, f(x), 1
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    evals = 2
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    while b - a > xtol and evals < 200:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        evals += 1
        if f1 < best_f:
            best_x, best_f = x1, f1
        if f2 < best_f:
            best_x, best_f = x2, f2
    return best_x, best_f, evals


def _pair_objective(c1: "Concept", cub1: Cuboid, c2: "Concept",
                    cub2: Cuboid) -> Callable[[np.ndarray], float]:
    """Convex objective whose minimum is -ln of the pair's best shared level."""
    m1 = _compile(c1.space, c1.weights)
    m2 = _compile(c2.space, c2.weights)
    k1 = -math.log(c1.peak)
    k2 = -math.log(c2.peak)
    d1, d2 = c1.decay, c2.decay
    lo1, hi1, lo2, hi2 = cub1.lo, cub1.hi, cub2.lo, cub2.hi

    def objective(x: np.ndarray) -> float:
        f1 = d1 * _dist_to_box(x, lo1, hi1, m1) + k1
        f2 = d2 * _dist_to_box(x, lo2, hi2, m2) + k2
        return f1 if f1 >= f2 else f2

    return objective


def _solve_pair(obj: Callable[[np.ndarray], float], cub1: Cuboid, cub2: Cuboid,
                tol: float, budget: int) -> tuple[float, np.ndarray, int, bool, float]:
    """Derivative-free descent on the pair objective.

    Cyclic coordinate descent with golden-section line searches, interleaved
    with a line search along the segment joining the current clamps onto the
    two cuboids (which crosses the kink where the two branches swap).
    Starts from the midpoint of the cuboids' nearest points.
    """
    space = cub1.space
    n = space.n
    pa, pb = nearest_points(cub1, cub2)
    x = 0.5 * (pa + pb)
    g = obj(x)
    for cand in (pa, pb, cub1.inner_point(), cub2.inner_point()):
        val = obj(cand)
        if val < g:
            x, g = cand.astype(float), val
    x = np.array(x, dtype=float)

    lo1, hi1, lo2, hi2 = cub1.p_min, cub1.p_max, cub2.p_min, cub2.p_max
    brackets = []
    for i in range(n):
        los = [v for v in (lo1[i], lo2[i]) if math.isfinite(v)]
        his = [v for v in (hi1[i], hi2[i]) if math.isfinite(v)]
        if los:
            brackets.append((i, min(los), max(his)))

    searches = 0
    converged = False
    gap = math.inf
    while searches < budget:
        g_start = g
        sweep_complete = True

        p = cub1.clamp(x)
        q = cub2.clamp(x)
        direction = q - p
        if float(np.abs(direction).max(initial=0.0)) > 0.0:
            def along(t: float) -> float:
                return obj(p + t * direction)

            t_best, f_best, _ = _golden_min(along, 0.0, 1.0, xtol=1e-12)
            searches += 1
            if f_best < g:
                x = p + t_best * direction
                g = f_best

        for i, blo, bhi in brackets:
            saved = x[i]

            def axis(t: float) -> float:
                x[i] = t
                val = obj(x)
                x[i] = saved
                return val

            xtol = 1e-12 * max(1.0, bhi - blo)
            t_best, f_best, _ = _golden_min(axis, blo, bhi, xtol)
            searches += 1
            if f_best < g:
                x[i] = t_best
                g = f_best
            if searches >= budget:
                sweep_complete = False
                break

        gap = g_start - g
        if sweep_complete and gap <= tol:
            converged = True
            break
    return g, x, searches, converged, gap


def height_of_intersection(c1: "Concept", c2: "Concept",
                           tol: float = DEFAULT_TOL,
                           max_iter: int = DEFAULT_MAX_ITER) -> HeightResult:
    """Largest membership level at which two concepts' level sets meet.

    Equals the supremum over the space of the pointwise minimum of the two
    membership functions.  When the crisp cores share a point the answer is
    exactly the smaller peak.  Otherwise each cuboid pair contributes one
    convex min-max subproblem; the reported value is the best full
    membership minimum among all subproblem witnesses and midpoint
    heuristics, so it never exceeds the true height.
    """
    if c1.space != c2.space:
        raise ValidationError("concepts belong to different spaces")
    if not tol > 0:
        raise ValidationError("tolerance must be positive")
    space = c1.space
    if cores_intersect(c1.core, c2.core):
        for a in c1.core.cuboids:
            for b in c2.core.cuboids:
                shared = a.intersect(b)
                if shared is not None:
                    witness = Point(space, tuple(shared.inner_point()))
                    return HeightResult(min(c1.peak, c2.peak), witness,
                                        iterations=0, converged=True, gap=0.0)

    pairs = [(a, b) for a in c1.core.cuboids for b in c2.core.cuboids]
    budget = max(64, max_iter // len(pairs))
    candidates: list[np.ndarray] = []
    total = 0
    all_converged = True
    worst_gap = 0.0
    for a, b in pairs:
        obj = _pair_objective(c1, a, c2, b)
        _, x, used, conv, gap = _solve_pair(obj, a, b, tol, budget)
        total += used
        all_converged &= conv
        worst_gap = max(worst_gap, gap if math.isfinite(gap) else worst_gap)
        candidates.append(x)
        candidates.append(0.5 * (a.inner_point() + b.inner_point()))

    m1 = _compile(space, c1.weights)
    m2 = _compile(space, c2.weights)

    def min_membership(x: np.ndarray) -> float:
        da = min(_dist_to_box(x, cub.lo, cub.hi, m1) for cub in c1.core.cuboids)
        db = min(_dist_to_box(x, cub.lo, cub.hi, m2) for cub in c2.core.cuboids)
        return min(c1.peak * math.exp(-c1.decay * da),
                   c2.peak * math.exp(-c2.decay * db))

    best_val = -1.0
    best_x = candidates[0]
    for x in candidates:
        val = min_membership(x)
        if val > best_val:
            best_val, best_x = val, x
    witness = Point(space, tuple(best_x))
    return HeightResult(best_val, witness, iterations=total,
                        converged=all_converged, gap=worst_gap)


def oracle_bounds(c1: "Concept", c2: "Concept",
                  factor: float = 3.0) -> dict[str, tuple[float, float]]:
    """Lattice bounds enclosing both cores plus a weighted decay margin.

    Each dimension extends beyond the cores' finite extents by
    ``factor / decay`` converted into coordinate units through the owning
    concept's weights.
    """
    space = c1.space
    out: dict[str, tuple[float, float]] = {}
    for name, dims in space.domains:
        for d in dims:
            i = space.index_of(d)
            lo_candidates = []
            hi_candidates = []
            for concept in (c1, c2):
                if name not in concept.core.domain_set:
                    continue
                los = [c.p_min[i] for c in concept.core.cuboids
                       if math.isfinite(c.p_min[i])]
                if not los:
                    continue
                his = [c.p_max[i] for c in concept.core.cuboids]
                w_dom = concept.weights.weight_of(name)
                w_dim = concept.weights.dim_weight(name, d)
                off = (factor / concept.decay) / (w_dom * math.sqrt(w_dim))
                lo_candidates.append(min(los) - off)
                hi_candidates.append(max(h for h in his if math.isfinite(h)) + off)
            if lo_candidates:
                out[d] = (min(lo_candidates), max(hi_candidates))
    return out


def grid_oracle_max_min(c1: "Concept", c2: "Concept",
                        bounds: Mapping[str, tuple[float, float]], step: float,
                        cell_cap: int = DEFAULT_CELL_CAP) -> float:
    """Exhaustive lattice maximization of the two memberships' minimum.

    Validation oracle: evaluates the pointwise minimum on a regular lattice
    over ``bounds`` and returns the best value seen.  Improves monotonically
    as ``step`` shrinks.  Raises ``LatticeSizeError`` when the lattice would
    exceed ``cell_cap`` cells.
    """
    if c1.space != c2.space:
        raise ValidationError("concepts belong to different spaces")
    if not step > 0:
        raise ValidationError("step must be positive")
    space = c1.space
    union = c1.core.domain_set | c2.core.domain_set
    lattice_dims = [d for name in space.domain_names if name in union
                    for d in space.dims_of(name)]
    missing = [d for d in lattice_dims if d not in bounds]
    if missing:
        raise ValidationError(f"bounds missing for dimensions {missing}")

    counts = []
    for d in lattice_dims:
        lo, hi = bounds[d]
        if hi < lo:
            raise ValidationError(f"empty bounds for dimension {d!r}")
        counts.append(int(math.floor((hi - lo) / step + 1e-9)) + 1)
    total = math.prod(counts)
    if total > cell_cap:
        raise LatticeSizeError(
            f"lattice of {total} cells exceeds the cap of {cell_cap}")
    axes = [bounds[d][0] + step * np.arange(count)
            for d, count in zip(lattice_dims, counts)]

    idx = [space.index_of(d) for d in lattice_dims]
    m1 = _compile(space, c1.weights)
    m2 = _compile(space, c2.weights)
    boxes1 = [(c.lo, c.hi) for c in c1.core.cuboids]
    boxes2 = [(c.lo, c.hi) for c in c2.core.cuboids]

    def batch_min(coords: np.ndarray) -> np.ndarray:
        da = _dist_to_box_batch(coords, boxes1[0][0], boxes1[0][1], m1)
        for lo, hi in boxes1[1:]:
            np.minimum(da, _dist_to_box_batch(coords, lo, hi, m1), out=da)
        db = _dist_to_box_batch(coords, boxes2[0][0], boxes2[0][1], m2)
        for lo, hi in boxes2[1:]:
            np.minimum(db, _dist_to_box_batch(coords, lo, hi, m2), out=db)
        return np.minimum(c1.peak * np.exp(-c1.decay * da),
                          c2.peak * np.exp(-c2.decay * db))

    best = -math.inf
    chunk = 1 << 17
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        flat = np.arange(start, stop)
        multi = np.unravel_index(flat, counts)
        coords = np.zeros((stop - start, space.n))
        for k, dim_i in enumerate(idx):
            coords[:, dim_i] = axes[k][multi[k]]
        values = batch_min(coords)
        best = max(best, float(values.max()))
    return best
