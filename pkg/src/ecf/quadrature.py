"""Adaptive Simpson quadrature for probability-transform integrals.

Every population quantity in this package reduces to an integral of some
function of the quantile over the unit interval.  The integrands are smooth
between a handful of known breakpoints but can steepen sharply toward the
endpoints (heavy-tailed quantiles), so panels are bisected worst-first
against a single absolute error budget for the whole interval: refinement
effort concentrates wherever the Richardson estimate says the integral is
still uncertain, instead of forcing every region to meet a fixed local
share.  Near-singular edges then cost panels in proportion to their actual
contribution rather than their width.
"""

from __future__ import annotations

import heapq
import math
from typing import Callable, Iterable, NamedTuple

from .errors import QuadratureError

# Integrands on (0, 1) are never evaluated closer to an endpoint than this.
# For square-integrable quantiles the truncated mass is far below the
# quadrature tolerance.
EDGE = 1e-12

DEFAULT_TOL = 1e-9
MAX_DEPTH = 64

# Every piece is bisected this many times up front so that acceptance never
# rests on a single coarse Simpson estimate that could cancel by symmetry.
_SEED_LEVELS = 2

# Hard ceiling on worst-first bisections per call, so that an integrand the
# error estimate cannot pin down (noise, hidden discontinuities) terminates
# in bounded time and reports failure instead of spinning.
_MAX_SPLITS = 200_000


class _Panel(NamedTuple):
    """One Simpson panel with its Richardson-corrected value and error."""

    a: float
    fa: float
    lm: float
    flm: float
    m: float
    fm: float
    rm: float
    frm: float
    b: float
    fb: float
    left: float
    right: float
    value: float
    err: float
    depth: int  # remaining bisections allowed for this lineage


def _make_panel(f, a, fa, m, fm, b, fb, whole, depth) -> _Panel:
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    return _Panel(
        a, fa, lm, flm, m, fm, rm, frm, b, fb,
        left, right, left + right + delta / 15.0, abs(delta) / 15.0, depth,
    )


def _split(f, p: _Panel) -> tuple[_Panel, _Panel]:
    # The stored child midpoints become the midpoints of the two halves, so
    # a split only evaluates the four new quarter points.
    return (
        _make_panel(f, p.a, p.fa, p.lm, p.flm, p.m, p.fm, p.left, p.depth - 1),
        _make_panel(f, p.m, p.fm, p.rm, p.frm, p.b, p.fb, p.right, p.depth - 1),
    )


def _splittable(p: _Panel) -> bool:
    # Bisection needs four strictly nested midpoints; once the panel width
    # reaches float spacing further subdivision is meaningless.
    return p.depth > 0 and p.a < p.lm < p.m < p.rm < p.b


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    tol: float = DEFAULT_TOL,
    breakpoints: Iterable[float] = (),
    max_depth: int = MAX_DEPTH,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``breakpoints`` lists interior locations where ``f`` jumps or kinks;
    the interval is partitioned there before refinement starts.  All pieces
    share one error budget: the panel with the largest error estimate is
    bisected until the summed estimate falls below ``tol`` or no panel may
    be split further.

    Raises
    ------
    QuadratureError
        If the subdivision limits are reached before the tolerance is met.
        The exception carries the tolerance actually achieved.
    """
    a = float(a)
    b = float(b)
    if b == a:
        return 0.0
    if b < a:
        raise ValueError("integration bounds must satisfy a <= b")
    if not tol > 0.0:
        raise ValueError("tol must be positive")

    cuts = sorted({float(x) for x in breakpoints if a < float(x) < b})
    edges = [a, *cuts, b]

    panels: list[_Panel] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        # Sample the endpoints one ulp inside the piece so that a jump at a
        # breakpoint is seen from the correct side on both of its pieces.
        flo = f(math.nextafter(lo, hi))
        fhi = f(math.nextafter(hi, lo))
        m = 0.5 * (lo + hi)
        fm = f(m)
        whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi)
        panels.append(_make_panel(f, lo, flo, m, fm, hi, fhi, whole, max_depth))
    for _ in range(min(_SEED_LEVELS, max_depth)):
        seeded: list[_Panel] = []
        for p in panels:
            if _splittable(p):
                seeded.extend(_split(f, p))
            else:
                seeded.append(p)
        panels = seeded

    heap: list[tuple[float, int, _Panel]] = []
    seq = 0
    active_err = 0.0
    for p in panels:
        heap.append((-p.err, seq, p))
        seq += 1
        active_err += p.err
    heapq.heapify(heap)

    frozen: list[_Panel] = []
    frozen_err = 0.0
    splits = 0
    while heap and active_err + frozen_err > tol:
        if frozen_err > tol or splits >= _MAX_SPLITS:
            break  # the remaining deficit cannot be split away
        _, _, p = heapq.heappop(heap)
        active_err -= p.err
        if not _splittable(p):
            frozen.append(p)
            frozen_err += p.err
            continue
        splits += 1
        for child in _split(f, p):
            heapq.heappush(heap, (-child.err, seq, child))
            seq += 1
            active_err += child.err

    leaves = frozen + [entry[2] for entry in heap]
    if active_err + frozen_err > tol:
        achieved = math.fsum(p.err for p in leaves)
        raise QuadratureError(
            f"quadrature did not converge: requested {tol:.3g}, achieved {achieved:.3g}",
            achieved_tol=achieved,
        )
    # fsum makes the result independent of heap pop order.
    return math.fsum(p.value for p in leaves)


def unit_integral(
    f: Callable[[float], float],
    lo: float = 0.0,
    hi: float = 1.0,
    *,
    tol: float = DEFAULT_TOL,
    breakpoints: Iterable[float] = (),
) -> float:
    """Integrate ``f`` over ``[lo, hi]`` within (0, 1), clipped away from 0 and 1.

    The clip width is :data:`EDGE`; probability-transform integrands are
    evaluated strictly inside the open unit interval.
    """
    lo = max(float(lo), EDGE)
    hi = min(float(hi), 1.0 - EDGE)
    if hi <= lo:
        return 0.0
    return integrate(f, lo, hi, tol=tol, breakpoints=breakpoints)
