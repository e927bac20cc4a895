"""Six-wave resonances among the bands R_1..R_4.

Slots 1, 3, 5 of a six-tuple carry the unconjugated amplitudes and slots
2, 4, 6 the conjugated ones. Slot 6 is the output mode.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeParams, alpha_index, band_of, band_of_array, resonant_indices

PLUS = (0, 2, 4)
MINUS = (1, 3, 5)
# each side of a resonance is a (pair band, single band) pattern
PATTERNS = ((1, 3), (2, 4))


def phase_phi(t, p: LatticeParams | None = None) -> int:
    """n1^2 - n2^2 + n3^2 - n4^2 + n5^2 - n6^2, in units of (2*pi/L)^2."""
    n1, n2, n3, n4, n5, n6 = (int(x) for x in t)
    return n1 * n1 - n2 * n2 + n3 * n3 - n4 * n4 + n5 * n5 - n6 * n6


def phase_phi_array(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.int64)
    sq = t * t
    return sq[..., 0] - sq[..., 1] + sq[..., 2] - sq[..., 3] + sq[..., 4] - sq[..., 5]


def momentum(t) -> int:
    n1, n2, n3, n4, n5, n6 = (int(x) for x in t)
    return n1 - n2 + n3 - n4 + n5 - n6


@dataclass(frozen=True)
class ResonanceWitness:
    plus_pattern: tuple  # (pair band, single band) among slots 1, 3, 5
    minus_pattern: tuple
    j1: int
    j3: int
    j5: int
    j2: int
    j4: int
    j6: int


def _split_side(labels):
    """Return (pair band, [pair js], single band, single j) or None."""
    bands = [b for b, _ in labels]
    for b in set(bands):
        if bands.count(b) == 2:
            pair = [j for bb, j in labels if bb == b]
            single = [(bb, j) for bb, j in labels if bb != b]
            return b, pair, single[0][0], single[0][1]
    return None


def is_resonant(t, p: LatticeParams):
    """Witness of the resonance condition for the six-tuple ``t`` or None."""
    t = tuple(int(x) for x in t)
    if momentum(t) != 0:
        return None
    labels = [band_of(x, p) for x in t]
    if any(lab is None for lab in labels):
        return None
    plus = _split_side([labels[i] for i in PLUS])
    minus = _split_side([labels[i] for i in MINUS])
    if plus is None or minus is None:
        return None
    pb, pj, ps, sj_plus = plus
    mb, mj, ms, sj_minus = minus
    if {(pb, ps), (mb, ms)} != set(PATTERNS):
        return None
    if sorted(pj) != sorted(mj):
        return None
    if (pj[0] + pj[1]) % 2 or sj_plus != sj_minus or 2 * sj_plus != pj[0] + pj[1]:
        return None
    return ResonanceWitness((pb, ps), (mb, ms), pj[0], pj[1], sj_plus, mj[0], mj[1], sj_minus)


def is_resonant_array(t, p: LatticeParams) -> np.ndarray:
    """Boolean mask over an (N, 6) array of tuples; same rule as :func:`is_resonant`."""
    t = np.asarray(t, dtype=np.int64)
    band, jj = band_of_array(t, p)
    ok = (t[:, 0] - t[:, 1] + t[:, 2] - t[:, 3] + t[:, 4] - t[:, 5]) == 0
    ok &= np.all(band > 0, axis=1)

    def side(cols):
        b = band[:, cols]
        j = jj[:, cols]
        order = np.argsort(b, axis=1, kind="stable")
        b = np.take_along_axis(b, order, axis=1)
        j = np.take_along_axis(j, order, axis=1)
        # sorted bands read (pair, pair, single) for both admissible patterns
        is113 = (b[:, 0] == 1) & (b[:, 1] == 1) & (b[:, 2] == 3)
        is224 = (b[:, 0] == 2) & (b[:, 1] == 2) & (b[:, 2] == 4)
        pair = np.sort(j[:, :2], axis=1)
        return is113, is224, pair, j[:, 2]

    p113, p224, ppair, psingle = side(list(PLUS))
    m113, m224, mpair, msingle = side(list(MINUS))
    ok &= (p113 & m224) | (p224 & m113)
    ok &= np.all(ppair == mpair, axis=1)
    ok &= psingle == msingle
    ok &= 2 * psingle == ppair[:, 0] + ppair[:, 1]
    return ok


def _orderings(items):
    return sorted(set(itertools.permutations(items)))


def enumerate_res(n6: int, p: LatticeParams) -> list:
    """All ordered (n1, .., n5) with (n1, .., n5, n6) resonant.

    Built constructively from the band pattern of ``n6``; empty off R.
    """
    hit = band_of(n6, p)
    if hit is None:
        return []
    m6, j6 = hit
    # the side holding slot 6 uses pattern (a, b); the opposite side uses (c, d)
    if m6 in (1, 3):
        a, b, c, d = 1, 3, 2, 4
    else:
        a, b, c, d = 2, 4, 1, 3
    A = lambda m, j: alpha_index(m, j, p)  # noqa: E731
    out = []
    L = p.L
    if m6 == a:
        # minus side {alpha_a,j6, alpha_a,jp, alpha_b,mid}; plus {alpha_c,j6, alpha_c,jp, alpha_d,mid}
        for jp in range(L):
            if (j6 + jp) % 2:
                continue
            mid = (j6 + jp) // 2
            minus_rest = (A(a, jp), A(b, mid))
            plus = (A(c, j6), A(c, jp), A(d, mid))
            for pl in _orderings(plus):
                for mi in _orderings(minus_rest):
                    out.append((pl[0], mi[0], pl[1], mi[1], pl[2]))
    else:
        # n6 is the single alpha_b,j6; its pair {ja, jb} averages to j6
        for ja in range(L):
            jb = 2 * j6 - ja
            if not 0 <= jb < L:
                continue
            minus_rest = (A(a, ja), A(a, jb))
            plus = (A(c, ja), A(c, jb), A(d, j6))
            for pl in _orderings(plus):
                mi = minus_rest
                out.append((pl[0], mi[0], pl[1], mi[1], pl[2]))
    return sorted(set(out))


def brute_force_res(n6: int, p: LatticeParams) -> list:
    """Filter every momentum-conserving 5-tuple drawn from R through the predicate."""
    R = resonant_indices(p).ravel()
    grids = np.meshgrid(R, R, R, R, indexing="ij")
    n1, n2, n3, n4 = (g.ravel() for g in grids)
    n5 = n2 + n4 + n6 - n1 - n3
    keep = np.isin(n5, R)
    cols = [n1[keep], n2[keep], n3[keep], n4[keep], n5[keep], np.full(keep.sum(), n6)]
    tuples = np.stack(cols, axis=1)
    mask = is_resonant_array(tuples, p)
    return sorted(tuple(int(x) for x in row[:5]) for row in tuples[mask])


def classify_eta_solutions(window: int = 20) -> dict:
    """Integer solutions of the eta momentum/energy system, grouped by family.

    eta_1, eta_2, eta_3, eta_5 range over {0, 1, 3, 4}; eta_4 and eta_6 over
    [-window, window]. Families are ``"equal"`` (plus and minus multisets
    coincide), ``"114_330"``, ``"330_114"`` and ``"other"``.
    """
    base = np.array([0, 1, 3, 4])
    free = np.arange(-window, window + 1)
    g = np.meshgrid(base, base, base, free, base, free, indexing="ij")
    e = np.stack([x.ravel() for x in g], axis=1)
    lin = e[:, 0] - e[:, 1] + e[:, 2] - e[:, 3] + e[:, 4] - e[:, 5]
    sq = phase_phi_array(e)
    sol = e[(lin == 0) & (sq == 0)]
    plus = np.sort(sol[:, [0, 2, 4]], axis=1)
    minus = np.sort(sol[:, [1, 3, 5]], axis=1)
    eq = np.all(plus == minus, axis=1)
    a = np.all(plus == [1, 1, 4], axis=1) & np.all(minus == [0, 3, 3], axis=1)
    b = np.all(plus == [0, 3, 3], axis=1) & np.all(minus == [1, 1, 4], axis=1)
    families = defaultdict(list)
    for row, f_eq, f_a, f_b in zip(sol.tolist(), eq, a, b):
        key = "equal" if f_eq else "114_330" if f_a else "330_114" if f_b else "other"
        families[key].append(tuple(row))
    return {key: families.get(key, []) for key in ("equal", "114_330", "330_114", "other")}


def count_half_sum_pairs(L: int) -> tuple:
    """Brute-force counts behind the averaging identities.

    ``total_by_j`` counts, for each midpoint j, the unordered pairs
    {j1, j2} in [0, L) with j1 + j2 = 2j; ``total_by_j2`` counts the ordered
    pairs (j, j1) with j = (j1 + j2)/2 for each j2.
    """
    if L < 1:
        raise ValueError("L must be positive")
    j = np.arange(L)
    total = np.add.outer(j, j)
    even = total % 2 == 0
    # every even sum of two indices in [0, L) has its midpoint in [0, L)
    by_j = int(np.count_nonzero(np.triu(even)))
    by_j2 = int(np.count_nonzero(even))
    return by_j, by_j2


def half_sum_closed_form(L: int) -> int:
    return sum(min(j + 1, L - j) for j in range(L))


def check_phase_vanishes(p: LatticeParams) -> list:
    """Resonant tuples (over all of R) whose phase is nonzero; empty when resonance forces phi = 0."""
    bad = []
    for n6 in resonant_indices(p).ravel():
        for t in enumerate_res(int(n6), p):
            full = (*t, int(n6))
            if phase_phi(full) != 0:
                bad.append(full)
    return bad
