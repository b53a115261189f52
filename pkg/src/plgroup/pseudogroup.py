"""Finitely generated pseudo-group presentations on 1-manifolds.

A presentation is a finite transversal (list of components) together
with named generating PL maps between pieces of it, optionally carrying
extension witnesses: a witness for g is a PL map that restricts to g on
a relatively compact sub-domain.  On top of this sit the word/orbit
machinery, isotropy groups with exact multiplicative ranks, and the
equivalence constructors (restriction and pullback through an atlas of
charts).

All searches are bounded and three-valued: a certificate, a refutation,
or None meaning "not found within the depth bound".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geometry import (Component, Point, Q, SubInterval, full, intersect,
                       interval, pick, rel_compact_in, sub)
from .plmap import (Germ, PLMap, compose_all, equal_on_overlap, germ_at,
                    identity_on, image, invert, restrict)


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    """A composite of generators, written left to right.

    letters[0] is applied first; each letter is (name, exponent) with
    exponent +1 or -1.
    """

    letters: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        for name, e in self.letters:
            if e not in (1, -1):
                raise ValueError(f"letter exponent must be +-1, got {e}")

    def __len__(self):
        return len(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple((n, -e) for n, e in reversed(self.letters)))

    def then(self, name: str, e: int) -> "Word":
        return Word(self.letters + ((name, e),))

    def concat(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __repr__(self):
        if not self.letters:
            return "Word(1)"
        return "Word(" + " ".join(n if e > 0 else n + "^-1"
                                  for n, e in self.letters) + ")"


def word(*letters) -> Word:
    """word(("g", 1), ("h", -1)) or word("g", "h-") style shorthand."""
    out = []
    for l in letters:
        if isinstance(l, str):
            if l.endswith("-"):
                out.append((l[:-1], -1))
            else:
                out.append((l, 1))
        else:
            out.append((l[0], l[1]))
    return Word(tuple(out))


# ---------------------------------------------------------------------------
# presentations


@dataclass
class Presentation:
    transversal: tuple[Component, ...]
    generators: dict[str, PLMap]
    extensions: dict[str, PLMap] = field(default_factory=dict)

    def __post_init__(self):
        self.transversal = tuple(self.transversal)
        cids = [c.cid for c in self.transversal]
        if len(set(cids)) != len(cids):
            raise ValueError("duplicate component ids")
        comps = set(self.transversal)
        for name, g in self.generators.items():
            if g.dom.component not in comps or g.codom not in comps:
                raise ValueError(f"generator {name} leaves the transversal")
        for name, w in self.extensions.items():
            if name not in self.generators:
                raise ValueError(f"extension witness for unknown generator {name}")
            if w.dom.component not in comps or w.codom not in comps:
                raise ValueError(f"witness for {name} leaves the transversal")
        self._inv_cache: dict[str, PLMap] = {}

    def component(self, cid: str) -> Component:
        for c in self.transversal:
            if c.cid == cid:
                return c
        raise KeyError(cid)

    def letter(self, name: str, e: int) -> PLMap:
        if name not in self.generators:
            raise KeyError(f"unknown generator {name}")
        if e == 1:
            return self.generators[name]
        if name not in self._inv_cache:
            self._inv_cache[name] = invert(self.generators[name])
        return self._inv_cache[name]

    def letter_items(self):
        for name in self.generators:
            yield (name, 1), self.letter(name, 1)
            yield (name, -1), self.letter(name, -1)


def eval_word(P: Presentation, w: Word, p: Point) -> Optional[Point]:
    """Apply the word left to right; None once a letter is undefined."""
    cur = p
    for name, e in w.letters:
        m = P.letter(name, e)
        if not m.defined_at(cur):
            return None
        cur = m(cur)
    return cur


def orbit_ball(P: Presentation, p: Point, depth: int) -> set[Point]:
    return set(orbit_ball_words(P, p, depth))


def orbit_ball_words(P: Presentation, p: Point, depth: int) -> dict[Point, Word]:
    """Reachable points with a shortest witnessing word for each."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    seen: dict[Point, Word] = {p: Word()}
    frontier = [p]
    for _ in range(depth):
        nxt = []
        for q in frontier:
            for (name, e), m in P.letter_items():
                if m.defined_at(q):
                    r = m(q)
                    if r not in seen:
                        seen[r] = seen[q].then(name, e)
                        nxt.append(r)
        if not nxt:
            break
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# isotropy


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_exponents(q: Q) -> dict[int, int]:
    """Exponent vector of a positive rational in the primes."""
    if q <= 0:
        raise ValueError("slopes are positive")
    out = dict(_factor(q.numerator))
    for p, e in _factor(q.denominator).items():
        out[p] = out.get(p, 0) - e
    return {p: e for p, e in out.items() if e}


def exponent_matrix_rank(rows: Sequence[Sequence[Q]]) -> int:
    """Rank over the rationals, by Gaussian elimination with Fractions."""
    m = [list(map(Q, r)) for r in rows if any(r)]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot = None
        for r in range(rank, len(m)):
            if m[r][c] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][c]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / pv
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def slope_rank(pairs: Sequence[tuple[Q, Q]]) -> int:
    """Rank of the group generated by (left, right) slope pairs.

    One row per pair; columns indexed by primes x {left, right}.
    """
    primes = sorted({p for l, r in pairs
                     for p in set(prime_exponents(l)) | set(prime_exponents(r))})
    if not primes:
        return 0
    rows = []
    for l, r in pairs:
        el, er = prime_exponents(l), prime_exponents(r)
        rows.append([Q(el.get(p, 0)) for p in primes] +
                    [Q(er.get(p, 0)) for p in primes])
    return exponent_matrix_rank(rows)


@dataclass(frozen=True)
class IsotropyReport:
    point: Point
    germs: tuple[tuple[Word, Germ], ...]
    rank: int
    commutative: bool
    depth: int


def isotropy(P: Presentation, p: Point, depth: int) -> IsotropyReport:
    """Germs of words of length <= depth fixing p, and their rank."""
    # BFS over (current point, accumulated one-sided slopes)
    start = (p, Q(1), Q(1))
    seen = {start: Word()}
    frontier = [start]
    found: dict[tuple[Q, Q], Word] = {}
    for _ in range(depth):
        nxt = []
        for (q, ls, rs) in frontier:
            w0 = seen[(q, ls, rs)]
            for (name, e), m in P.letter_items():
                if not m.defined_at(q):
                    continue
                g = germ_at(m, q)
                state = (g.target, ls * g.left, rs * g.right)
                if state in seen:
                    continue
                seen[state] = w0.then(name, e)
                nxt.append(state)
                if state[0] == p:
                    key = (state[1], state[2])
                    if key != (Q(1), Q(1)) and key not in found:
                        found[key] = seen[state]
        frontier = nxt
        if not frontier:
            break
    germs = tuple(sorted(
        ((w, Germ(p, p, l, r)) for (l, r), w in found.items()),
        key=lambda t: (len(t[0]), t[0].letters)))
    rank = slope_rank([(l, r) for (l, r) in found])
    return IsotropyReport(p, germs, rank, True, depth)


# ---------------------------------------------------------------------------
# compact-generation witnesses


def check_extendable(P: Presentation, name: str) -> bool:
    """Does the stored witness actually extend the generator compactly?"""
    if name not in P.extensions:
        raise KeyError(f"no extension witness for {name}")
    g = P.generators[name]
    w = P.extensions[name]
    if g.codom != w.codom:
        return False
    if not rel_compact_in(g.dom, w.dom):
        return False
    return equal_on_overlap(g, w)


# ---------------------------------------------------------------------------
# membership certificates


@dataclass(frozen=True)
class PiecewiseWordCert:
    """Cover of a map's domain by subintervals, with a word for each.

    On every cell the word's evaluation agrees with the target map; the
    closures of the cells cover the closure of the target domain (the
    finitely many uncovered points are pinned by continuity).
    """

    cells: tuple[tuple[SubInterval, Word], ...]


def _map_key(m: PLMap):
    return (m.dom.component.cid, m.dom.lo, m.dom.hi, m.dom.lo_closed,
            m.dom.hi_closed, m.codom.cid, m.bps, m.lo_slope, m.hi_slope)


def _agreement_intervals(f: PLMap, m: PLMap) -> list[SubInterval]:
    """Maximal subintervals of dom(f) n dom(m) where f == m."""
    if m.codom != f.codom or m.dom.component != f.dom.component:
        return []
    out = []
    for piece in intersect(f.dom, m.dom):
        if piece.lo is not None and piece.hi is not None and piece.lo == piece.hi:
            continue
        try:
            rf = restrict(f, piece)
            rm = restrict(m, piece)
        except ValueError:
            continue
        xs = sorted({x for x, _ in rf.bps} | {x for x, _ in rm.bps})
        if rf.dom.lo is None:
            xs = [xs[0] - 1] + xs if xs else [Q(0)]
        if rf.dom.hi is None:
            xs = xs + [xs[-1] + 1] if xs else [Q(0)]

        def eq_at(x):
            return (rf.codom.normalize(rf.eval_lift(x))
                    == rm.codom.normalize(rm.eval_lift(x)))

        # a segment agrees iff both ends and the midpoint agree
        runs = []
        for a, b in zip(xs, xs[1:]):
            if eq_at(a) and eq_at(b) and eq_at((a + b) / 2):
                if runs and runs[-1][1] == a:
                    runs[-1][1] = b
                else:
                    runs.append([a, b])
        # unbounded tails (interval components only)
        lo_unb = (rf.dom.lo is None and rf.lo_slope == rm.lo_slope
                  and eq_at(xs[0]))
        hi_unb = (rf.dom.hi is None and rf.hi_slope == rm.hi_slope
                  and eq_at(xs[-1]))
        for a, b in runs:
            lo = None if (lo_unb and a == xs[0]) else a
            hi = None if (hi_unb and b == xs[-1]) else b
            c = piece.component
            if c.is_circle:
                out.append(SubInterval(c, a, b, True, True)
                           if b - a < c.length else full(c))
            else:
                lc = lo is not None and c.contains_coord(lo)
                hc = hi is not None and c.contains_coord(hi)
                out.append(SubInterval(c, lo, hi, lc, hc))
    return out


def _lo_key(a):
    return (0,) if a is None else (1, a)


def _hi_key(b):
    return (2,) if b is None else (1, b)


def _covers(cells: Sequence[SubInterval], target: SubInterval) -> bool:
    """Do the closures of the cells cover the closure of target?"""
    c = target.component
    if c.is_circle:
        if any(x.is_full_circle for x in cells):
            return True
        L = c.length
        ivs = []
        for x in cells:
            a = target.lo + ((x.lo - target.lo) % L)
            ivs.append((a, a + x.extent))
            ivs.append((a - L, a - L + x.extent))
    else:
        ivs = [(x.lo, x.hi) for x in cells]
    lo, hi = target.lo, target.hi
    ivs.sort(key=lambda ab: _lo_key(ab[0]))
    reach = _lo_key(lo)  # covered closure frontier so far
    for a, b in ivs:
        if _lo_key(a) <= reach:
            reach = max(reach, _hi_key(b))
        if reach >= _hi_key(hi):
            return True
    return False


def certify_membership(P: Presentation, f: PLMap,
                       depth: int) -> Optional[PiecewiseWordCert]:
    """Search for a piecewise word cover of f within the word-length bound."""
    region = f.dom
    found: list[tuple[SubInterval, Word]] = []

    def record(m: PLMap, w: Word) -> bool:
        hit = False
        for iv in _agreement_intervals(f, m):
            found.append((iv, w))
            hit = True
        return hit

    # identity word
    ic = f.dom.component
    if f.codom == ic:
        record(identity_on(full(ic)), Word())
        if _covers([iv for iv, _ in found], region):
            return PiecewiseWordCert(_prune(found, region))

    states: dict[tuple, Word] = {}
    frontier: list[PLMap] = []
    for (name, e), m in P.letter_items():
        for piece in _clip_to(m, region):
            k = _map_key(piece)
            if k not in states:
                states[k] = Word(((name, e),))
                frontier.append(piece)
                record(piece, states[k])
    if _covers([iv for iv, _ in found], region):
        return PiecewiseWordCert(_prune(found, region))
    for _ in range(depth - 1):
        nxt = []
        for m in frontier:
            w0 = states[_map_key(m)]
            for (name, e), l in P.letter_items():
                for comp in compose_all(l, m):
                    for piece in _clip_to(comp, region):
                        k = _map_key(piece)
                        if k in states:
                            continue
                        w = w0.then(name, e)
                        states[k] = w
                        nxt.append(piece)
                        record(piece, w)
        if _covers([iv for iv, _ in found], region):
            return PiecewiseWordCert(_prune(found, region))
        frontier = nxt
        if not frontier:
            break
    return None


def _clip_to(m: PLMap, region: SubInterval) -> list[PLMap]:
    """Pieces of m with domain clipped into the region's component."""
    if m.dom.component != region.component:
        return []
    out = []
    for piece in intersect(m.dom, region):
        if piece.lo is not None and piece.lo == piece.hi:
            continue
        try:
            out.append(restrict(m, piece))
        except ValueError:
            pass
    return out


def _prune(found: list[tuple[SubInterval, Word]],
           target: SubInterval) -> tuple:
    """Drop cells that are redundant for the cover (greedy, keeps order)."""
    kept = list(found)
    i = 0
    while i < len(kept):
        trial = kept[:i] + kept[i + 1:]
        if trial and _covers([iv for iv, _ in trial], target):
            kept = trial
        else:
            i += 1
    return tuple(kept)


def verify_membership_cert(P: Presentation, f: PLMap,
                           cert: PiecewiseWordCert) -> bool:
    """Re-check a certificate exactly."""
    for iv, w in cert.cells:
        m = word_map(P, w, iv)
        if m is None:
            return False
        ok = _agreement_intervals(f, m)
        if not _covers(ok, iv):
            return False
    return _covers([iv for iv, _ in cert.cells], f.dom)


def word_map(P: Presentation, w: Word,
             start: Optional[SubInterval] = None) -> Optional[PLMap]:
    """The composite map of a word, optionally clipped to a start domain.

    None when the composite is empty; raises DisconnectedComposition
    when it splits (callers wanting pieces should iterate letters with
    compose_all themselves).
    """
    if start is not None:
        cur: Optional[PLMap] = identity_on(start)
    else:
        cur = None
    if not w.letters:
        return cur
    for i, (name, e) in enumerate(w.letters):
        m = P.letter(name, e)
        if cur is None:
            cur = m if i == 0 and start is None else None
            if cur is None:
                return None
        else:
            pieces = compose_all(m, cur)
            if not pieces:
                return None
            if len(pieces) > 1:
                from .plmap import DisconnectedComposition
                raise DisconnectedComposition(pieces)
            cur = pieces[0]
    return cur


# ---------------------------------------------------------------------------
# presentation surgery


def normalize_generators(P: Presentation) -> Presentation:
    """Split circle-domain generators so every domain is an interval arc.

    A full-circle domain is covered by two overlapping open arcs; the
    original map serves as the extension witness of both halves.
    """
    gens: dict[str, PLMap] = {}
    exts: dict[str, PLMap] = {}
    for name, g in P.generators.items():
        if name in P.extensions and not check_extendable(P, name):
            raise ValueError(f"generator {name}: invalid extension witness")
        if g.dom.is_full_circle:
            L = g.dom.component.length
            lo = g.dom.lo
            a1 = SubInterval(g.dom.component, lo, lo + Q(5, 8) * L, False, False)
            a2 = SubInterval(g.dom.component, lo + Q(1, 2) * L,
                             lo + Q(9, 8) * L, False, False)
            for i, arc in enumerate((a1, a2)):
                nm = f"{name}_{i}"
                gens[nm] = restrict(g, arc)
                exts[nm] = g
        else:
            gens[name] = g
            if name in P.extensions:
                exts[name] = P.extensions[name]
    return Presentation(P.transversal, gens, exts)


def restrict_presentation(P: Presentation, U: Sequence[SubInterval]) -> Presentation:
    """The pseudo-group restricted to an open subset of the transversal.

    Each piece of U becomes its own component (circle arcs become
    intervals in lift coordinates); generators are clipped to the
    largest pieces mapping U into U, empties dropped.
    """
    pieces = list(U)
    comps: list[Component] = []
    for i, s in enumerate(pieces):
        c = s.component
        if c.is_circle and s.is_full_circle:
            comps.append(Component(f"{c.cid}|{i}", "circle", length=c.length))
        else:
            comps.append(Component(f"{c.cid}|{i}", "interval", s.lo, s.hi,
                                   s.lo_closed, s.hi_closed))

    def clips(m: PLMap, i: int, j: int) -> list[PLMap]:
        """Largest pieces of m mapping pieces[i] into pieces[j], re-homed."""
        si, sj = pieces[i], pieces[j]
        out: list[PLMap] = []
        if m.dom.component != si.component or m.codom != sj.component:
            return out
        for cm in _clip_to(m, si):
            for tgt in intersect(image(cm), sj):
                if tgt.lo is not None and tgt.lo == tgt.hi:
                    continue
                try:
                    back = restrict(invert(cm), tgt)
                except ValueError:
                    continue
                r = _rehome_map(invert(back), si, comps[i], sj, comps[j])
                if r is not None:
                    out.append(r)
        return out

    gens: dict[str, PLMap] = {}
    exts: dict[str, PLMap] = {}
    for name, g in P.generators.items():
        for i in range(len(pieces)):
            for j in range(len(pieces)):
                got = clips(g, i, j)
                wits = (clips(P.extensions[name], i, j)
                        if name in P.extensions else [])
                for k, m in enumerate(got):
                    nm = name if len(pieces) == 1 and len(got) == 1 else \
                        f"{name}@{i}{j}" + (f"_{k}" if k else "")
                    gens[nm] = m
                    # keep the witness only where it still extends the clip
                    for wm in wits:
                        if m.codom == wm.codom and \
                                rel_compact_in(m.dom, wm.dom) and \
                                equal_on_overlap(m, wm):
                            exts[nm] = wm
                            break
    return Presentation(tuple(comps), gens, exts)


def _rehome_map(m: PLMap, si: SubInterval, ci: Component,
                sj: SubInterval, cj: Component) -> Optional[PLMap]:
    """Re-express a map between circle/interval pieces in the new
    components' coordinates (lift-window coordinates for proper arcs)."""
    # domain coordinates
    if si.component.is_circle and ci.kind == "interval":
        # m's bps are already in an anchored lift window; shift into si's
        delta = si.lo + ((m.dom.lo - si.lo) % si.component.length) - m.dom.lo
    else:
        delta = Q(0)
    if sj.component.is_circle and cj.kind == "interval":
        y0 = m.bps[0][1]
        eps = sj.lo + ((y0 - sj.lo) % sj.component.length) - y0
    else:
        eps = Q(0)
    bps = tuple((x + delta, y + eps) for x, y in m.bps)
    try:
        dom = SubInterval(ci,
                          None if m.dom.lo is None else m.dom.lo + delta,
                          None if m.dom.hi is None else m.dom.hi + delta,
                          m.dom.lo_closed, m.dom.hi_closed)
        return PLMap(dom, cj, bps, m.lo_slope, m.hi_slope)
    except ValueError:
        return None


# ---------------------------------------------------------------------------
# Haefliger equivalence


@dataclass
class EquivalenceAtlas:
    """Charts from a new transversal into an existing one.

    chart_changes maps a pair of chart indices (i, j) to a Word of the
    old presentation certifying that chart_j o chart_i^-1 lies in the
    old pseudo-group wherever it is defined.
    """

    new_transversal: tuple[Component, ...]
    charts: tuple[PLMap, ...]
    chart_changes: dict[tuple[int, int], Word] = field(default_factory=dict)


class AtlasError(ValueError):
    def __init__(self, condition: str):
        super().__init__(f"atlas validation failed: {condition}")
        self.condition = condition


def validate_atlas(P: Presentation, atlas: EquivalenceAtlas, depth: int = 6):
    comps = set(atlas.new_transversal)
    old = set(P.transversal)
    for i, ch in enumerate(atlas.charts):
        if ch.dom.component not in comps:
            raise AtlasError(f"chart {i} domain not on the new transversal")
        if ch.codom not in old:
            raise AtlasError(f"chart {i} image leaves the old transversal")
    # cover: chart domains cover each new component
    for c in atlas.new_transversal:
        doms = [ch.dom for ch in atlas.charts if ch.dom.component == c]
        if not doms or not _covers(doms, full(c)):
            raise AtlasError(f"charts do not cover component {c.cid}")
    # chart changes lie in the old pseudo-group
    for i, a in enumerate(atlas.charts):
        for j, b in enumerate(atlas.charts):
            if i == j:
                continue
            if a.dom.component != b.dom.component:
                continue
            overlap = intersect(a.dom, b.dom)
            overlap = [o for o in overlap if o.lo is None or o.lo != o.hi]
            if not overlap:
                continue
            w = atlas.chart_changes.get((i, j))
            if w is None:
                raise AtlasError(f"missing chart change word for ({i}, {j})")
            for o in overlap:
                ra, rb = restrict(a, o), restrict(b, o)
                change_pieces = compose_all(rb, invert(ra))
                for cp in change_pieces:
                    mm = word_map(P, w, cp.dom)
                    if mm is None or not equal_on_overlap(mm, cp) or \
                            not _covers(_agreement_intervals(cp, mm), cp.dom):
                        raise AtlasError(
                            f"chart change ({i}, {j}) not certified on overlap")
    # exhaustive: every old component meets the saturation of a chart image
    for c in P.transversal:
        hit = any(image(ch).component == c for ch in atlas.charts)
        if not hit:
            for ch in atlas.charts:
                q = pick(image(ch))
                if any(r.component == c for r in orbit_ball(P, q, depth)):
                    hit = True
                    break
        if not hit:
            raise AtlasError(f"old component {c.cid} not met by any chart image")


def pullback_presentation(P: Presentation, atlas: EquivalenceAtlas,
                          depth: int = 6) -> Presentation:
    """The pseudo-group pulled back through the atlas of charts."""
    validate_atlas(P, atlas, depth)
    gens: dict[str, PLMap] = {}
    n = 0

    def add(prefix, pieces):
        nonlocal n
        for m in pieces:
            if m.dom.lo is not None and m.dom.lo == m.dom.hi:
                continue
            gens[f"{prefix}_{n}"] = m
            n += 1

    for i, a in enumerate(atlas.charts):
        for j, b in enumerate(atlas.charts):
            binv = invert(b)
            for name, g in P.generators.items():
                mid = compose_all(g, a)
                for m in mid:
                    add(f"{name}@{i}{j}", compose_all(binv, m))
            if i != j and a.codom == b.codom:
                add(f"chg@{i}{j}", compose_all(binv, a))
    return Presentation(atlas.new_transversal, gens)
