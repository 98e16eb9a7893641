"""Exact vertex p-center on a static distance matrix.

A distance matrix is a plain ``(|F|, |C|)`` array, a location decision a sorted
tuple of facility indices and an allocation an array holding, per customer,
the index of the facility serving it.

`solve_pcenter` binary-searches the sorted distinct matrix entries.  Each
probe asks whether ``p`` facilities can cover every customer within the radius,
a set-cover question answered exactly by `_CoverSearch`.
"""
from __future__ import annotations

import itertools
import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError, InfeasibleParametersError

BRUTE_FORCE_BUDGET = 10**6


class PCenterResult(NamedTuple):
    facilities: tuple[int, ...]
    radius: float


def allocate(open_facilities: Sequence[int], d) -> np.ndarray:
    """Assign every customer to its closest open facility, ties to the lowest index."""
    O = sorted(int(i) for i in open_facilities)
    if not O:
        raise DomainError("at least one facility must be open")
    d = np.asarray(d)
    sub = d[O]
    return np.asarray(O)[np.argmin(sub, axis=0)]


def radius(open_facilities: Sequence[int], assignment, d) -> float:
    """Largest service time of an allocation."""
    d = np.asarray(d)
    assignment = np.asarray(assignment)
    if not set(assignment.tolist()) <= set(int(i) for i in open_facilities):
        raise DomainError("allocation uses a facility that is not open")
    return float(d[assignment, np.arange(d.shape[1])].max())


def set_radius(open_facilities: Sequence[int], d) -> float:
    """Radius of the closest-facility allocation of ``open_facilities``."""
    d = np.asarray(d)
    return float(d[list(open_facilities)].min(axis=0).max())


def _check(d, p) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] == 0 or d.shape[1] == 0:
        raise DomainError("distance matrix must be a non-empty (facilities, customers) array")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise DomainError("distances must be finite and non-negative")
    if not 1 <= p <= d.shape[0]:
        raise InfeasibleParametersError(f"p={p} must lie in [1, {d.shape[0]}]")
    return d


def _bits(mask_rows: np.ndarray) -> list[int]:
    """Each boolean row as a Python int bitmask (bit j set iff column j is True)."""
    n = mask_rows.shape[1]
    packed = np.packbits(mask_rows, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") & ((1 << n) - 1) for row in packed]


def _popcount(x: int) -> int:
    return bin(x).count("1")


class _CoverSearch:
    """Can every customer be covered by at most k of the given facility sets?

    Branches on the uncovered customer with the fewest covering facilities,
    prunes with a packing lower bound (customers whose candidate sets are
    pairwise disjoint need distinct facilities), drops dominated candidates at
    each node and memoises infeasible ``(uncovered, k)`` states.
    """

    def __init__(self, covers: list[int], n_customers: int):
        self.n_fac = len(covers)
        cands = [0] * n_customers
        for i, cov in enumerate(covers):
            x = cov
            while x:
                low = x & -x
                cands[low.bit_length() - 1] |= 1 << i
                x ^= low
        self.coverable = all(cands)
        # customers whose candidate set contains another's are covered for free
        order = sorted(range(n_customers), key=lambda e: (_popcount(cands[e]), e))
        kept: list[int] = []
        for e in order:
            ce = cands[e]
            if not any(cands[k] & ce == cands[k] for k in kept):
                kept.append(e)
        self.elements = kept
        self.full = sum(1 << e for e in kept)
        self.covers = [cov & self.full for cov in covers]
        self.cands = cands
        # facilities whose cover is contained in another's are never needed for feasibility
        fac_order = sorted(range(self.n_fac), key=lambda i: (-_popcount(self.covers[i]), i))
        useful: list[int] = []
        for i in fac_order:
            ci = self.covers[i]
            if ci and not any(self.covers[j] & ci == ci for j in useful):
                useful.append(i)
        useful_mask = sum(1 << i for i in useful)
        self.search_cands = {e: self._members(cands[e] & useful_mask) for e in kept}
        self.search_cand_mask = {e: cands[e] & useful_mask for e in kept}
        self.fail: dict[int, int] = {}
        self.nodes = 0

    @staticmethod
    def _members(mask: int) -> list[int]:
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def lower_bound(self, U: int) -> int:
        used = 0
        lb = 0
        for e in self.elements:
            if U >> e & 1:
                c = self.search_cand_mask[e]
                if not c & used:
                    lb += 1
                    used |= c
        return lb

    def search(self, U: int, k: int) -> list[int] | None:
        """A list of at most ``k`` facilities covering ``U``, or None."""
        if U == 0:
            return []
        if k <= 0:
            return None
        if self.fail.get(U, -1) >= k:
            return None
        self.nodes += 1
        covers = self.covers
        if k == 1:
            for e in self.elements:
                if U >> e & 1:
                    for i in self.search_cands[e]:
                        if covers[i] & U == U:
                            return [i]
                    break
            self._mark(U, k)
            return None
        if self.lower_bound(U) > k:
            self._mark(U, k)
            return None
        branch = next(e for e in self.elements if U >> e & 1)
        opts = []
        for i in self.search_cands[branch]:
            opts.append((covers[i] & U, i))
        # drop candidates dominated at this node
        opts.sort(key=lambda t: (-_popcount(t[0]), t[1]))
        kept: list[tuple[int, int]] = []
        for m, i in opts:
            if not any(km & m == m for km, _ in kept):
                kept.append((m, i))
        for m, i in kept:
            rest = self.search(U & ~m, k - 1)
            if rest is not None:
                return [i] + rest
        self._mark(U, k)
        return None

    def _mark(self, U: int, k: int) -> None:
        if self.fail.get(U, -1) < k:
            self.fail[U] = k


def _cover_search(d: np.ndarray, r: float) -> _CoverSearch:
    return _CoverSearch(_bits(d <= r), d.shape[1])


def greedy_pcenter(d, p) -> PCenterResult:
    """Greedy upper bound: repeatedly open the facility that shrinks the radius most."""
    d = _check(d, p)
    best = np.full(d.shape[1], np.inf)
    chosen: list[int] = []
    for _ in range(p):
        trial = np.minimum(best[None, :], d).max(axis=1)
        if chosen:
            trial[chosen] = np.inf
        i = int(np.argmin(trial))
        chosen.append(i)
        best = np.minimum(best, d[i])
    return PCenterResult(tuple(sorted(chosen)), float(best.max()))


def lex_smallest_cover(d: np.ndarray, r: float, p: int, search: _CoverSearch | None = None):
    """Lexicographically smallest p-set of facilities with radius at most ``r``, or None."""
    search = search or _cover_search(d, r)
    if not search.coverable or search.search(search.full, p) is None:
        return None
    n = d.shape[0]
    covers = search.covers
    chosen: list[int] = []
    U = search.full
    start = 0
    while len(chosen) < p:
        slots = p - len(chosen) - 1
        for i in range(start, n - slots):
            rest = U & ~covers[i]
            if search.search(rest, slots) is not None:
                chosen.append(i)
                U = rest
                start = i + 1
                break
        else:  # pragma: no cover - extendability is guaranteed by the first search
            raise AssertionError("lexicographic completion failed")
    return tuple(chosen)


def solve_pcenter(d, p: int, hint: float | None = None) -> PCenterResult:
    """Optimal p-center radius and the lexicographically smallest optimal facility set.

    ``hint`` is an optional guess of the optimal radius (e.g. from a similar
    matrix); it only changes where the search starts, never the answer.
    """
    d = _check(d, p)
    n_fac = d.shape[0]
    floor = float(d.min(axis=0).max())
    if p == n_fac:
        return PCenterResult(tuple(range(n_fac)), floor)
    values = np.unique(d)
    ub = greedy_pcenter(d, p).radius
    lo = int(np.searchsorted(values, floor))
    hi = int(np.searchsorted(values, ub))

    cache: dict[int, _CoverSearch] = {}

    def feasible(idx: int) -> bool:
        s = _cover_search(d, float(values[idx]))
        ok = s.coverable and s.search(s.full, p) is not None
        if ok:
            cache[idx] = s
        return ok

    # invariant: values[hi] feasible; everything below lo infeasible
    if hint is not None:
        h = int(np.searchsorted(values, hint))
        if lo <= h < hi:
            if feasible(h):
                hi = h
                # gallop downwards from the hint
                step = 1
                while hi - step >= lo and feasible(hi - step):
                    hi -= step
                    step *= 2
                lo = max(lo, hi - step + 1)
            else:
                lo = h + 1
                step = 1
                while lo + step - 1 < hi and not feasible(lo + step - 1):
                    lo += step
                    step *= 2
                hi = min(hi, lo + step - 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid + 1
    r = float(values[hi])
    search = cache.get(hi) or _cover_search(d, r)
    best = lex_smallest_cover(d, r, p, search)
    return PCenterResult(best, r)


def brute_force_pcenter(d, p: int, budget: int = BRUTE_FORCE_BUDGET) -> PCenterResult:
    """Exhaustive enumeration of all p-subsets (test oracle)."""
    d = _check(d, p)
    n = d.shape[0]
    if math.comb(n, p) > budget:
        raise BudgetExceededError(f"C({n},{p}) = {math.comb(n, p)} subsets exceeds budget {budget}")
    best_r = math.inf
    best_set: tuple[int, ...] = ()
    for combo in itertools.combinations(range(n), p):
        r = float(d[list(combo)].min(axis=0).max())
        if r < best_r:
            best_r, best_set = r, combo
    return PCenterResult(best_set, best_r)
