"""Exact counting, ranking and unranking inside block-frequency type classes.

A type class is the set of sequences sharing a fixed m-symbol prefix and a
fixed table of (m+1)-block counts.  Such a sequence is exactly a walk on the
context graph (nodes = contexts in A**m, one edge per counted block), so

- the class size is the number of walks from the prefix context that consume
  every edge exactly its count: a factorial prefactor times the number of
  spanning in-branchings rooted at the walk's forced end context
  (directed matrix-tree theorem applied to the count Laplacian);
- the lexicographic rank is the running sum, over positions, of the
  completion counts of all smaller-symbol branches.

Completion counts along a walk differ from the current count by one edge
decrement, so branch evaluations and steps are rank-one updates of the
Laplacian minor.  We keep its determinant and adjugate as exact integers and
update both per step (matrix determinant lemma plus the adjugate update
identity), which makes rank/unrank O(alphabet * k**2) big-integer work per
symbol instead of a fresh determinant per branch.

All arithmetic is exact; counts overflow 64 bits almost immediately and are
kept as Python ints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import IndexOutOfRangeError, InfeasibleError, TooShortError, ValidationError
from .models import Alphabet, SymbolSequence


@dataclass(frozen=True)
class BlockFrequencyVector:
    """(m+1)-block count table of a sequence plus its m-symbol prefix.

    counts[j] is the number of windows equal to the j-th element of A**(m+1)
    (context digits most significant, next symbol least significant); they
    sum to n - m.
    """

    alphabet: Alphabet
    order: int
    prefix: tuple[int, ...]
    counts: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        l = self.alphabet.size
        if len(self.prefix) != self.order:
            raise ValidationError("descriptor: prefix length must equal order")
        if len(self.counts) != l ** (self.order + 1):
            raise ValidationError("descriptor: counts must have l**(m+1) entries")
        if any(c < 0 for c in self.counts):
            raise ValidationError("descriptor: counts must be non-negative")
        if sum(self.counts) != self.n - self.order:
            raise ValidationError("descriptor: counts must sum to n - m")

    @property
    def l(self) -> int:
        return self.alphabet.size

    def frequencies(self) -> np.ndarray:
        denom = max(self.n - self.order, 1)
        return np.asarray(self.counts, dtype=float) / denom


def block_frequencies(seq: SymbolSequence, m: int) -> BlockFrequencyVector:
    """Count all (m+1)-blocks of the sequence (positions m+1..n)."""
    if m < 0:
        raise ValidationError("m must be non-negative")
    n = len(seq)
    if n < m:
        raise TooShortError(f"sequence of length {n} is shorter than m = {m}")
    l = seq.alphabet.size
    data = seq.data
    n_windows = n - m
    if n_windows == 0:
        counts = np.zeros(l ** (m + 1), dtype=np.int64)
    else:
        codes = np.zeros(n_windows, dtype=np.int64)
        for j in range(m + 1):
            codes = codes * l + data[j : j + n_windows]
        counts = np.bincount(codes, minlength=l ** (m + 1)).astype(np.int64)
    return BlockFrequencyVector(
        alphabet=seq.alphabet,
        order=m,
        prefix=tuple(int(v) for v in data[:m]),
        counts=tuple(int(c) for c in counts),
        n=n,
    )


# -- integer linear algebra ---------------------------------------------------


def _det_bareiss(mat: list[list[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    k = len(mat)
    if k == 0:
        return 1
    a = [row[:] for row in mat]
    sign = 1
    prev = 1
    for r in range(k - 1):
        if a[r][r] == 0:
            for i in range(r + 1, k):
                if a[i][r] != 0:
                    a[r], a[i] = a[i], a[r]
                    sign = -sign
                    break
            else:
                return 0
        arr = a[r]
        piv = arr[r]
        for i in range(r + 1, k):
            ai = a[i]
            f = ai[r]
            for j in range(r + 1, k):
                ai[j] = (piv * ai[j] - f * arr[j]) // prev
        prev = piv
    return sign * a[k - 1][k - 1]


def _adjugate(mat: list[list[int]], det: int) -> np.ndarray:
    """Adjugate adj = det * inv of a nonsingular integer matrix (exact)."""
    k = len(mat)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(k)] for i, row in enumerate(mat)]
    for col in range(k):
        piv = None
        for i in range(col, k):
            if aug[i][col] != 0:
                piv = i
                break
        if piv is None:
            raise InfeasibleError("adjugate of singular matrix requested")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [v * inv_p for v in aug[col]]
        for i in range(k):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                row_c = aug[col]
                aug[i] = [v - f * w for v, w in zip(aug[i], row_c)]
    adj = np.empty((k, k), dtype=object)
    for i in range(k):
        for j in range(k):
            val = aug[i][j + k] * det
            if val.denominator != 1:
                raise InfeasibleError("adjugate entries failed to clear denominators")
            adj[i, j] = int(val)
    return adj


# -- walk counting ------------------------------------------------------------


class _WalkCounter:
    """Incremental completion counter over a block-count walk state.

    Tracks the remaining counts, the current context, the completion count W,
    and (for m >= 1) the determinant/adjugate of the count Laplacian minor at
    the forced end context.
    """

    def __init__(self, desc: BlockFrequencyVector, need_adjugate: bool) -> None:
        self.l = desc.l
        self.m = desc.order
        self.k = self.l**self.m
        self.counts = list(desc.counts)
        self.total = sum(self.counts)
        self.ctx = 0
        for s in desc.prefix:
            self.ctx = self.ctx * self.l + s
        self.r = [0] * self.k
        q = [0] * self.k
        for c in range(self.k):
            base = c * self.l
            for x in range(self.l):
                cnt = self.counts[base + x]
                if cnt:
                    self.r[c] += cnt
                    q[self._succ(c, x)] += cnt
        # forced end context from the flow condition
        self.end = self.ctx
        if self.total == 0:
            self.feasible = True
            self.w = 1
            self.d = 1
            self.adj = None
            return
        diffs = {c: self.r[c] - q[c] for c in range(self.k) if self.r[c] != q[c]}
        if not diffs:
            self.feasible = True  # closed walk back to the start context
        elif len(diffs) == 2 and diffs.get(self.ctx) == 1:
            ends = [c for c, dd in diffs.items() if dd == -1]
            self.feasible = len(ends) == 1
            if self.feasible:
                self.end = ends[0]
        else:
            self.feasible = False
        if self.feasible and self.r[self.ctx] == 0:
            self.feasible = False
        if not self.feasible:
            self.w = 0
            self.d = 0
            self.adj = None
            return

        if self.m == 0:
            self.d = 1
            self.adj = None
            self.w = self._multinomial()
            return
        a = self._laplacian_minor()
        self.d = _det_bareiss(a)
        if self.d == 0:
            self.feasible = False
            self.w = 0
            self.adj = None
            return
        self.adj = _adjugate(a, self.d) if need_adjugate else None
        num, den = self._prefactor_parts()
        self.w = num * self.d // den

    # helpers ------------------------------------------------------------

    def _succ(self, c: int, x: int) -> int:
        if self.m == 0:
            return 0
        return (c % (self.l ** (self.m - 1))) * self.l + x

    def _pos(self, c: int) -> int:
        return c if c < self.end else c - 1

    def _laplacian_minor(self) -> list[list[int]]:
        """Out-degree Laplacian of the remaining multigraph, row/col `end` removed.

        Rows of inactive contexts (no remaining out-edges) are identity rows,
        which is equivalent to deleting them.
        """
        size = self.k - 1
        a = [[0] * size for _ in range(size)]
        for c in range(self.k):
            if c == self.end:
                continue
            i = self._pos(c)
            if self.r[c] == 0:
                a[i][i] = 1
                continue
            a[i][i] = self.r[c]
            base = c * self.l
            for x in range(self.l):
                cnt = self.counts[base + x]
                if cnt:
                    c2 = self._succ(c, x)
                    if c2 != self.end:
                        a[i][self._pos(c2)] -= cnt
        return a

    def _multinomial(self) -> int:
        w = math.factorial(self.total)
        for cnt in self.counts:
            if cnt > 1:
                w //= math.factorial(cnt)
        return w

    def _prefactor_parts(self) -> tuple[int, int]:
        """W = num * det // den; num/den alone need not be an integer."""
        num = 1
        for c in range(self.k):
            rc = self.r[c]
            if rc == 0:
                continue
            num *= math.factorial(rc if c == self.end else rc - 1)
        den = 1
        for cnt in self.counts:
            if cnt > 1:
                den *= math.factorial(cnt)
        return num, den

    # stepping -----------------------------------------------------------

    def _delta_row(self, c: int, c2: int) -> tuple[int, int]:
        """(diagonal, off-diagonal) change of Laplacian row c when edge (c, c2) is consumed."""
        if c2 == c:
            return 0, 0  # self-loop: out-degree and loop count cancel
        ddiag = -1 if self.r[c] >= 2 else 0  # at r == 1 the row turns into an identity row
        doff = 1 if c2 != self.end else 0
        return ddiag, doff

    def _branch_det(self, x: int) -> int:
        """Determinant after hypothetically consuming edge (ctx, x)."""
        c = self.ctx
        if c == self.end:
            return self.d  # in-branchings ignore the root's out-edges
        c2 = self._succ(c, x)
        ddiag, doff = self._delta_row(c, c2)
        pc = self._pos(c)
        dd = self.d
        if ddiag:
            dd += ddiag * self.adj[pc, pc]
        if doff:
            dd += doff * self.adj[self._pos(c2), pc]
        return dd

    def branch_count(self, x: int) -> int:
        """Completions after taking symbol x from the current context."""
        c = self.ctx
        cnt = self.counts[c * self.l + x]
        if cnt == 0 or self.w == 0:
            return 0
        if self.m == 0:
            return self.w * cnt // self.total
        denom = self.r[c] if c == self.end else max(self.r[c] - 1, 1)
        dd = self._branch_det(x)
        if dd <= 0:
            return 0
        return self.w * cnt * dd // (denom * self.d)

    def advance(self, x: int) -> None:
        """Consume symbol x for real, updating all incremental state."""
        c = self.ctx
        idx = c * self.l + x
        cnt = self.counts[idx]
        if cnt == 0:
            raise InfeasibleError("advance through a zero-count block")
        c2 = self._succ(c, x)
        if self.m == 0:
            self.w = self.w * cnt // self.total
        else:
            denom = self.r[c] if c == self.end else max(self.r[c] - 1, 1)
            dd = self._branch_det(x)
            self.w = self.w * cnt * dd // (denom * self.d)
            if c != self.end and self.adj is not None:
                ddiag, doff = self._delta_row(c, c2)
                if ddiag or doff:
                    pc = self._pos(c)
                    col = self.adj[:, pc].copy()
                    if ddiag and doff:
                        roww = doff * self.adj[self._pos(c2), :] + ddiag * self.adj[pc, :]
                    elif ddiag:
                        roww = ddiag * self.adj[pc, :]
                    else:
                        roww = doff * self.adj[self._pos(c2), :]
                    self.adj = (dd * self.adj - np.outer(col, roww)) // self.d
                    self.d = dd
        self.counts[idx] = cnt - 1
        self.r[c] -= 1
        self.total -= 1
        self.ctx = c2


def type_class_size(desc: BlockFrequencyVector) -> int:
    """Exact number of sequences sharing the descriptor (0 if infeasible)."""
    return _WalkCounter(desc, need_adjugate=False).w


def rank_in_type_class(seq: SymbolSequence, m: int) -> int:
    """Lexicographic index of the sequence inside its own type class."""
    desc = block_frequencies(seq, m)
    walker = _WalkCounter(desc, need_adjugate=True)
    if walker.w == 0:
        raise InfeasibleError("sequence descriptor is infeasible")
    rank = 0
    l = desc.l
    data = seq.data
    for t in range(m, len(seq)):
        z = int(data[t])
        base = walker.ctx * l
        for x in range(z):
            if walker.counts[base + x]:
                rank += walker.branch_count(x)
        walker.advance(z)
    return rank


def unrank(desc: BlockFrequencyVector, index: int) -> SymbolSequence:
    """Inverse of rank_in_type_class for the same descriptor."""
    walker = _WalkCounter(desc, need_adjugate=True)
    size = walker.w
    if size == 0:
        raise InfeasibleError("descriptor is infeasible (empty type class)")
    if not 0 <= index < size:
        raise IndexOutOfRangeError(f"index {index} outside [0, {size})")
    l = desc.l
    out = list(desc.prefix)
    remaining = index
    for _ in range(desc.n - desc.order):
        base = walker.ctx * l
        for x in range(l):
            if not walker.counts[base + x]:
                continue
            b = walker.branch_count(x)
            if remaining < b:
                out.append(x)
                walker.advance(x)
                break
            remaining -= b
        else:
            raise InfeasibleError("unrank ran out of branches (corrupt descriptor)")
    return SymbolSequence(desc.alphabet, np.array(out, dtype=np.int64))


def enumerate_type_class(desc: BlockFrequencyVector, limit: int | None = None) -> list[tuple[int, ...]]:
    """Brute-force enumeration in lexicographic order (test oracle; small n only)."""
    l = desc.l
    out: list[tuple[int, ...]] = []

    counts = list(desc.counts)
    ctx0 = 0
    for s in desc.prefix:
        ctx0 = ctx0 * l + s

    def rec(ctx: int, acc: list[int], left: int) -> None:
        if limit is not None and len(out) >= limit:
            return
        if left == 0:
            out.append(tuple(desc.prefix) + tuple(acc))
            return
        base = ctx * l
        for x in range(l):
            if counts[base + x]:
                counts[base + x] -= 1
                acc.append(x)
                nxt = (ctx % (l ** (desc.order - 1))) * l + x if desc.order else 0
                rec(nxt, acc, left - 1)
                acc.pop()
                counts[base + x] += 1

    rec(ctx0, [], desc.n - desc.order)
    return out
