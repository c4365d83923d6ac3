"""Stationary finite-alphabet source models and their samplers.

Provides the four source families used throughout the toolkit:

- ``MarkovModel``: order-m finite chains (m = 0 is the iid case), with the
  augmented context chain over A**m, exact stationary law, and exact
  conditional probabilities.
- ``HMMModel``: hidden Markov sources with strictly positive transition and
  emission tables; the conditioning constants eps (min q / max q) and eta
  (worst emission ratio) are recomputed from the tables, never trusted.
- ``BlockwiseModel``: the heavy-tail block construction (all-zero blocks
  with probability 1/2, fair-coin blocks otherwise, power-law block
  lengths, uniform left shift of the first block).
- ``SymbolSequence``: a validated symbol-index array tied to its alphabet.

Models are immutable after validation; sampling is a pure function of
(model, n, seed), so replicates can run concurrently without shared state.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from math import gcd

import numpy as np
from scipy.special import zeta as _hurwitz_zeta

from .errors import BadContextError, NonErgodicError, ValidationError
from .seeding import derive_seed, generator_for

ROW_SUM_TOL = 1e-12
_CTX_SEP = ","


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbol labels; index <-> label is fixed."""

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) < 2:
            raise ValidationError("alphabet: need at least 2 symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValidationError("alphabet: symbol labels must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, label: str) -> int:
        try:
            return self.symbols.index(label)
        except ValueError:
            raise BadContextError(f"alphabet: unknown symbol {label!r}") from None


BINARY = Alphabet(("0", "1"))


@dataclass(frozen=True)
class SymbolSequence:
    """Finite symbol-index array over an alphabet."""

    alphabet: Alphabet
    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.int64)
        if arr.ndim != 1:
            raise ValidationError("sequence data must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= self.alphabet.size):
            raise ValidationError("sequence contains out-of-alphabet indices")
        object.__setattr__(self, "data", arr)

    def __len__(self) -> int:
        return int(self.data.size)

    def labels(self) -> list[str]:
        return [self.alphabet.symbols[i] for i in self.data]

    @staticmethod
    def from_labels(alphabet: Alphabet, labels: list[str]) -> "SymbolSequence":
        return SymbolSequence(alphabet, np.array([alphabet.index(s) for s in labels], dtype=np.int64))


def _check_strongly_connected(support: np.ndarray) -> bool:
    """Support is a boolean adjacency matrix."""
    k = support.shape[0]

    def reach(adj: np.ndarray) -> np.ndarray:
        seen = np.zeros(k, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in np.nonzero(adj[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        return seen

    return bool(reach(support).all() and reach(support.T).all())


def _period(support: np.ndarray) -> int:
    """gcd of cycle lengths of a strongly connected digraph."""
    k = support.shape[0]
    depth = -np.ones(k, dtype=np.int64)
    depth[0] = 0
    queue = [0]
    while queue:
        u = queue.pop(0)
        for v in np.nonzero(support[u])[0]:
            if depth[v] < 0:
                depth[v] = depth[u] + 1
                queue.append(int(v))
    g = 0
    for u in range(k):
        for v in np.nonzero(support[u])[0]:
            g = gcd(g, int(depth[u] + 1 - depth[v]))
    return abs(g) if g else 1


class MarkovModel:
    """Finite-alphabet order-m Markov source (m = 0: iid).

    ``transitions`` has one row per context in A**m (contexts enumerated in
    base-l order, oldest symbol most significant) and one column per symbol.
    The initial context law defaults to the stationary law of the augmented
    context chain; a non-stationary override is allowed but flagged, since
    every downstream result assumes stationarity.
    """

    def __init__(
        self,
        alphabet: Alphabet,
        order: int,
        transitions: np.ndarray,
        initial_law: np.ndarray | None = None,
        ergodic: bool = True,
    ) -> None:
        if order < 0:
            raise ValidationError("order: must be non-negative")
        self.alphabet = alphabet
        self.order = int(order)
        l = alphabet.size
        k = l**self.order
        trans = np.asarray(transitions, dtype=float)
        if trans.shape != (k, l):
            raise ValidationError(
                f"transitions: expected shape ({k}, {l}) for order {order}, got {trans.shape}"
            )
        for c in range(k):
            row = trans[c]
            if (row < 0).any() or (row > 1).any():
                raise ValidationError(f"transitions[{self.context_key(c)!r}]: entries must lie in [0, 1]")
            if abs(row.sum() - 1.0) > ROW_SUM_TOL:
                raise ValidationError(
                    f"transitions[{self.context_key(c)!r}]: row sums to {row.sum()!r}, expected 1 within {ROW_SUM_TOL}"
                )
        self.transitions = trans
        self.transitions.setflags(write=False)

        kernel = self.context_kernel()
        support = kernel > 0
        if not _check_strongly_connected(support):
            raise NonErgodicError("context chain is reducible")
        self.ergodic = bool(ergodic)
        if self.ergodic and _period(support) != 1:
            # irreducible periodic chains still have a unique stationary law;
            # pass ergodic=False to build one (mixing analytics will refuse it)
            raise NonErgodicError("context chain is periodic")

        self._stationary = _solve_stationary(kernel)
        self.stationary_flag = initial_law is None
        if initial_law is None:
            self.initial_law = self._stationary
        else:
            init = np.asarray(initial_law, dtype=float)
            if init.shape != (k,):
                raise ValidationError(f"initial_law: expected {k} entries, got {init.shape}")
            if (init < 0).any() or abs(init.sum() - 1.0) > ROW_SUM_TOL:
                raise ValidationError("initial_law: not a probability vector")
            self.initial_law = init
        self.initial_law.setflags(write=False)

    # -- context indexing -------------------------------------------------

    @property
    def n_contexts(self) -> int:
        return self.alphabet.size**self.order

    def context_index(self, symbols: tuple[int, ...]) -> int:
        if len(symbols) != self.order:
            raise BadContextError(f"context: expected {self.order} symbols, got {len(symbols)}")
        idx = 0
        for s in symbols:
            if not 0 <= s < self.alphabet.size:
                raise BadContextError(f"context: symbol index {s} out of alphabet")
            idx = idx * self.alphabet.size + s
        return idx

    def context_symbols(self, idx: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.order):
            out.append(idx % self.alphabet.size)
            idx //= self.alphabet.size
        return tuple(reversed(out))

    def context_key(self, idx: int) -> str:
        return _CTX_SEP.join(self.alphabet.symbols[s] for s in self.context_symbols(idx))

    def next_context(self, ctx: int, symbol: int) -> int:
        l = self.alphabet.size
        if self.order == 0:
            return 0
        return (ctx % (l ** (self.order - 1))) * l + symbol

    def context_kernel(self) -> np.ndarray:
        """Transition matrix of the augmented context chain over A**m."""
        k, l = self.n_contexts, self.alphabet.size
        kernel = np.zeros((k, k))
        for c in range(k):
            for x in range(l):
                kernel[c, self.next_context(c, x)] += self.transitions[c, x]
        return kernel

    # -- laws --------------------------------------------------------------

    def stationary_context_law(self) -> np.ndarray:
        return self._stationary

    def marginal_symbol_law(self) -> np.ndarray:
        """Stationary law of a single symbol."""
        if self.order == 0:
            return self.transitions[0].copy()
        l = self.alphabet.size
        out = np.zeros(l)
        for c, p in enumerate(self._stationary):
            out[self.context_symbols(c)[-1]] += p
        return out

    def conditional_given_window(self, window: tuple[int, ...]) -> np.ndarray:
        """Exact law of the next symbol given only the last len(window) symbols.

        For windows of length >= m this is a table row; shorter windows are
        marginalized over the stationary context law.
        """
        j = len(window)
        if j >= self.order:
            return self.transitions[self.context_index(tuple(window[j - self.order:]))].copy()
        l = self.alphabet.size
        num = np.zeros(l)
        mass = 0.0
        for c, p in enumerate(self._stationary):
            if p == 0.0:
                continue
            if self.context_symbols(c)[self.order - j:] == tuple(window):
                num += p * self.transitions[c]
                mass += p
        if mass == 0.0:
            raise BadContextError("window has zero stationary probability")
        return num / mass

    def log2_transitions(self) -> np.ndarray:
        """log2 of the transition table with 0 -> -inf."""
        with np.errstate(divide="ignore"):
            return np.log2(self.transitions)

    def sequence_log2_prob(self, seq: SymbolSequence) -> float:
        """log2 P(seq) under the stationary model (prefix from the context law)."""
        n = len(seq)
        m = self.order
        if n == 0:
            return 0.0
        data = seq.data
        if n < m:
            # marginal of a short prefix: sum stationary contexts agreeing on it
            mass = 0.0
            for c, p in enumerate(self._stationary):
                if self.context_symbols(c)[:n] == tuple(int(v) for v in data):
                    mass += p
            return float(np.log2(mass)) if mass > 0 else float("-inf")
        logp = 0.0
        if m > 0:
            logp += float(np.log2(self.initial_law[self.context_index(tuple(int(v) for v in data[:m]))]))
        ctx = self.context_index(tuple(int(v) for v in data[:m])) if m > 0 else 0
        logt = self.log2_transitions()
        for t in range(m, n):
            x = int(data[t])
            logp += float(logt[ctx, x])
            ctx = self.next_context(ctx, x)
        return logp

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "type": "markov",
            "alphabet": list(self.alphabet.symbols),
            "order": self.order,
            "transitions": {self.context_key(c): self.transitions[c].tolist() for c in range(self.n_contexts)},
        }
        if not self.ergodic:
            d["ergodic"] = False
        if not self.stationary_flag:
            d["initial_law"] = self.initial_law.tolist()
        return d

    @staticmethod
    def iid(probs, alphabet: Alphabet | None = None) -> "MarkovModel":
        probs = np.asarray(probs, dtype=float)
        if alphabet is None:
            alphabet = Alphabet(tuple(str(i) for i in range(probs.size)))
        return MarkovModel(alphabet, 0, probs.reshape(1, -1))


def _solve_stationary(kernel: np.ndarray) -> np.ndarray:
    """Solve pi = pi K with sum 1; kernel must be ergodic."""
    k = kernel.shape[0]
    if k == 1:
        return np.ones(1)
    a = kernel.T - np.eye(k)
    a[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    if (pi < 0).any():
        raise NonErgodicError("stationary solve produced negative entries")
    pi = pi / pi.sum()
    if np.max(np.abs(pi @ kernel - pi)) > ROW_SUM_TOL:
        raise NonErgodicError("stationary law residual above tolerance")
    return pi


def stationary_distribution(model: MarkovModel) -> np.ndarray:
    """Stationary law of the augmented context chain (pi = pi K, sum 1)."""
    return model.stationary_context_law()


class HMMModel:
    """Hidden Markov source with strictly positive tables.

    eps = min q / max q and eta = sup_y (max_x g(y|x) / min_x g(y|x)) are
    recomputed from the stored tables on construction.
    """

    def __init__(self, hidden_kernel: np.ndarray, emissions: np.ndarray, alphabet: Alphabet | None = None) -> None:
        q = np.asarray(hidden_kernel, dtype=float)
        g = np.asarray(emissions, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValidationError("hidden_kernel: must be a square matrix")
        h = q.shape[0]
        if g.ndim != 2 or g.shape[0] != h:
            raise ValidationError("emissions: one row per hidden state required")
        if (q <= 0).any():
            bad = np.argwhere(q <= 0)[0]
            raise ValidationError(f"hidden_kernel[{bad[0]},{bad[1]}]: entries must be strictly positive")
        if (g <= 0).any():
            bad = np.argwhere(g <= 0)[0]
            raise ValidationError(f"emissions[{bad[0]},{bad[1]}]: entries must be strictly positive")
        for i in range(h):
            if abs(q[i].sum() - 1.0) > ROW_SUM_TOL:
                raise ValidationError(f"hidden_kernel[{i}]: row sums to {q[i].sum()!r}, expected 1")
            if abs(g[i].sum() - 1.0) > ROW_SUM_TOL:
                raise ValidationError(f"emissions[{i}]: row sums to {g[i].sum()!r}, expected 1")
        self.hidden_kernel = q
        self.emissions = g
        self.hidden_kernel.setflags(write=False)
        self.emissions.setflags(write=False)
        if alphabet is None:
            alphabet = Alphabet(tuple(str(i) for i in range(g.shape[1])))
        if alphabet.size != g.shape[1]:
            raise ValidationError("alphabet size does not match emission columns")
        self.alphabet = alphabet
        self.epsilon = float(q.min() / q.max())
        self.eta = float((g.max(axis=0) / g.min(axis=0)).max())
        self._stationary = _solve_stationary(q)

    @property
    def n_hidden(self) -> int:
        return self.hidden_kernel.shape[0]

    def stationary_hidden_law(self) -> np.ndarray:
        return self._stationary

    def to_dict(self) -> dict:
        return {
            "type": "hmm",
            "alphabet": list(self.alphabet.symbols),
            "hidden_kernel": self.hidden_kernel.tolist(),
            "emissions": self.emissions.tolist(),
        }


class BlockwiseModel:
    """Heavy-tail blockwise source: P(block length = t) ~ 1 / t**(3/2 - eps).

    Block i is all zeros when a fair coin Y_i lands 1, otherwise iid fair
    bits; the first block is shortened by a uniform shift for the
    stationarization. Lengths are drawn by inverse CDF; a draw above
    ``tail_cap`` is recorded and redrawn (the documented truncation rule),
    which is equivalent to sampling the renormalized capped law.
    """

    def __init__(self, epsilon: float, tail_cap: int = 10**8) -> None:
        if not 0.0 < epsilon < 1.0 / 6.0:
            raise ValidationError("epsilon must lie in (0, 1/6)")
        if tail_cap < 1:
            raise ValidationError("tail_cap: must be a positive integer")
        self.epsilon = float(epsilon)
        self.tail_cap = int(tail_cap)
        self.exponent = 1.5 - self.epsilon
        self.alphabet = BINARY
        # zeta(s, a) = sum_{k>=0} (k+a)^-s; total and truncated normalizers
        self._total_mass = float(_hurwitz_zeta(self.exponent, 1))
        self._tail_mass = float(_hurwitz_zeta(self.exponent, self.tail_cap + 1))
        self.normalizer = 1.0 / (self._total_mass - self._tail_mass)
        self.truncated_mass = self._tail_mass / self._total_mass

    def length_pmf(self, t) -> np.ndarray:
        """Renormalized pmf of the block length on 1..tail_cap."""
        t = np.asarray(t, dtype=float)
        out = np.where((t >= 1) & (t <= self.tail_cap), self.normalizer * t**-self.exponent, 0.0)
        return out

    def _untruncated_cdf_complement(self, t: float) -> float:
        """P(tau > t) under the untruncated power law."""
        return float(_hurwitz_zeta(self.exponent, math.floor(t) + 1)) / self._total_mass

    def draw_length_raw(self, u: float) -> int:
        """Inverse CDF of the *untruncated* law at uniform u (may exceed the cap)."""
        # bracket by doubling, then bisect; tail sums via Hurwitz zeta
        lo, hi = 1, 1
        while self._untruncated_cdf_complement(hi) > 1.0 - u:
            lo = hi
            hi *= 2
            if hi > 2 * self.tail_cap:
                break
        while lo < hi:
            mid = (lo + hi) // 2
            if self._untruncated_cdf_complement(mid) > 1.0 - u:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def to_dict(self) -> dict:
        return {"type": "blockwise", "epsilon": self.epsilon, "tail_cap": self.tail_cap}


Model = MarkovModel | HMMModel | BlockwiseModel


@dataclass
class BlockLog:
    """Per-block record of a blockwise sample: boundaries are reconstructible."""

    starts: list[int] = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    zero_labels: list[int] = field(default_factory=list)  # Y_i: 1 = all-zero block
    completed: list[bool] = field(default_factory=list)
    theta: int = 0
    first_tau: int = 0
    n_tail_capped: int = 0
    truncated_mass: float = 0.0


def conditional_law(model: MarkovModel, context: tuple[int, ...] | list[int] | list[str]) -> np.ndarray:
    """Exact conditional law P(. | context).

    Context must have length m; order-0 models ignore whatever context is
    supplied and return the single marginal row.
    """
    if model.order == 0:
        return model.transitions[0].copy()
    if context and isinstance(context[0], str):
        context = tuple(model.alphabet.index(s) for s in context)  # type: ignore[arg-type]
    context = tuple(int(c) for c in context)
    if len(context) != model.order:
        raise BadContextError(f"context: expected {model.order} symbols, got {len(context)}")
    return model.transitions[model.context_index(context)].copy()


# -- sampling ---------------------------------------------------------------


def _draw_index(cum: list[float], u: float) -> int:
    return bisect_right(cum, u)


def sample(model: MarkovModel | HMMModel, n: int, seed: int):
    """Sample n symbols; deterministic in (model, n, seed).

    Markov models return a SymbolSequence; HMM models return
    (SymbolSequence, hidden_path).
    """
    if n < 0:
        raise ValidationError("n must be non-negative")
    rng = generator_for(seed)
    if isinstance(model, HMMModel):
        return _sample_hmm(model, n, rng)
    if isinstance(model, BlockwiseModel):
        raise ValidationError("use sample_blockwise for blockwise models")
    return _sample_markov(model, n, rng)


def _sample_markov(model: MarkovModel, n: int, rng: np.random.Generator) -> SymbolSequence:
    l = model.alphabet.size
    m = model.order
    if n == 0:
        return SymbolSequence(model.alphabet, np.empty(0, dtype=np.int64))
    if m == 0:
        cum = np.cumsum(model.transitions[0])
        data = np.searchsorted(cum, rng.random(n), side="right").astype(np.int64)
        np.clip(data, 0, l - 1, out=data)
        return SymbolSequence(model.alphabet, data)
    ctx = int(np.searchsorted(np.cumsum(model.initial_law), rng.random(), side="right"))
    ctx = min(ctx, model.n_contexts - 1)
    # emit the initial context symbols first, then walk the chain
    out = list(model.context_symbols(ctx))[:n]
    if len(out) < n:
        cum_rows = [list(np.cumsum(row)[:-1]) for row in model.transitions]
        uniforms = rng.random(n - m)
        lowm = l ** (m - 1)
        for t in range(n - m):
            x = _draw_index(cum_rows[ctx], float(uniforms[t]))
            out.append(x)
            ctx = (ctx % lowm) * l + x
    return SymbolSequence(model.alphabet, np.array(out[:n], dtype=np.int64))


def _sample_hmm(model: HMMModel, n: int, rng: np.random.Generator):
    if n == 0:
        return SymbolSequence(model.alphabet, np.empty(0, dtype=np.int64)), np.empty(0, dtype=np.int64)
    h = int(np.searchsorted(np.cumsum(model.stationary_hidden_law()), rng.random(), side="right"))
    h = min(h, model.n_hidden - 1)
    cum_q = [list(np.cumsum(row)[:-1]) for row in model.hidden_kernel]
    cum_g = [list(np.cumsum(row)[:-1]) for row in model.emissions]
    hid = np.empty(n, dtype=np.int64)
    obs = np.empty(n, dtype=np.int64)
    u_emit = rng.random(n)
    u_step = rng.random(n)
    for t in range(n):
        hid[t] = h
        obs[t] = _draw_index(cum_g[h], float(u_emit[t]))
        h = _draw_index(cum_q[h], float(u_step[t]))
    return SymbolSequence(model.alphabet, obs), hid


def sample_blockwise(model: BlockwiseModel, n: int, seed: int) -> tuple[SymbolSequence, BlockLog]:
    """Sample n symbols of the blockwise process plus its block log."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    rng = generator_for(seed)
    log = BlockLog(truncated_mass=model.truncated_mass)
    if n == 0:
        return SymbolSequence(model.alphabet, np.empty(0, dtype=np.int64)), log

    def draw_tau() -> int:
        while True:
            tau = model.draw_length_raw(float(rng.random()))
            if tau <= model.tail_cap:
                return tau
            log.n_tail_capped += 1

    chunks: list[np.ndarray] = []
    pos = 0
    first = True
    while pos < n:
        tau = draw_tau()
        if first:
            log.first_tau = tau
            theta = int(rng.integers(0, tau))  # theta | tau_1 ~ unif{0..tau_1-1}
            log.theta = theta
            length = tau - theta
            first = False
        else:
            length = tau
        y = int(rng.integers(0, 2))  # Y_i ~ Bern(1/2): 1 -> all-zero block
        if y == 1:
            block = np.zeros(length, dtype=np.int64)
        else:
            block = (rng.random(length) < 0.5).astype(np.int64)
        take = min(length, n - pos)
        chunks.append(block[:take])
        log.starts.append(pos)
        log.lengths.append(length)
        log.zero_labels.append(y)
        log.completed.append(take == length)
        pos += take
    data = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    return SymbolSequence(model.alphabet, data[:n]), log


def sample_paths(model: MarkovModel, n: int, n_paths: int, base_seed: int, index_offset: int = 0) -> np.ndarray:
    """Sample ``n_paths`` independent length-n paths, vectorized across paths.

    Path r uses the replicate seed derive_seed(base_seed, index_offset + r),
    so individual paths are reproducible in isolation and batched calls
    tile a single run; stepping is vectorized across the replicate axis in
    time chunks for speed.
    """
    if n < 0:
        raise ValidationError("n must be non-negative")
    out = np.empty((n_paths, n), dtype=np.int64)
    if n == 0 or n_paths == 0:
        return out
    l = model.alphabet.size
    m = model.order
    gens = [generator_for(derive_seed(base_seed, index_offset + r)) for r in range(n_paths)]
    if m == 0:
        cum = np.cumsum(model.transitions[0])
        for r, g in enumerate(gens):
            row = np.searchsorted(cum, g.random(n), side="right")
            out[r] = np.clip(row, 0, l - 1)
        return out
    cum_init = np.cumsum(model.initial_law)
    ctx = np.empty(n_paths, dtype=np.int64)
    for r, g in enumerate(gens):
        ctx[r] = min(int(np.searchsorted(cum_init, g.random(), side="right")), model.n_contexts - 1)
    for j in range(min(m, n)):
        digits = (ctx // l ** (m - 1 - j)) % l
        out[:, j] = digits
    cum_rows = np.cumsum(model.transitions, axis=1)
    cum_rows[:, -1] = 1.0 + 1e-9
    lowm = l ** (m - 1)
    chunk = max(1, min(n - m, 1 << 14))
    t = m
    while t < n:
        width = min(chunk, n - t)
        u = np.empty((n_paths, width))
        for r, g in enumerate(gens):
            u[r] = g.random(width)
        for j in range(width):
            rows = cum_rows[ctx]
            x = (rows < u[:, j][:, None]).sum(axis=1)
            np.clip(x, 0, l - 1, out=x)
            out[:, t + j] = x
            ctx = (ctx % lowm) * l + x
        t += width
    return out


# -- model files -------------------------------------------------------------


def model_from_dict(doc: dict) -> Model:
    """Build and validate a model from its JSON document."""
    if not isinstance(doc, dict):
        raise ValidationError("model: document must be a JSON object")
    mtype = doc.get("type")
    if mtype == "markov":
        for key in ("alphabet", "order", "transitions"):
            if key not in doc:
                raise ValidationError(f"model.{key}: missing required field")
        alphabet = Alphabet(tuple(str(s) for s in doc["alphabet"]))
        order = doc["order"]
        if not isinstance(order, int) or order < 0:
            raise ValidationError("model.order: must be a non-negative integer")
        k = alphabet.size**order
        trans = np.zeros((k, l_ := alphabet.size))
        table = doc["transitions"]
        if not isinstance(table, dict):
            raise ValidationError("model.transitions: must map context keys to rows")
        seen = set()
        for key, row in table.items():
            syms = tuple(alphabet.index(s) for s in key.split(_CTX_SEP)) if key else ()
            if len(syms) != order:
                raise ValidationError(f"model.transitions[{key!r}]: context length != order {order}")
            idx = 0
            for s in syms:
                idx = idx * l_ + s
            if not isinstance(row, list) or len(row) != l_:
                raise ValidationError(f"model.transitions[{key!r}]: expected {l_} probabilities")
            trans[idx] = row
            seen.add(idx)
        if len(seen) != k:
            raise ValidationError(f"model.transitions: {k - len(seen)} context rows missing")
        init = doc.get("initial_law")
        extra = set(doc) - {"type", "alphabet", "order", "transitions", "initial_law", "ergodic"}
        if extra:
            raise ValidationError(f"model.{sorted(extra)[0]}: unknown field")
        return MarkovModel(
            alphabet,
            order,
            trans,
            None if init is None else np.asarray(init, dtype=float),
            ergodic=bool(doc.get("ergodic", True)),
        )
    if mtype == "hmm":
        for key in ("hidden_kernel", "emissions"):
            if key not in doc:
                raise ValidationError(f"model.{key}: missing required field")
        extra = set(doc) - {"type", "alphabet", "hidden_kernel", "emissions"}
        if extra:
            raise ValidationError(f"model.{sorted(extra)[0]}: unknown field")
        alphabet = None
        if "alphabet" in doc:
            alphabet = Alphabet(tuple(str(s) for s in doc["alphabet"]))
        return HMMModel(np.asarray(doc["hidden_kernel"], float), np.asarray(doc["emissions"], float), alphabet)
    if mtype == "blockwise":
        extra = set(doc) - {"type", "epsilon", "tail_cap"}
        if extra:
            raise ValidationError(f"model.{sorted(extra)[0]}: unknown field")
        if "epsilon" not in doc:
            raise ValidationError("model.epsilon: missing required field")
        return BlockwiseModel(float(doc["epsilon"]), int(doc.get("tail_cap", 10**8)))
    raise ValidationError(f"model.type: expected 'markov', 'hmm' or 'blockwise', got {mtype!r}")


def load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"model file {path}: invalid JSON ({exc})") from None
    return model_from_dict(doc)
