"""Single-flip log-likelihood stability and the concentration-bound constants.

The stability coefficient M is the largest change of log2 P(x_{1:n}) under
one symbol substitution.  A flip only touches the stationary prefix factor
and the m+1 transition windows covering it, so the exhaustive search over
sequences of length 2m+3 already realizes the supremum over all n; tests
double the cap and assert the value does not move.

Both published variants of the mixing inflation factor are computed and
reported side by side (1 + 24 * sum phi and 1 + 4 * sum phi), as is the
choice of starting the sum at k = 0 or k = 1; none of the four is silently
preferred.  All evaluated bounds are exact plug-in arithmetic over this
codec's concrete header constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import entropy_rate, marginal_entropy, phi_mixing
from .coder import c_prime, log_star, symbol_width
from .errors import (
    BelowThresholdError,
    GuardExceededError,
    NoDecayError,
    NotStableError,
    ValidationError,
)
from .models import MarkovModel

PHI_PRIME_GUARD = 10_000
PHI_SUM_CAP = 10_000


@dataclass
class StabilityResult:
    exact: float
    bound: float
    rho: float
    search_length: int


def min_conditional_probability(model: MarkovModel) -> float:
    return float(model.transitions.min())


def m_stability(model: MarkovModel, max_len: int | None = None) -> StabilityResult:
    """Exact single-flip stability coefficient and its closed-form bound.

    exact: max over sequences of length <= 2m+3 (default), flip positions
    and replacement symbols of |log2 P(x) - log2 P(x')|.
    bound: (m+1) * log2(1/rho), rho the smallest conditional probability.
    """
    rho = min_conditional_probability(model)
    if rho <= 0.0:
        raise NotStableError("a conditional probability is zero: stability coefficient is infinite")
    m = model.order
    bound = (m + 1) * math.log2(1.0 / rho)
    length = max_len if max_len is not None else 2 * m + 3
    length = max(length, max(m, 1))
    l = model.alphabet.size
    logp = _all_sequence_logprobs(model, length)
    best = 0.0
    powers = [l**i for i in range(length)]
    for code in range(l**length):
        base = logp[code]
        for pos in range(length):
            digit = (code // powers[length - 1 - pos]) % l
            for repl in range(l):
                if repl == digit:
                    continue
                flipped = code + (repl - digit) * powers[length - 1 - pos]
                diff = abs(base - logp[flipped])
                if diff > best:
                    best = diff
    return StabilityResult(exact=float(best), bound=float(bound), rho=rho, search_length=length)


def _all_sequence_logprobs(model: MarkovModel, length: int) -> np.ndarray:
    """log2 P(x_{1:length}) for every sequence, indexed by its base-l code."""
    l = model.alphabet.size
    m = model.order
    if length < m:
        raise ValidationError("search length shorter than the model order")
    pi = model.stationary_context_law()
    logpi = np.log2(pi)
    with np.errstate(divide="ignore"):
        logt = np.log2(model.transitions)
    out = np.empty(l**length)
    lowm = l ** (m - 1) if m else 0
    for code in range(l**length):
        digits = []
        c = code
        for _ in range(length):
            digits.append(c % l)
            c //= l
        digits.reverse()
        ctx = 0
        for d in digits[:m]:
            ctx = ctx * l + d
        total = logpi[ctx] if m else 0.0
        for d in digits[m:]:
            total += logt[ctx, d]
            ctx = (ctx % lowm) * l + d if m else 0
        out[code] = total
    return out


@dataclass
class DeltaCoefficients:
    """Mixing inflation constants under both published variants."""

    sum_phi_from_0: float
    sum_phi_from_1: float
    k_start: int
    truncation_index: int

    @property
    def sum_phi(self) -> float:
        return self.sum_phi_from_0 if self.k_start == 0 else self.sum_phi_from_1

    @property
    def delta_thm(self) -> float:
        return 1.0 + 24.0 * self.sum_phi

    @property
    def delta_proof(self) -> float:
        return 1.0 + 4.0 * self.sum_phi

    def as_pair(self) -> tuple[float, float]:
        return self.delta_thm, self.delta_proof


def delta_coefficients(model: MarkovModel, tol: float = 1e-12, k_start: int = 0) -> DeltaCoefficients:
    """Sum phi(k) with a geometric-tail stopping certificate.

    Stops once the fitted tail remainder drops below tol; raises NoDecay if
    the coefficients fail a geometric-ratio test within the term cap.
    """
    if k_start not in (0, 1):
        raise ValidationError("k_start must be 0 or 1")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    kernel = model.context_kernel()
    pi = model.stationary_context_law()
    phi0 = phi_mixing(model, 0)
    total = 0.0
    power = np.eye(kernel.shape[0])
    prev = None
    k = 0
    while True:
        k += 1
        if k > PHI_SUM_CAP:
            raise NoDecayError("phi series failed the geometric-ratio test within the term cap")
        power = power @ kernel
        val = float(0.5 * np.abs(power - pi[None, :]).sum(axis=1).max())
        total += val
        if val < 1e-300:
            break
        if prev is not None and prev > 0:
            ratio = val / prev
            if ratio < 1.0 and val * ratio / (1.0 - ratio) < tol:
                break
            if ratio > 1.0 + 1e-9:
                raise NoDecayError(f"phi(k) increased at k = {k} (ratio {ratio:.4f})")
        prev = val
    return DeltaCoefficients(
        sum_phi_from_0=phi0 + total,
        sum_phi_from_1=total,
        k_start=k_start,
        truncation_index=k,
    )


def phi_prime_matrix(model: MarkovModel, n: int) -> tuple[np.ndarray, float]:
    """Row sums of the mixing-weighted Lipschitz matrix and their max.

    Row i of H_n is 1 + sum_{j>i} min(4 phi(j-i), 2); only the row sums are
    materialized (the matrix is Toeplitz above the diagonal).
    """
    if n < 1:
        raise ValidationError("n must be positive")
    if n > PHI_PRIME_GUARD:
        raise GuardExceededError(f"n = {n} above the {PHI_PRIME_GUARD} guard")
    kernel = model.context_kernel()
    pi = model.stationary_context_law()
    vals = np.empty(n - 1)
    power = np.eye(kernel.shape[0])
    for k in range(1, n):
        power = power @ kernel
        vals[k - 1] = min(4.0 * float(0.5 * np.abs(power - pi[None, :]).sum(axis=1).max()), 2.0)
    cums = np.concatenate([[0.0], np.cumsum(vals)])
    row_sums = 1.0 + cums[::-1]
    return row_sums, float(row_sums.max())


@dataclass
class ConcentrationConstants:
    """Everything needed to evaluate both finite-sample tail bounds.

    The n-dependent quantities (C1, gamma, zeta, K1') are methods; variant
    selects the mixing inflation constant: "thm" = 1 + 24 sum phi,
    "proof" = 1 + 4 sum phi.
    """

    m: int
    l: int
    m_exact: float
    m_bound: float
    rho: float
    sum_phi_from_0: float
    sum_phi_from_1: float
    k_start: int
    h_conditional: float
    h_marginal: float
    eta: float

    @property
    def sum_phi(self) -> float:
        return self.sum_phi_from_0 if self.k_start == 0 else self.sum_phi_from_1

    def delta(self, variant: str = "thm") -> float:
        if variant not in ("thm", "proof"):
            raise ValidationError("variant must be 'thm' or 'proof'")
        return 1.0 + (24.0 if variant == "thm" else 4.0) * self.sum_phi

    def k_sym(self) -> int:
        return symbol_width(self.l)

    def c1(self, n: int) -> float:
        """Deterministic header budget of the codec at order m and length n."""
        w = (n - self.m).bit_length() if n > self.m else 0
        return (
            c_prime(self.m, n)
            + log_star(self.m)
            + self.l * self.k_sym()
            + self.l ** (self.m + 1) * w
            + self.m * self.k_sym()
        )

    def zeta(self, n: int) -> float:
        return c_prime(self.m, n) + self.k_sym()

    def gamma_n(self, n: int) -> float:
        return self.c1(n) / n + (self.m / n) * self.h_conditional + n ** (-0.5 - self.eta)

    def gamma_prime(self, n: int) -> float:
        return (self.c1(n) + self.m * self.h_marginal) / n

    def k1(self, variant: str = "thm") -> float:
        return 2.0 * self.m_exact**2 * self.delta(variant) ** 2

    def k1_prime(self, n: int, variant: str = "thm") -> float:
        return 2.0 * self.delta(variant) ** 2 * (c_prime(self.m, n) + log_star(n) + self.k_sym()) ** 2

    def to_dict(self, n_grid: tuple[int, ...] = ()) -> dict:
        doc = {
            "m": self.m,
            "l": self.l,
            "M_exact": self.m_exact,
            "M_bound": self.m_bound,
            "rho": self.rho,
            "sum_phi_from_0": self.sum_phi_from_0,
            "sum_phi_from_1": self.sum_phi_from_1,
            "k_start": self.k_start,
            "delta_thm": self.delta("thm"),
            "delta_proof": self.delta("proof"),
            "K1_thm": self.k1("thm"),
            "K1_proof": self.k1("proof"),
            "H_conditional": self.h_conditional,
            "H_marginal": self.h_marginal,
            "eta": self.eta,
        }
        if n_grid:
            doc["per_n"] = {
                str(n): {
                    "C1": self.c1(n),
                    "gamma_n": self.gamma_n(n),
                    "gamma_prime": self.gamma_prime(n),
                    "K1_prime_thm": self.k1_prime(n, "thm"),
                    "K1_prime_proof": self.k1_prime(n, "proof"),
                    "zeta": self.zeta(n),
                }
                for n in n_grid
            }
        return doc


def compute_constants(
    model: MarkovModel,
    eta: float = 0.1,
    k_start: int = 0,
    tol: float = 1e-12,
) -> ConcentrationConstants:
    """Assemble every constant of the finite-sample bounds for one model."""
    if not 0.0 < eta < 0.5:
        raise ValidationError("eta must lie in (0, 0.5)")
    stab = m_stability(model)
    coeffs = delta_coefficients(model, tol=tol, k_start=k_start)
    return ConcentrationConstants(
        m=model.order,
        l=model.alphabet.size,
        m_exact=stab.exact,
        m_bound=stab.bound,
        rho=stab.rho,
        sum_phi_from_0=coeffs.sum_phi_from_0,
        sum_phi_from_1=coeffs.sum_phi_from_1,
        k_start=k_start,
        h_conditional=entropy_rate(model),
        h_marginal=marginal_entropy(model),
        eta=eta,
    )


def bound_concentration2(consts: ConcentrationConstants, n: int, t: float, variant: str = "thm") -> float:
    """Gaussian-plus-floor tail bound: 2 exp(-n (t - gamma_n)^2 / K1) + n zeta 2^(-n^(1/2-eta))."""
    if n < 1:
        raise ValidationError("n must be positive")
    gam = consts.gamma_n(n)
    if t <= gam:
        raise BelowThresholdError(f"t = {t} at or below the threshold gamma_n = {gam}")
    gauss = 2.0 * math.exp(-n * (t - gam) ** 2 / consts.k1(variant))
    floor = n * consts.zeta(n) * 2.0 ** (-(n ** (0.5 - consts.eta)))
    return min(1.0, gauss + floor)


def bound_concentration1(consts: ConcentrationConstants, n: int, t: float, variant: str = "thm") -> float:
    """Flip-Lipschitz tail bound: 2 exp(-n (t - gamma'(n))^2 / K1'(n))."""
    if n < 1:
        raise ValidationError("n must be positive")
    gam = consts.gamma_prime(n)
    if t <= gam:
        raise BelowThresholdError(f"t = {t} at or below the threshold gamma'(n) = {gam}")
    return min(1.0, 2.0 * math.exp(-n * (t - gam) ** 2 / consts.k1_prime(n, variant)))
