"""Exact brute-force trace expectations and asymptotic predictors.

``exact_trace_expectation`` sums E[M_{i0 i1} ... M_{i_{L-1} i0}] over all
n**L closed paths, factorizing each expectation over its distinct unordered
edges. Entry moments come from a :class:`MomentModel` that knows the exact
joint moments of one entry; the sampler and the oracle therefore describe
exactly the same ensemble, including the theta/n cross terms.

``symbolic_trace_expectation`` is the independent second route used by the
test suite: it multiplies out M**L over a polynomial ring in the entry
variables and applies the moment map term by term.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .ensembles import EnsembleConfig, EntryLaw, SymmetryClass

__all__ = [
    "MomentModel",
    "edge_moment",
    "exact_trace_expectation",
    "symbolic_trace_expectation",
    "AsymptoticPredictions",
    "asymptotic_predictions",
    "trace_universality_probe",
    "oracle_record",
]

PATH_SUM_GUARD = 100_000_000


@dataclass(frozen=True)
class MomentModel:
    """Exact joint entry moments of one ensemble.

    ``law`` carries the component law of an off-diagonal entry (complex
    case: each of Re and Im), ``diag_law`` the real diagonal law. Joint
    moments above ``max_order`` are refused rather than silently computed.
    """

    symmetry: SymmetryClass
    law: EntryLaw
    diag_law: EntryLaw
    sigma: float
    diag_sigma: float
    max_order: int = 32

    @classmethod
    def from_config(cls, config: EnsembleConfig, max_order: int = 32) -> "MomentModel":
        return cls(
            symmetry=config.symmetry,
            law=config.law,
            diag_law=EntryLaw(config.law.kind, config.diag_sigma**2),
            sigma=config.sigma,
            diag_sigma=config.diag_sigma,
            max_order=max_order,
        )

    @property
    def beta_bound(self) -> float:
        return self.law.beta

    def offdiag_joint(self, a: int, b: int) -> float:
        """E[W**a * conj(W)**b] for one off-diagonal entry (real values).

        Real case: conjugation is trivial and this is E[W**(a+b)].
        """
        if a < 0 or b < 0:
            raise ValueError("moment orders must be nonnegative")
        if a + b > self.max_order:
            raise ValueError(f"moment order {a + b} beyond the model table ({self.max_order})")
        return self._offdiag_joint_cached(a, b)

    def _offdiag_joint_cached(self, a: int, b: int) -> float:
        cache = _JOINT_CACHE.setdefault((self.symmetry, self.law), {})
        key = (a, b)
        if key not in cache:
            cache[key] = self._offdiag_joint_compute(a, b)
        return cache[key]

    def _offdiag_joint_compute(self, a: int, b: int) -> float:
        if not self.symmetry.is_complex:
            return self.law.moment(a + b)
        if (a + b) % 2 == 1:
            return 0.0
        # W = X + iY with independent symmetric components:
        # E[W^a conj(W)^b] = sum_{j,k} C(a,j) C(b,k) i^{a-j} (-i)^{b-k}
        #                    E[X^{j+k}] E[Y^{(a-j)+(b-k)}]
        total = 0.0
        for j in range(a + 1):
            for k in range(b + 1):
                rest = (a - j) + (b - k)
                if (j + k) % 2 == 1 or rest % 2 == 1:
                    continue
                phase = (-1) ** (rest // 2) * (-1) ** (b - k)
                total += (
                    math.comb(a, j)
                    * math.comb(b, k)
                    * phase
                    * self.law.moment(j + k)
                    * self.law.moment(rest)
                )
        return total

    def diag_moment(self, order: int) -> float:
        """E[W_ii**order] for the real diagonal entry."""
        if order > self.max_order:
            raise ValueError(f"moment order {order} beyond the model table ({self.max_order})")
        return self.diag_law.moment(order)


_JOINT_CACHE: dict = {}


def edge_moment(
    model: MomentModel, a: int, b: int, is_diagonal: bool, theta: float, n: int
) -> float:
    """E[(W/sqrt(n) + theta/n)**a * (conj(W)/sqrt(n) + theta/n)**b].

    Double binomial expansion over the model's joint moments; diagonal
    entries are real and use the diagonal law.
    """
    if a + b < 1:
        raise ValueError("need a + b >= 1")
    t = theta / n
    inv = 1.0 / math.sqrt(n)
    if is_diagonal:
        order = a + b
        return math.fsum(
            math.comb(order, p) * t ** (order - p) * inv**p * model.diag_moment(p)
            for p in range(order + 1)
        )
    return math.fsum(
        math.comb(a, p)
        * math.comb(b, q)
        * t ** ((a - p) + (b - q))
        * inv ** (p + q)
        * model.offdiag_joint(p, q)
        for p in range(a + 1)
        for q in range(b + 1)
    )


def _path_signature(path: tuple[int, ...]) -> tuple[tuple[int, int, bool], ...]:
    """Multiset of per-edge (forward, backward, diagonal) traversal counts."""
    length = len(path)
    counts: dict[tuple[int, int], list[int]] = {}
    for t in range(length):
        i, j = path[t], path[(t + 1) % length]
        if i <= j:
            counts.setdefault((i, j), [0, 0])[0] += 1
        else:
            counts.setdefault((j, i), [0, 0])[1] += 1
    return tuple(sorted((a, b, i == j) for (i, j), (a, b) in counts.items()))


def exact_trace_expectation(n: int, power: int, model: MomentModel, theta: float) -> float:
    """E[Tr M**power] by exhaustive closed-path summation (exact small scale).

    Paths are grouped by their edge-multiplicity signature so each distinct
    product of edge moments is evaluated once; the final reduction is
    compensated.
    """
    if power < 1:
        raise ValueError("power must be >= 1")
    if n**power > PATH_SUM_GUARD:
        raise ValueError(f"n**power = {n**power} exceeds the oracle guard {PATH_SUM_GUARD}")
    signatures = Counter(
        _path_signature(path) for path in itertools.product(range(n), repeat=power)
    )

    @lru_cache(maxsize=None)
    def edge_factor(a: int, b: int, diag: bool) -> float:
        if diag:
            return edge_moment(model, a + b, 0, True, theta, n)
        return edge_moment(model, a, b, False, theta, n)

    terms = []
    for sig, mult in signatures.items():
        w = 1.0
        for a, b, diag in sig:
            w *= edge_factor(a, b, diag)
        terms.append(mult * w)
    return math.fsum(terms)


# --- independent symbolic route -------------------------------------------
#
# Polynomials are dicts monomial -> coefficient, a monomial being a sorted
# tuple of ((i, j, conjugated), exponent) entry variables.


def _poly_mul(p1: dict, p2: dict) -> dict:
    out: dict = {}
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            merged: dict = {}
            for var, e in itertools.chain(m1, m2):
                merged[var] = merged.get(var, 0) + e
            key = tuple(sorted(merged.items()))
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def symbolic_trace_expectation(n: int, power: int, model: MomentModel, theta: float) -> float:
    """Second route: expand Tr M**power over a polynomial ring, then take
    expectations monomial by monomial."""
    if n**power > 100_000:
        raise ValueError("symbolic route is for desk-scale inputs only")
    t = theta / n
    inv = 1.0 / math.sqrt(n)
    is_complex = model.symmetry.is_complex

    def entry(i: int, j: int) -> dict:
        if i == j:
            var = (i, i, False)
        elif i < j:
            var = (i, j, False)
        else:
            var = (j, i, is_complex)
        return {(): t, ((var, 1),): inv}

    matrix = [[entry(i, j) for j in range(n)] for i in range(n)]
    acc = matrix
    for _ in range(power - 1):
        nxt = [[{} for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for k in range(n):
                if not acc[i][k]:
                    continue
                for j in range(n):
                    prod = _poly_mul(acc[i][k], matrix[k][j])
                    cell = nxt[i][j]
                    for mono, c in prod.items():
                        cell[mono] = cell.get(mono, 0.0) + c
        acc = nxt
    trace_poly: dict = {}
    for i in range(n):
        for mono, c in acc[i][i].items():
            trace_poly[mono] = trace_poly.get(mono, 0.0) + c

    terms = []
    for mono, coeff in trace_poly.items():
        exps: dict[tuple[int, int], list[int]] = {}
        for (i, j, conj), e in mono:
            slot = exps.setdefault((i, j), [0, 0])
            slot[1 if conj else 0] += e
        w = coeff
        for (i, j), (a, b) in exps.items():
            w *= model.diag_moment(a + b) if i == j else model.offdiag_joint(a, b)
        terms.append(w)
    return math.fsum(terms)


@dataclass(frozen=True)
class AsymptoticPredictions:
    """Leading-order predictors for E[Tr M**(2s)] and their limit targets.

    ``marked_sum`` is the marked-origin simple-path series
    sum_{l even >= 2} T_{m,l} theta^l sigma^{2m} exp(-(l+m)^2 / (2n)); its
    ratio to rho**(2s) approaches 1 - sigma^2/theta^2 above the transition.
    ``odd_edge_class_ratio`` is the full class weight of the l > 0 paths
    (marked plus rotated unmarked, i.e. C(2s, m) per class) relative to
    (2 sigma)**(2s): it approaches 1/2 at the transition and 0 below it.
    ``odd_edge_marked_only_ratio`` keeps only the marked-origin counts and is
    exposed for reference.
    """

    s: int
    theta: float
    sigma: float
    n: int
    marked_sum: float
    rho_power: float | None
    marked_ratio: float | None
    limit_marked: float | None
    limit_unmarked: float | None
    limit_total: float | None
    even_term: float
    even_term_stirling: float
    odd_edge_class_ratio: float
    odd_edge_marked_only_ratio: float
    critical_target: float = 0.5
    subcritical_target: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def asymptotic_predictions(s: int, theta: float, sigma: float, n: int) -> AsymptoticPredictions:
    """Evaluate the finite-s predictor sums with exact path counts."""
    if s < 1:
        raise ValueError("s must be >= 1")
    two_s = 2 * s
    t_even = _t_count(s, 0)
    marked_terms = []
    class_terms = []
    marked_only_terms = []
    for l in range(2, two_s + 1, 2):
        m = s - l // 2
        t_ml = _t_count(m, l)
        weight = float(theta) ** l * float(sigma) ** (2 * m)
        damped = weight * math.exp(-((l + m) ** 2) / (2.0 * n))
        marked_terms.append(t_ml * damped)
        class_terms.append(math.comb(two_s, m) * weight)
        marked_only_terms.append(t_ml * weight)
    marked_sum = math.fsum(marked_terms)
    edge_power = (2.0 * sigma) ** two_s
    odd_edge_class_ratio = math.fsum(class_terms) / edge_power
    odd_edge_marked_only_ratio = math.fsum(marked_only_terms) / edge_power
    even_term = n * t_even * float(sigma) ** two_s
    even_term_stirling = n * (2.0 * sigma) ** two_s / (math.sqrt(math.pi) * s**1.5)
    if theta > 0:
        rho = theta + sigma**2 / theta
        rho_power = rho**two_s
        ratio_marked = 1.0 - sigma**2 / theta**2
        preds = dict(
            rho_power=rho_power,
            marked_ratio=marked_sum / rho_power,
            limit_marked=rho_power * ratio_marked,
            limit_unmarked=rho_power * sigma**2 / theta**2,
            limit_total=rho_power,
        )
    else:
        preds = dict(
            rho_power=None, marked_ratio=None, limit_marked=None,
            limit_unmarked=None, limit_total=None,
        )
    return AsymptoticPredictions(
        s=s,
        theta=theta,
        sigma=sigma,
        n=n,
        marked_sum=marked_sum,
        even_term=even_term,
        even_term_stirling=even_term_stirling,
        odd_edge_class_ratio=odd_edge_class_ratio,
        odd_edge_marked_only_ratio=odd_edge_marked_only_ratio,
        **preds,
    )


def _t_count(m: int, l: int) -> int:
    total = l + 2 * m
    return math.comb(total, l + m) - (math.comb(total, m - 1) if m >= 1 else 0)


def trace_universality_probe(
    n_list: list[int], power: int, theta: float, models: tuple[MomentModel, MomentModel]
) -> dict:
    """Relative oracle difference between two entry laws across dimensions."""
    m1, m2 = models
    rows = []
    for n in n_list:
        e1 = exact_trace_expectation(n, power, m1, theta)
        e2 = exact_trace_expectation(n, power, m2, theta)
        delta = abs(e1 - e2) / abs(e1) if e1 else abs(e1 - e2)
        rows.append({"n": n, "value_1": e1, "value_2": e2, "delta": delta})
    deltas = [r["delta"] for r in rows]
    return {
        "power": power,
        "theta": theta,
        "rows": rows,
        "decreasing": all(deltas[i] > deltas[i + 1] for i in range(len(deltas) - 1)),
        "all_finite": all(math.isfinite(d) for d in deltas),
    }


def oracle_record(
    n: int, power: int, theta: float, sigma: float, law: str, symmetry: str, value: float
) -> dict:
    """JSON-ready record of one oracle evaluation."""
    return {
        "n": n,
        "L": power,
        "theta": theta,
        "sigma": sigma,
        "law": law,
        "symmetry": symmetry,
        "value": value,
    }
