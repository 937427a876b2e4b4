"""Closed-form output-error polynomials, acceptance probabilities and input counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .pauli import UsageError

MAX_EPS = 0.05
MAX_K = 20
MAX_BH_K = 40


@dataclass(frozen=True)
class ErrorPoly2:
    """Sparse polynomial in (eps_l, eps_p); keys are exponent pairs (i, j)."""

    terms: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {(int(i), int(j)): c for (i, j), c in self.terms.items() if c != 0}
        object.__setattr__(self, "terms", clean)

    def __call__(self, eps_l: float, eps_p: float | None = None) -> float:
        if eps_p is None:
            eps_p = eps_l
        return math.fsum(c * eps_l**i * eps_p**j for (i, j), c in self.terms.items())

    def coeff(self, i: int, j: int = 0):
        return self.terms.get((i, j), 0)

    def __add__(self, other: "ErrorPoly2") -> "ErrorPoly2":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0) + c
        return ErrorPoly2(out)

    def __sub__(self, other: "ErrorPoly2") -> "ErrorPoly2":
        return self + other.scale(-1)

    def __mul__(self, other: "ErrorPoly2") -> "ErrorPoly2":
        out: dict[tuple[int, int], float] = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return ErrorPoly2(out)

    def scale(self, factor) -> "ErrorPoly2":
        return ErrorPoly2({k: c * factor for k, c in self.terms.items()})

    def truncate(self, max_degree: int) -> "ErrorPoly2":
        return ErrorPoly2({(i, j): c for (i, j), c in self.terms.items() if i + j <= max_degree})

    def min_degree(self) -> int:
        return min((i + j for i, j in self.terms), default=0)

    def is_univariate(self) -> bool:
        return all(j == 0 for _, j in self.terms)

    def to_json(self) -> dict:
        return {"terms": [[i, j, self.terms[(i, j)]] for i, j in sorted(self.terms)]}

    @classmethod
    def from_json(cls, data: dict) -> "ErrorPoly2":
        return cls({(int(i), int(j)): c for i, j, c in data["terms"]})

    def __repr__(self):
        parts = [f"{c}*l^{i}*p^{j}" for (i, j), c in sorted(self.terms.items())]
        return "ErrorPoly2(" + " + ".join(parts) + ")"


def _check_k(k: int, limit: int = MAX_K) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < 2 or k > limit or k % 2:
        raise UsageError(f"k must be even in [2, {limit}], got {k!r}")


def e1_poly(k: int) -> ErrorPoly2:
    """One-level H_{k+4} distiller: per-output error including higher-order terms."""
    _check_k(k)
    terms = {
        (2, 0): k - 1,
        (0, 2): 2 * (k + 1),
        (0, 3): 4,
        (1, 2): k + 4,
        (1, 3): 8 * (k - 1),
        (4, 0): (k - 1) * (k - 2) * (k - 3) // 6 if k >= 4 else 0,
    }
    return ErrorPoly2(terms)


def e1_leading(k: int) -> ErrorPoly2:
    _check_k(k)
    return ErrorPoly2({(2, 0): k - 1, (0, 2): 2 * (k + 1)})


def e2_poly(k: int) -> ErrorPoly2:
    """Two-level (k+4)x(k+4) distiller."""
    _check_k(k)
    return ErrorPoly2({(2, 0): k * k - 1, (0, 4): 8 * (k * k + 4 * k + 3), (1, 2): (k + 4) ** 2})


def et_poly(k: int, t: int) -> ErrorPoly2:
    """t-level distiller on a (k+4)^t grid, t in 2..4."""
    _check_k(k)
    if t not in (2, 3, 4):
        raise UsageError(f"t must be in 2..4, got {t!r}")
    return ErrorPoly2({
        (2, 0): k**t - 1,
        (0, 2**t): 2 ** (2**t + t - 3) * (k + 1) * (k + 3) ** (t - 1),
        (1, 2 ** (t - 1)): (k + 4) ** (t * 2 ** (t - 2)),
    })


def prior_protocol_poly(kind: str, k: int | None = None, full: bool = False) -> ErrorPoly2:
    """Univariate error functions of the 15-to-1, 10-to-2 and (3k+8)-to-k protocols.

    ``full`` adds the next two series terms for BK and MEK and the complete
    one-level expansion for BH; by default only the leading term is kept.
    """
    if kind == "BK":
        terms = {(3, 0): 35, (4, 0): 105, (5, 0): 378} if full else {(3, 0): 35}
        return ErrorPoly2(terms)
    if kind == "MEK":
        terms = {(2, 0): 9, (3, 0): -56, (4, 0): 160} if full else {(2, 0): 9}
        return ErrorPoly2(terms)
    if kind == "BH":
        _check_k(k, MAX_BH_K)
        if full:
            if k > MAX_K:
                raise UsageError("full BH polynomial available for k <= 20 only")
            return collapse(e1_poly(k))
        return ErrorPoly2({(2, 0): 3 * k + 1})
    raise UsageError(f"unknown prior protocol {kind!r}")


def collapse(poly: ErrorPoly2) -> ErrorPoly2:
    """Substitute eps_l = eps_p = eps, giving a univariate polynomial in slot (i, 0)."""
    out: dict[tuple[int, int], float] = {}
    for (i, j), c in poly.terms.items():
        out[(i + j, 0)] = out.get((i + j, 0), 0) + c
    return ErrorPoly2(out)


@dataclass(frozen=True)
class ProtocolSpec:
    """Input/output counts of one distillation block.

    Single-source protocols (BK, MEK, BH) report every input as logical.
    """

    kind: str
    k: int = 0
    t: int = 0

    def __post_init__(self):
        if self.kind in ("BK", "MEK"):
            return
        if self.kind == "BH":
            _check_k(self.k, MAX_BH_K)
        elif self.kind == "H1":
            _check_k(self.k)
        elif self.kind == "ML":
            _check_k(self.k)
            if self.t not in (2, 3, 4):
                raise UsageError(f"ML needs t in 2..4, got {self.t!r}")
        else:
            raise UsageError(f"unknown protocol kind {self.kind!r}")

    @property
    def two_source(self) -> bool:
        return self.kind in ("H1", "ML")

    @property
    def inputs_logical(self) -> int:
        return {
            "BK": 15,
            "MEK": 10,
            "BH": 3 * self.k + 8,
            "H1": self.k,
            "ML": self.k**self.t,
        }[self.kind]

    @property
    def inputs_physical(self) -> int:
        if self.kind == "H1":
            return 2 * (self.k + 4)
        if self.kind == "ML":
            return 2 ** (self.t - 1) * (self.k + 4) ** self.t
        return 0

    @property
    def inputs(self) -> int:
        return self.inputs_logical + self.inputs_physical

    @property
    def outputs(self) -> int:
        return {"BK": 1, "MEK": 2, "BH": self.k, "H1": self.k, "ML": self.k**self.t}[self.kind]

    def error_poly(self, full: bool = False) -> ErrorPoly2:
        if self.kind in ("BK", "MEK", "BH"):
            return prior_protocol_poly(self.kind, self.k or None, full=full)
        if self.kind == "H1":
            return e1_poly(self.k) if full else e1_leading(self.k)
        return e2_poly(self.k) if self.t == 2 else et_poly(self.k, self.t)


def acceptance_probability(spec: ProtocolSpec, eps_l: float, eps_p: float | None = None) -> float:
    """Probability that no input carries an error."""
    if eps_p is None:
        eps_p = eps_l
    for eps in (eps_l, eps_p):
        if not 0 <= eps <= MAX_EPS:
            raise UsageError(f"error rate {eps} outside [0, {MAX_EPS}]")
    return (1 - eps_l) ** spec.inputs_logical * (1 - eps_p) ** spec.inputs_physical


def binomial_poly(count: int, var: int, max_degree: int | None = None) -> ErrorPoly2:
    """Exact expansion of (1 - eps)^count in variable 0 (eps_l) or 1 (eps_p)."""
    top = count if max_degree is None else min(count, max_degree)
    terms = {}
    for d in range(top + 1):
        key = (d, 0) if var == 0 else (0, d)
        terms[key] = (-1) ** d * math.comb(count, d)
    return ErrorPoly2(terms)


def monomial(i: int, j: int, coeff=1) -> ErrorPoly2:
    return ErrorPoly2({(i, j): coeff})


def sum_polys(polys: Iterable[ErrorPoly2]) -> ErrorPoly2:
    out: dict[tuple[int, int], float] = {}
    for p in polys:
        for key, c in p.terms.items():
            out[key] = out.get(key, 0) + c
    return ErrorPoly2(out)
