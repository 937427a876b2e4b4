"""Protocol composition, cost evaluation and Pareto search over multi-round distillation."""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .error_models import MAX_BH_K, MAX_EPS, MAX_K, ErrorPoly2, ProtocolSpec
from .pauli import UsageError

MAX_ROUNDS = 5
ALL_FAMILIES = ("BK", "MEK", "BH", "H1", "ML")
DEFAULT_TOL = 1e-6
DEFAULT_CAP = 512
DEFAULT_FLOOR = 1e-50


class DomainError(ValueError):
    """An error rate fell outside the range where the error models apply."""


class UnreachableTarget(LookupError):
    """No protocol within the search bounds reaches the requested error rate."""


@dataclass(frozen=True)
class ProtocolExpr:
    """A protocol tree; ``spec is None`` marks the raw source of eps0 states."""

    spec: ProtocolSpec | None = None
    children: tuple["ProtocolExpr", ...] = ()

    def __post_init__(self):
        want = 0 if self.spec is None else (2 if self.spec.two_source else 1)
        if len(self.children) != want:
            raise UsageError(f"{self.spec} needs {want} children, got {len(self.children)}")

    @property
    def depth(self) -> int:
        return 0 if self.spec is None else 1 + max(c.depth for c in self.children)

    def __str__(self) -> str:
        if self.spec is None:
            return "eps0"
        s = self.spec
        args = ",".join(str(c) for c in self.children)
        if s.kind in ("BK", "MEK"):
            return f"{s.kind}({args})"
        if s.kind in ("BH", "H1"):
            return f"{s.kind}[{s.k}]({args})"
        return f"ML[{s.t}][{s.k + 4}]({args})"


SOURCE = ProtocolExpr()

_TOKEN = re.compile(r"\s*(eps0|BK|MEK|BH|H1|ML|\[|\]|\(|\)|,|\d+)")


def parse(text: str) -> ProtocolExpr:
    """Inverse of ``str(expr)``."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise UsageError(f"cannot parse protocol at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    expr, rest = _parse(tokens)
    if rest:
        raise UsageError(f"trailing tokens {rest!r}")
    return expr


def _expect(tokens: list[str], tok: str) -> list[str]:
    if not tokens or tokens[0] != tok:
        raise UsageError(f"expected {tok!r}, got {tokens[:1]!r}")
    return tokens[1:]


def _parse_int(tokens: list[str]) -> tuple[int, list[str]]:
    tokens = _expect(tokens, "[")
    if not tokens or not tokens[0].isdigit():
        raise UsageError("expected integer parameter")
    value = int(tokens[0])
    return value, _expect(tokens[1:], "]")


def _parse(tokens: list[str]) -> tuple[ProtocolExpr, list[str]]:
    if not tokens:
        raise UsageError("unexpected end of protocol")
    head, tokens = tokens[0], tokens[1:]
    if head == "eps0":
        return SOURCE, tokens
    if head in ("BK", "MEK"):
        spec = ProtocolSpec(head)
    elif head in ("BH", "H1"):
        k, tokens = _parse_int(tokens)
        spec = ProtocolSpec(head, k=k)
    elif head == "ML":
        t, tokens = _parse_int(tokens)
        n, tokens = _parse_int(tokens)
        spec = ProtocolSpec("ML", k=n - 4, t=t)
    else:
        raise UsageError(f"unexpected token {head!r}")
    tokens = _expect(tokens, "(")
    children = []
    for idx in range(2 if spec.two_source else 1):
        if idx:
            tokens = _expect(tokens, ",")
        child, tokens = _parse(tokens)
        children.append(child)
    tokens = _expect(tokens, ")")
    return ProtocolExpr(spec, tuple(children)), tokens


@dataclass(frozen=True)
class ProtocolEval:
    eps_out: float
    cost: float
    accept: float

    @property
    def neg_log10_eps(self) -> float:
        return -math.log10(self.eps_out)


def _poly_terms(spec: ProtocolSpec, full: bool) -> tuple[tuple[int, int, float], ...]:
    poly: ErrorPoly2 = spec.error_poly(full=full)
    return tuple((i, j, float(c)) for (i, j), c in sorted(poly.terms.items()))


def _node_eval(spec: ProtocolSpec, terms, eps_l, eps_p, cost_l, cost_p):
    """Vectorized output error, acceptance and cost of one block.

    Shared by scalar evaluation and the search so both give bit-identical floats.
    """
    out = 0.0
    for i, j, c in terms:
        out = out + c * (eps_l**i) * (eps_p**j)
    accept = (1.0 - eps_l) ** spec.inputs_logical * (1.0 - eps_p) ** spec.inputs_physical
    cost = (spec.inputs_logical * cost_l + spec.inputs_physical * cost_p) / (spec.outputs * accept)
    return out, accept, cost


def _check_eps(eps: float) -> None:
    if not 0 < eps <= MAX_EPS:
        raise DomainError(f"error rate {eps!r} outside (0, {MAX_EPS}]")


def evaluate(expr: ProtocolExpr, eps0: float, full: bool = False) -> ProtocolEval:
    """Bottom-up evaluation of output error and average eps0-inputs per output."""
    _check_eps(eps0)
    memo: dict[ProtocolExpr, ProtocolEval] = {}

    def walk(e: ProtocolExpr) -> ProtocolEval:
        if e in memo:
            return memo[e]
        if e.spec is None:
            res = ProtocolEval(eps0, 1.0, 1.0)
        else:
            kids = [walk(c) for c in e.children]
            for kid in kids:
                _check_eps(kid.eps_out)
            lo, hi = kids[0], kids[-1]
            arr = lambda v: np.array([v], dtype=np.float64)  # noqa: E731
            with np.errstate(divide="ignore", over="ignore"):
                out, acc, cost = _node_eval(e.spec, _poly_terms(e.spec, full), arr(lo.eps_out),
                                            arr(hi.eps_out), arr(lo.cost), arr(hi.cost))
            if not (acc[0] > 0 and math.isfinite(cost[0])):
                raise DomainError(f"acceptance of {e} underflows at eps0={eps0!r}")
            res = ProtocolEval(float(out[0]), float(cost[0]), float(acc[0]))
        memo[e] = res
        return res

    return walk(expr)


@dataclass
class ParetoSet:
    eps0: float
    entries: list[tuple[float, float, ProtocolExpr]] = field(default_factory=list)
    accepts: list[float] = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def query(pset: ParetoSet, target_eps: float) -> tuple[ProtocolExpr, ProtocolEval]:
    """Cheapest entry with output error at most ``target_eps``."""
    best = None
    for idx, (eps, cost, expr) in enumerate(pset.entries):
        if eps <= target_eps and (best is None or cost < pset.entries[best][1]):
            best = idx
    if best is None:
        raise UnreachableTarget(f"target {target_eps:g} not reachable within bounds")
    eps, cost, expr = pset.entries[best]
    return expr, ProtocolEval(eps, cost, pset.accepts[best])


def family_specs(families: Iterable[str], max_k: int = MAX_K, bh_max_k: int = MAX_BH_K,
                 ml_levels: Sequence[int] = (2, 3, 4)) -> list[ProtocolSpec]:
    families = set(families)
    unknown = families - set(ALL_FAMILIES)
    if unknown:
        raise UsageError(f"unknown families {sorted(unknown)}")
    if not 2 <= max_k <= MAX_K:
        raise UsageError(f"max_k must be in [2, {MAX_K}]")
    specs = []
    for kind in ALL_FAMILIES:
        if kind not in families:
            continue
        if kind in ("BK", "MEK"):
            specs.append(ProtocolSpec(kind))
        elif kind == "BH":
            specs += [ProtocolSpec("BH", k=k) for k in range(2, bh_max_k + 1, 2)]
        elif kind == "H1":
            specs += [ProtocolSpec("H1", k=k) for k in range(2, max_k + 1, 2)]
        else:
            specs += [ProtocolSpec("ML", k=k, t=t) for t in ml_levels for k in range(2, max_k + 1, 2)]
    return specs


def _frontier_mask(eps: np.ndarray, cost: np.ndarray, floor: float) -> np.ndarray:
    """Indices not strictly dominated (ties kept), in (eps, cost) order."""
    eff = np.maximum(eps, floor)
    order = np.lexsort((cost, eff))
    c = cost[order]
    prior_min = np.minimum.accumulate(np.concatenate(([np.inf], c[:-1])))
    return order[c <= prior_min]


def _candidates(spec: ProtocolSpec, terms, eps, cost, usable, floor):
    """Evaluate ``spec`` on every admissible child (pair); return the chunk frontier."""
    idx = np.flatnonzero(usable)
    if spec.two_source:
        li, pi = np.meshgrid(idx, idx, indexing="ij")
        li, pi = li.ravel(), pi.ravel()
    else:
        li = pi = idx
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out, acc, c = _node_eval(spec, terms, eps[li], eps[pi], cost[li], cost[pi])
    ok = np.isfinite(c) & (acc > 0) & (out >= 0)
    li, pi, out, acc, c = li[ok], pi[ok], out[ok], acc[ok], c[ok]
    keep = _frontier_mask(out, c, floor)
    return spec, li[keep], pi[keep], out[keep], acc[keep], c[keep]


def _select(cands: list[tuple], floor: float, tol: float) -> list[tuple]:
    """Deterministic tolerance sweep over (eps, cost, accept, expr) candidates.

    Exact (eps, cost) ties go to the shorter, then lexicographically smaller
    serialization.
    """
    keyed = sorted(
        cands,
        key=lambda c: (max(c[0], floor), c[1], len(str(c[3])), str(c[3])),
    )
    kept: list[tuple] = []
    best = math.inf
    for cand in keyed:
        if cand[1] < best * (1 - tol):
            kept.append(cand)
            best = cand[1]
    return kept


def _thin(kept: list[tuple], cap: int) -> list[tuple]:
    """Keep at most ``cap`` entries: the cheapest per equal-width log10(eps) bin."""
    if len(kept) <= cap:
        return kept
    logs = np.array([-math.log10(max(c[0], 1e-300)) for c in kept])
    edges = np.linspace(logs.min(), logs.max(), cap + 1)
    bins = np.clip(np.searchsorted(edges, logs, side="right") - 1, 0, cap - 1)
    chosen: dict[int, tuple] = {}
    for b, cand in zip(bins, kept):
        if b not in chosen or cand[1] < chosen[b][1]:
            chosen[b] = cand
    return sorted(chosen.values(), key=lambda c: (c[0], c[1]))


def pareto_search(eps0: float = 0.01, max_rounds: int = MAX_ROUNDS, max_k: int = MAX_K,
                  families: Iterable[str] = ALL_FAMILIES, bh_max_k: int = MAX_BH_K,
                  ml_levels: Sequence[int] = (2, 3, 4), full: bool = False,
                  tol: float = DEFAULT_TOL, cap: int = DEFAULT_CAP,
                  eps_floor: float = DEFAULT_FLOOR, threads: int = 1) -> ParetoSet:
    """Pareto front of (output error, cost) over protocols of depth <= ``max_rounds``.

    Round q combines entries of the depth-<=(q-1) front with every protocol
    family.  Below ``eps_floor`` all error rates count as equal.
    """
    _check_eps(eps0)
    if not 0 <= max_rounds <= MAX_ROUNDS:
        raise UsageError(f"max_rounds must be in [0, {MAX_ROUNDS}]")
    specs = family_specs(families, max_k, bh_max_k, ml_levels)
    term_cache = {s: _poly_terms(s, full) for s in specs}
    current = [(eps0, 1.0, 1.0, SOURCE)]
    for _ in range(max_rounds):
        eps = np.array([c[0] for c in current])
        cost = np.array([c[1] for c in current])
        usable = eps <= MAX_EPS
        work = [(s, term_cache[s], eps, cost, usable, eps_floor) for s in specs]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(pool.map(lambda args: _candidates(*args), work))
        else:
            chunks = [_candidates(*args) for args in work]
        merged = list(current)
        for spec, li, pi, out, acc, c in chunks:
            for a, b, e, p, q in zip(li.tolist(), pi.tolist(), out.tolist(), acc.tolist(), c.tolist()):
                kids = (current[a][3], current[b][3]) if spec.two_source else (current[a][3],)
                merged.append((e, q, p, (spec, kids)))
        # materialize expressions only for plausible survivors
        eps_all = np.array([m[0] for m in merged])
        cost_all = np.array([m[1] for m in merged])
        survivors = _frontier_mask(eps_all, cost_all, eps_floor)
        pool_ = []
        for i in sorted(survivors.tolist()):
            e, q, p, expr = merged[i]
            if isinstance(expr, tuple):
                expr = ProtocolExpr(expr[0], expr[1])
            pool_.append((e, q, p, expr))
        current = _thin(_select(pool_, eps_floor, tol), cap)
    current = sorted(current, key=lambda c: (c[0], c[1]))
    return ParetoSet(
        eps0,
        [(c[0], c[1], c[3]) for c in current],
        [c[2] for c in current],
    )


def total_input_count(r: int, k: int) -> int:
    """Total inputs for r rounds of k^q-qubit distillers, including parallel blocks."""
    if r < 1 or k < 2 or k % 2:
        raise UsageError("need r >= 1 and even k >= 2")
    ratio = Fraction(k + 4, k)
    bracket = 1 + ratio + sum(2 ** (q - 1) * ratio**q for q in range(1, r + 1))
    return round(bracket * k ** (r * (r + 1) // 2))


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    gamma: float
    points: tuple[tuple[int, float, float], ...] = ()


def cost_series(pset: ParetoSet, exponents: Iterable[int]) -> list[tuple[int, float, float, ProtocolExpr]]:
    """Per target exponent: (exponent, achieved -log10 eps, cost, protocol)."""
    rows = []
    for x in exponents:
        expr, ev = query(pset, 10.0 ** (-x))
        rows.append((x, ev.neg_log10_eps, ev.cost, expr))
    return rows


def fit_cost_curve(pset: ParetoSet, exponents: Iterable[int] = range(5, 41),
                   gamma_from: int = 10) -> FitResult:
    """Least-squares line of cost against log10(1/eps_out), plus the scaling exponent.

    The scaling exponent is the slope of log(cost) against
    log(log(eps0 / eps_out)) over exponents >= ``gamma_from``.
    """
    rows = cost_series(pset, exponents)
    if len(rows) < 2:
        raise ValueError("need at least two points to fit")
    x = np.array([r[1] for r in rows])
    y = np.array([r[2] for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    tail = [r for r in rows if r[0] >= gamma_from]
    if len(tail) < 2:
        raise ValueError("need at least two points for the scaling exponent")
    lx = np.log(np.log(pset.eps0) - np.log(10.0 ** -np.array([r[1] for r in tail])))
    ly = np.log(np.array([r[2] for r in tail]))
    gamma = np.polyfit(lx, ly, 1)[0]
    return FitResult(float(slope), float(intercept), float(gamma),
                     tuple((r[0], r[1], r[2]) for r in rows))


@dataclass(frozen=True)
class ChainRound:
    round: int
    eps_out: float
    inputs_per_output: float
    accept: float


def _level_terms(k: int, t: int) -> tuple[tuple[int, int, float], ...]:
    if t == 1:
        return ((2, 0, float(k - 1)), (0, 2, float(2 * (k + 1))))
    return (
        (2, 0, float(k**t - 1)),
        (0, 2**t, float(2 ** (2**t + t - 3) * (k + 1) * (k + 3) ** (t - 1))),
        (1, 2 ** (t - 1), float((k + 4) ** (t * 2 ** (t - 2)))),
    )


def asymptotic_chain(k: int, eps: float, r_max: int) -> list[ChainRound]:
    """Chain E_1(eps, eps), E_2(., eps), ... with raw physical inputs at every round.

    ``inputs_per_output`` counts consumed raw states per output without the
    rejection overhead (the eps -> 0 limit); ``accept`` is reported beside it.
    """
    if not 1 <= r_max <= 4:
        raise UsageError("r_max must be in 1..4")
    rows = []
    eps_l, per_output = eps, 1.0
    for t in range(1, r_max + 1):
        logical, outputs = k**t, k**t
        physical = 2 * (k + 4) if t == 1 else 2 ** (t - 1) * (k + 4) ** t
        out = sum(c * eps_l**i * eps**j for i, j, c in _level_terms(k, t))
        accept = math.exp(logical * math.log1p(-eps_l) + physical * math.log1p(-eps))
        per_output = (logical * per_output + physical) / outputs
        rows.append(ChainRound(t, out, per_output, accept))
        eps_l = out
    return rows


def asymptotic_ratio_check(k: int, eps: float, r_max: int) -> list[float]:
    if k < 1000 or eps > 1e-8:
        raise UsageError("asymptotic check needs k >= 1000 and eps <= 1e-8")
    return [row.inputs_per_output for row in asymptotic_chain(k, eps, r_max)]
