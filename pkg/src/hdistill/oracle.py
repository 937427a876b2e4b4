"""Brute-force evaluation of one- and two-level distillation under independent Y errors.

Every input state is independently faulty.  A configuration lists which
encoded inputs are faulty and, per site, whether the first and/or second
consumed ancilla of the controlled-Hadamard was faulty.  Error propagation:

* the Hadamard measurement fires on odd parity of (encoded errors + first-gate errors);
* each site carries the XOR of its two gate errors into the stabilizer check;
* the residual site pattern is evaluated by the hierarchical syndrome;
* accepted outputs are wrong where the encoded error and the residual's
  logical-Y action disagree.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

from .error_models import ErrorPoly2, binomial_poly, e1_poly, e2_poly, monomial, sum_polys
from .hcodes import GridCode, hierarchical_syndrome
from .pauli import UsageError

MAX_EXACT_BITS = 26
DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class ErrorConfig:
    logical_bits: int
    first_gate_bits: int
    second_gate_bits: int


@dataclass
class OracleResult:
    """Exact polynomials plus the integer tallies they were built from.

    ``*_counts`` map ``(l, p)`` to the number of configurations with ``l``
    faulty encoded inputs and ``p`` faulty ancillas.  A count is the leading
    coefficient of that event class's probability, which is what closed-form
    error expansions quote.
    """

    grid_dims: tuple[int, ...]
    n_logical: int
    n_physical: int
    accept_prob: ErrorPoly2
    marginal_error: list[ErrorPoly2]
    joint_all_correct: ErrorPoly2
    truncation_weight: int | str
    tail_bound: float
    accept_counts: dict = field(repr=False)
    marginal_counts: list[dict] = field(repr=False)
    all_correct_counts: dict = field(repr=False)
    configs: int = 0

    def count(self, i: int, j: int, output: int = 0) -> int:
        return self.marginal_counts[output].get((i, j), 0)

    def exact_degree(self) -> int | None:
        return None if self.truncation_weight == "exact" else int(self.truncation_weight)


def _check_grid(grid: GridCode) -> None:
    if grid.t > 2:
        raise UsageError("oracle supports t <= 2 (single Hadamard-measurement round)")


def classify_config(grid: GridCode, cfg: ErrorConfig, cache: dict | None = None) -> tuple[bool, int]:
    """Return ``(accepted, output_error_bits)`` for one error configuration."""
    _check_grid(grid)
    flag = (cfg.logical_bits.bit_count() + cfg.first_gate_bits.bit_count()) & 1
    if flag:
        return False, 0
    residual = cfg.first_gate_bits ^ cfg.second_gate_bits
    if cache is None:
        syn = hierarchical_syndrome(grid, residual)
    else:
        syn = cache.get(residual)
        if syn is None:
            syn = cache[residual] = hierarchical_syndrome(grid, residual)
    if syn.detected:
        return False, 0
    return True, cfg.logical_bits ^ syn.logical_y_bits


def _split(grid: GridCode, combo: tuple[int, ...]) -> ErrorConfig:
    nl, ns = grid.encoded, grid.sites
    lb = ab = bb = 0
    for b in combo:
        if b < nl:
            lb |= 1 << b
        elif b < nl + ns:
            ab |= 1 << (b - nl)
        else:
            bb |= 1 << (b - nl - ns)
    return ErrorConfig(lb, ab, bb)


def _tally_configs(grid: GridCode, configs: Iterator[ErrorConfig]) -> tuple[Counter, int]:
    tally: Counter = Counter()
    cache: dict = {}
    seen = 0
    for cfg in configs:
        seen += 1
        accepted, out = classify_config(grid, cfg, cache)
        if accepted:
            l = cfg.logical_bits.bit_count()
            p = cfg.first_gate_bits.bit_count() + cfg.second_gate_bits.bit_count()
            tally[(out, l, p)] += 1
    return tally, seen


def _exact_shard(grid: GridCode, start: int, stop: int) -> tuple[Counter, int]:
    nl, ns = grid.encoded, grid.sites
    lmask, smask = (1 << nl) - 1, (1 << ns) - 1

    def gen():
        for v in range(start, stop):
            yield ErrorConfig(v & lmask, (v >> nl) & smask, v >> (nl + ns))

    return _tally_configs(grid, gen())


def _truncated_shard(grid: GridCode, max_weight: int, firsts: tuple[int, ...]) -> tuple[Counter, int]:
    bits = grid.encoded + 2 * grid.sites

    def gen():
        for first in firsts:
            if first < 0:
                yield ErrorConfig(0, 0, 0)
                continue
            for w in range(max_weight):
                for rest in combinations(range(first + 1, bits), w):
                    yield _split(grid, (first,) + rest)

    return _tally_configs(grid, gen())


def _run_shards(fn, jobs: list[tuple], workers: int) -> tuple[Counter, int]:
    total: Counter = Counter()
    seen = 0
    if workers <= 1:
        results = [fn(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, *zip(*jobs)))
    for tally, n in results:
        total.update(tally)
        seen += n
    return total, seen


def _build_result(grid: GridCode, tally: Counter, max_degree: int | None, seen: int,
                  tail_bound: float) -> OracleResult:
    nl, np_ = grid.encoded, 2 * grid.sites
    accept: Counter = Counter()
    all_correct: Counter = Counter()
    marginal = [Counter() for _ in range(nl)]
    for (out, l, p), c in sorted(tally.items()):
        accept[(l, p)] += c
        if out == 0:
            all_correct[(l, p)] += c
        q = 0
        while out:
            if out & 1:
                marginal[q][(l, p)] += c
            out >>= 1
            q += 1

    def expand(counts: Counter) -> ErrorPoly2:
        polys = []
        for (l, p), c in sorted(counts.items()):
            rest = None if max_degree is None else max_degree - l - p
            poly = monomial(l, p, c) * binomial_poly(nl - l, 0, rest) * binomial_poly(np_ - p, 1, rest)
            polys.append(poly if max_degree is None else poly.truncate(max_degree))
        return sum_polys(polys)

    return OracleResult(
        grid_dims=grid.dims,
        n_logical=nl,
        n_physical=np_,
        accept_prob=expand(accept),
        marginal_error=[expand(m) for m in marginal],
        joint_all_correct=expand(all_correct),
        truncation_weight="exact" if max_degree is None else max_degree,
        tail_bound=tail_bound,
        accept_counts=dict(accept),
        marginal_counts=[dict(m) for m in marginal],
        all_correct_counts=dict(all_correct),
        configs=seen,
    )


def enumerate_exact(grid: GridCode, workers: int = 1) -> OracleResult:
    """Sum over all 2**bits configurations; polynomials are exact."""
    _check_grid(grid)
    bits = grid.encoded + 2 * grid.sites
    if bits > MAX_EXACT_BITS:
        raise UsageError(f"{bits} configuration bits exceed {MAX_EXACT_BITS}; use enumerate_truncated")
    total = 1 << bits
    shards = max(1, workers) * 4
    edges = [total * i // shards for i in range(shards + 1)]
    jobs = [(grid, a, b) for a, b in zip(edges, edges[1:]) if b > a]
    tally, seen = _run_shards(_exact_shard, jobs, workers)
    return _build_result(grid, tally, None, seen, 0.0)


def truncated_config_count(bits: int, max_weight: int) -> int:
    return sum(math.comb(bits, w) for w in range(max_weight + 1))


def tail_bound(bits: int, max_weight: int, eps_max: float) -> float:
    """Upper bound on the probability mass of configurations heavier than ``max_weight``."""
    total = 0.0
    for w in range(max_weight + 1, bits + 1):
        term = math.comb(bits, w) * eps_max**w
        total += term
        if term < total * 1e-17:
            break
    return total


def enumerate_truncated(grid: GridCode, max_weight: int, eps_max: float = 1e-3,
                        budget: int = DEFAULT_BUDGET, workers: int = 1) -> OracleResult:
    """Sum over configurations of Hamming weight <= ``max_weight``.

    Coefficients of total degree <= ``max_weight`` are exact; heavier
    configurations only feed higher-degree monomials.
    """
    _check_grid(grid)
    bits = grid.encoded + 2 * grid.sites
    n_configs = truncated_config_count(bits, max_weight)
    if n_configs > budget:
        raise UsageError(f"{n_configs} configurations exceed budget {budget}")
    firsts = [-1] + list(range(bits)) if max_weight >= 1 else [-1]
    shards = max(1, workers) * 4
    # interleave first indices so shards carry similar work
    jobs = [(grid, max_weight, tuple(firsts[s::shards])) for s in range(shards) if firsts[s::shards]]
    tally, seen = _run_shards(_truncated_shard, jobs, workers)
    return _build_result(grid, tally, max_weight, seen, tail_bound(bits, max_weight, eps_max))


def conditional_error(result: OracleResult, eps_l: float, eps_p: float, output: int = 0) -> float:
    """Output error probability conditioned on acceptance."""
    accept = result.accept_prob(eps_l, eps_p)
    if accept <= 0:
        raise ZeroDivisionError("acceptance probability is zero")
    return result.marginal_error[output](eps_l, eps_p) / accept


@dataclass(frozen=True)
class CoefficientCheck:
    term: tuple[int, int]
    oracle: int
    closed_form: float
    checked: bool

    @property
    def match(self) -> bool:
        return self.oracle == self.closed_form

    @property
    def status(self) -> str:
        if not self.checked:
            return "report"
        return "pass" if self.match else "fail"

    def to_dict(self) -> dict:
        return {
            "term": list(self.term),
            "oracle": self.oracle,
            "closed_form": self.closed_form,
            "checked": self.checked,
            "status": self.status,
        }


CHECKED_TERMS = {1: ((2, 0), (0, 2), (1, 2)), 2: ((2, 0), (1, 2), (0, 4))}
REPORTED_TERMS = {1: ((0, 3), (1, 3), (4, 0)), 2: ()}


def compare_with_closed_form(result: OracleResult) -> list[CoefficientCheck]:
    """Compare oracle event counts with the closed-form coefficients.

    Only square grids with t <= 2 have a closed form.  Terms beyond the
    truncation degree are skipped.
    """
    dims = result.grid_dims
    if len(set(dims)) != 1 or len(dims) > 2:
        return []
    k = dims[0] - 4
    closed = e1_poly(k) if len(dims) == 1 else e2_poly(k)
    limit = result.exact_degree()
    rows = []
    for checked, terms in ((True, CHECKED_TERMS[len(dims)]), (False, REPORTED_TERMS[len(dims)])):
        for term in terms:
            if limit is not None and sum(term) > limit:
                continue
            rows.append(CoefficientCheck(term, result.count(*term), closed.coeff(*term), checked))
    return rows


def outputs_symmetric(result: OracleResult) -> bool:
    first = result.marginal_counts[0]
    return all(m == first for m in result.marginal_counts[1:])
