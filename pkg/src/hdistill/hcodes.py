"""H codes ([[n, n-4, 2]] CSS codes with transversal Hadamard) and grid concatenations.

Qubits are 0-based: positions 0..3 of a block are the preamble, positions
4..n-1 the index qubits, and logical ``i`` lives on index position ``i + 4``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cache, cached_property
from typing import Sequence

import numpy as np

from .pauli import (
    BitMatrix,
    PauliString,
    UsageError,
    bits_from_indices,
    commutes,
    group_elements,
    in_group,
    indices_from_bits,
    min_coset_weight,
)

MAX_BLOCK_SIZE = 64
MAX_GRID_SITES = 4096
MAX_NULLSPACE_DIM = 24


@dataclass(frozen=True)
class StabilizerCode:
    n: int
    k: int
    stabilizers: tuple[PauliString, ...]
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]

    def check_invariants(self) -> None:
        """Raise ``ValueError`` on any broken commutation or pairing relation."""
        stabs, lx, lz = self.stabilizers, self.logical_x, self.logical_z
        if len(lx) != self.k or len(lz) != self.k:
            raise ValueError("logical operator count differs from k")
        for a, b in itertools.combinations(stabs, 2):
            if not commutes(a, b):
                raise ValueError(f"stabilizers {a} and {b} anticommute")
        for s in stabs:
            for op in lx + lz:
                if not commutes(s, op):
                    raise ValueError(f"logical {op} anticommutes with stabilizer {s}")
        for i, a in enumerate(lx):
            for j, b in enumerate(lz):
                if commutes(a, b) == (i == j):
                    raise ValueError(f"bad pairing between logical X{i} and Z{j}")
        for a, b in itertools.combinations(lx, 2):
            if not commutes(a, b):
                raise ValueError("logical X operators anticommute")
        for a, b in itertools.combinations(lz, 2):
            if not commutes(a, b):
                raise ValueError("logical Z operators anticommute")

    def logical_y(self, i: int) -> PauliString:
        return self.logical_x[i] * self.logical_z[i]

    def to_dict(self) -> dict:
        def ops(ps):
            return [{"x": indices_from_bits(p.x_bits), "z": indices_from_bits(p.z_bits)} for p in ps]

        return {
            "n": self.n,
            "k": self.k,
            "stabilizers": ops(self.stabilizers),
            "logical_x": ops(self.logical_x),
            "logical_z": ops(self.logical_z),
        }


def _check_block_size(n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise UsageError(f"block size must be an integer, got {n!r}")
    if n % 2 or n < 6 or n > MAX_BLOCK_SIZE:
        raise UsageError(f"H codes need even n in [6, {MAX_BLOCK_SIZE}], got {n}")


def preamble_check_support(n: int) -> int:
    """Support of the first matched stabilizer pair, qubits {0,1,2,3}."""
    return 0b1111


def index_check_support(n: int) -> int:
    """Support of the second matched stabilizer pair, qubits {0,1,4,...,n-1}."""
    return 0b11 | (((1 << n) - 1) ^ 0b1111)


def logical_y_support(n: int, i: int) -> int:
    """Representative support of logical Y on logical ``i``: qubits {0, 2, i+4}."""
    return 0b101 | (1 << (i + 4))


@cache
def build_hcode(n: int) -> StabilizerCode:
    _check_block_size(n)
    k = n - 4
    a = preamble_check_support(n)
    b = index_check_support(n)
    stabs = (PauliString(n, a, 0), PauliString(n, 0, a), PauliString(n, b, 0), PauliString(n, 0, b))
    lx = tuple(PauliString(n, logical_y_support(n, i), 0) for i in range(k))
    lz = tuple(PauliString(n, 0, logical_y_support(n, i)) for i in range(k))
    code = StabilizerCode(n, k, stabs, lx, lz)
    code.check_invariants()
    return code


def verify_transversal_hadamard(code: "StabilizerCode | GridCode") -> bool:
    """True iff exchanging X and Z maps the code onto itself and X-bar_i onto Z-bar_i.

    For a grid code every block's H code is checked, together with the
    matched X/Z structure of the lifted Y checks.
    """
    if isinstance(code, GridCode):
        return all(verify_transversal_hadamard(build_hcode(n)) for n in code.dims) and code.checks_matched()
    stabs = list(code.stabilizers)
    if not all(in_group(s.hadamard(), stabs) for s in stabs):
        return False
    return all(
        x.hadamard().x_bits == z.x_bits and x.hadamard().z_bits == z.z_bits
        for x, z in zip(code.logical_x, code.logical_z)
    )


def _popcount_parity(values: np.ndarray, mask: int) -> np.ndarray:
    return np.bitwise_count(values & np.uint64(mask)).astype(np.uint8) & 1


def code_distance_exhaustive(code: StabilizerCode, max_n: int = 10) -> int:
    """Minimum weight of a Pauli that commutes with every stabilizer but is not one.

    Scans all 4**n Paulis, so ``n`` is capped by ``max_n``.
    """
    n = code.n
    if n > max_n:
        raise UsageError(f"n={n} exceeds exhaustive limit {max_n}; use y_distance for larger codes")
    values = np.arange(1 << n, dtype=np.uint64)
    syn_x = np.zeros(values.shape, dtype=np.uint64)
    syn_z = np.zeros(values.shape, dtype=np.uint64)
    for s_idx, s in enumerate(code.stabilizers):
        syn_x |= _popcount_parity(values, s.z_bits).astype(np.uint64) << np.uint64(s_idx)
        syn_z |= _popcount_parity(values, s.x_bits).astype(np.uint64) << np.uint64(s_idx)
    # commuting with everything means identical syndromes from the X and Z parts
    commuting = syn_x[:, None] == syn_z[None, :]
    weights = np.bitwise_count(values[:, None] | values[None, :]).astype(np.int64)
    for s in group_elements(list(code.stabilizers), n):
        commuting[s.x_bits, s.z_bits] = False
    if not commuting.any():
        raise ValueError("code has no logical operators")
    return int(weights[commuting].min())


@dataclass(frozen=True)
class HierarchicalSyndrome:
    level: int
    detected: bool
    logical_y_bits: int


@cache
def _block_decoder(n: int) -> tuple[int, int, tuple[int, ...]]:
    """Check masks and a per-position decoding table for one H-code block.

    The decoding table maps each position to the logical-Y bits it contributes;
    it comes from inverting the basis (Y-bar_1..Y-bar_k, Y on {0,1,2,3},
    Y on {0,1,4..n-1}) extended to all of GF(2)^n.  On patterns that pass
    both checks, XOR-ing table entries gives the logical-Y bits.
    """
    k = n - 4
    a, b = preamble_check_support(n), index_check_support(n)
    normalizer_basis = [logical_y_support(n, i) for i in range(k)] + [a, b]
    rows = list(normalizer_basis)
    for pos in range(n):
        candidate = rows + [1 << pos]
        if BitMatrix(candidate, n).rank() == len(candidate):
            rows = candidate
    full = BitMatrix(rows, n)
    if full.rank() != n:
        raise ValueError("failed to extend normalizer basis")
    table = []
    for pos in range(n):
        combo = full.solve(1 << pos)
        table.append(combo & ((1 << k) - 1))
    return a, b, tuple(table)


def decode_block(n: int, local_bits: int) -> tuple[bool, int]:
    """Return ``(detected, logical_y_bits)`` for a Y pattern on one H_n block."""
    a, b, table = _block_decoder(n)
    if (local_bits & a).bit_count() & 1 or (local_bits & b).bit_count() & 1:
        return True, 0
    out = 0
    pos = 0
    while local_bits:
        if local_bits & 1:
            out ^= table[pos]
        local_bits >>= 1
        pos += 1
    return False, out


@dataclass(frozen=True)
class GridCode:
    """Concatenated H codes on a grid; level ``d`` encodes lines along axis ``d``.

    Sites and encoded qubits are flattened in C order (last axis fastest).
    Entities at level ``l`` have coordinates ``(j_1..j_l, i_{l+1}..i_t)``.
    """

    dims: tuple[int, ...]
    blocks: tuple[tuple[tuple[int, ...], ...], ...] = field(repr=False)
    y_checks: tuple[int, ...] = field(repr=False)
    logical_map: dict = field(repr=False, hash=False, compare=False)

    @property
    def t(self) -> int:
        return len(self.dims)

    @property
    def sites(self) -> int:
        return math.prod(self.dims)

    @property
    def ks(self) -> tuple[int, ...]:
        return tuple(n - 4 for n in self.dims)

    @property
    def encoded(self) -> int:
        return math.prod(self.ks)

    def site_index(self, coords: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(coords), self.dims))

    def site_coords(self, index: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(index, self.dims))

    def encoded_index(self, coords: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(coords), self.ks))

    def encoded_coords(self, index: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(index, self.ks))

    def level_shape(self, level: int) -> tuple[int, ...]:
        return self.ks[:level] + self.dims[level:]

    def lines(self, axis: int) -> list[list[int]]:
        """Physical sites along each geometric line parallel to ``axis``."""
        grid = np.arange(self.sites).reshape(self.dims)
        moved = np.moveaxis(grid, axis, -1).reshape(-1, self.dims[axis])
        return [list(map(int, row)) for row in moved]

    def checks_matched(self) -> bool:
        """Every lifted Y check comes from an X/Z stabilizer pair with equal support."""
        for n in self.dims:
            code = build_hcode(n)
            xs = [s for s in code.stabilizers if s.x_bits]
            zs = [s for s in code.stabilizers if s.z_bits]
            if sorted(s.x_bits for s in xs) != sorted(s.z_bits for s in zs):
                return False
        return len(self.y_checks) == 2 * sum(
            math.prod(self.level_shape(d)) // self.dims[d] for d in range(self.t)
        )

    def overlap_ok(self) -> bool:
        """Any two sites share at most one block across all levels.

        Checked twice: geometrically (two sites lie on a common axis line for
        at most one axis) and hierarchically (members of a level-l block
        descend from pairwise distinct level-(l-1) blocks).
        """
        seen: set[tuple[int, int]] = set()
        for axis in range(self.t):
            for line in self.lines(axis):
                for pair in itertools.combinations(line, 2):
                    if pair in seen:
                        return False
                    seen.add(pair)
        for level in range(1, self.t):
            parent_of = {}
            for b_idx, members in enumerate(self.blocks[level - 1]):
                for j in range(self.ks[level - 1]):
                    parent_of[_replace(members[0], level - 1, j)] = b_idx
            for members in self.blocks[level]:
                parents = [parent_of[m] for m in members]
                if len(set(parents)) != len(parents):
                    return False
        return True

    @cached_property
    def check_columns(self) -> tuple[int, ...]:
        """Per site: bitmask of the Y checks it participates in."""
        cols = [0] * self.sites
        for c_idx, check in enumerate(self.y_checks):
            for s in indices_from_bits(check):
                cols[s] |= 1 << c_idx
        return tuple(cols)

    @cached_property
    def logical_columns(self) -> tuple[int, ...]:
        """Per site: bitmask of encoded qubits whose lifted Y-bar overlaps it."""
        cols = [0] * self.sites
        for q in range(self.encoded):
            for s in indices_from_bits(self.logical_map[self.encoded_coords(q)]):
                cols[s] |= 1 << q
        return tuple(cols)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "sites": self.sites,
            "encoded": self.encoded,
            "y_checks": [indices_from_bits(c) for c in self.y_checks],
            "logical_y": [
                {"qubit": list(q), "sites": indices_from_bits(self.logical_map[q])}
                for q in sorted(self.logical_map)
            ],
        }


def _replace(coords: tuple[int, ...], axis: int, value: int) -> tuple[int, ...]:
    return coords[:axis] + (value,) + coords[axis + 1:]


def build_grid_code(dims: Sequence[int]) -> GridCode:
    dims = tuple(int(d) for d in dims)
    if not 1 <= len(dims) <= 4:
        raise UsageError(f"grid needs 1..4 dimensions, got {len(dims)}")
    for n in dims:
        _check_block_size(n)
    if math.prod(dims) > MAX_GRID_SITES:
        raise UsageError(f"grid has more than {MAX_GRID_SITES} sites")
    t = len(dims)
    ks = tuple(n - 4 for n in dims)

    # lift[coords] = physical site mask of the level-l entity's Y-bar representative
    lift = {c: 1 << int(np.ravel_multi_index(c, dims)) for c in np.ndindex(*dims)}
    blocks: list[tuple[tuple[int, ...], ...]] = []
    checks: list[int] = []
    for level in range(t):
        n = dims[level]
        shape = ks[:level] + dims[level:]
        a, b = preamble_check_support(n), index_check_support(n)
        next_lift = {}
        level_blocks = []
        other_shape = shape[:level] + shape[level + 1:]
        for rest in np.ndindex(*other_shape):
            members = tuple(rest[:level] + (p,) + rest[level:] for p in range(n))
            level_blocks.append(members)
            for support in (a, b):
                mask = 0
                for p in indices_from_bits(support):
                    mask ^= lift[members[p]]
                checks.append(mask)
            for j in range(n - 4):
                mask = 0
                for p in indices_from_bits(logical_y_support(n, j)):
                    mask ^= lift[members[p]]
                next_lift[rest[:level] + (j,) + rest[level:]] = mask
        blocks.append(tuple(level_blocks))
        lift = next_lift
    grid = GridCode(dims, tuple(blocks), tuple(checks), lift)
    if not grid.overlap_ok():
        raise ValueError("grid violates the single-shared-block condition")
    return grid


def _as_bits(pattern, size: int) -> int:
    if isinstance(pattern, (int, np.integer)):
        bits = int(pattern)
        if bits < 0 or bits >> size:
            raise UsageError("pattern has bits beyond site count")
        return bits
    arr = np.asarray(pattern).reshape(-1)
    if arr.size != size:
        raise UsageError(f"pattern length {arr.size} != site count {size}")
    return bits_from_indices(np.flatnonzero(arr & 1).tolist())


def hierarchical_syndrome(grid: GridCode, y_pattern) -> HierarchicalSyndrome:
    """Evaluate a physical Y pattern level by level.

    At each level every block is checked; if any block fires the pattern is
    detected at that level.  Otherwise each block's pattern is reduced to its
    logical-Y bits, which become the pattern for the next level.
    """
    bits = _as_bits(y_pattern, grid.sites)
    arr = np.zeros(grid.sites, dtype=np.uint8)
    arr[indices_from_bits(bits)] = 1
    arr = arr.reshape(grid.dims)
    for level, n in enumerate(grid.dims):
        moved = np.moveaxis(arr, level, -1)
        outer = moved.shape[:-1]
        flat = moved.reshape(-1, n)
        out = np.zeros((flat.shape[0], n - 4), dtype=np.uint8)
        for row in np.flatnonzero(flat.any(axis=1)):
            local = bits_from_indices(np.flatnonzero(flat[row]).tolist())
            detected, logical = decode_block(n, local)
            if detected:
                return HierarchicalSyndrome(level + 1, True, 0)
            for j in indices_from_bits(logical):
                out[row, j] = 1
        arr = np.moveaxis(out.reshape(outer + (n - 4,)), -1, level)
    logical_bits = bits_from_indices(np.flatnonzero(arr.reshape(-1)).tolist())
    return HierarchicalSyndrome(grid.t, False, logical_bits)


def flat_syndrome(grid: GridCode, bits: int) -> tuple[int, int]:
    """(check parities, logical overlaps) of a site pattern via the lifted checks."""
    syn = logical = 0
    cc, lc = grid.check_columns, grid.logical_columns
    for s in indices_from_bits(bits):
        syn ^= cc[s]
        logical ^= lc[s]
    return syn, logical


def y_distance(grid: GridCode, weight_cap: int = 6) -> int:
    """Minimum weight of an undetected Y pattern with nontrivial logical action.

    The nullspace of the lifted Y checks is enumerated when its dimension is
    at most ``MAX_NULLSPACE_DIM``; otherwise patterns are searched in order of
    weight up to ``weight_cap``.
    """
    basis = BitMatrix(list(grid.y_checks), grid.sites).nullspace()
    if len(basis) <= MAX_NULLSPACE_DIM:
        return _nullspace_distance(grid, basis)
    return _bounded_distance(grid, weight_cap)


def _nullspace_distance(grid: GridCode, basis: list[int]) -> int:
    if grid.sites > 64 or grid.encoded > 64:
        raise UsageError("nullspace enumeration supports at most 64 sites and encoded qubits")
    patterns = np.zeros(1, dtype=np.uint64)
    actions = np.zeros(1, dtype=np.uint64)
    for v in basis:
        _, act = flat_syndrome(grid, v)
        patterns = np.concatenate([patterns, patterns ^ np.uint64(v)])
        actions = np.concatenate([actions, actions ^ np.uint64(act)])
    nontrivial = actions != 0
    if not nontrivial.any():
        raise ValueError("no logical Y patterns found")
    return int(np.bitwise_count(patterns[nontrivial]).min())


def _bounded_distance(grid: GridCode, weight_cap: int) -> int:
    cc, lc = grid.check_columns, grid.logical_columns
    for w in range(1, weight_cap + 1):
        if math.comb(grid.sites, w) > 5 * 10**7:
            break
        for combo in itertools.combinations(range(grid.sites), w):
            syn = logical = 0
            for s in combo:
                syn ^= cc[s]
                logical ^= lc[s]
            if not syn and logical:
                return w
    raise UsageError(f"no logical Y pattern of weight <= {weight_cap}; search space exceeds cap")
