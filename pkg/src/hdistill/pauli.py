"""Bit-vector Pauli operators and GF(2) linear algebra.

Pauli strings are stored as a pair of Python integers (X support, Z support);
bit ``i`` is qubit ``i``.  Phases are not tracked, so two operators are equal
when their supports are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

MAX_QUBITS = 4096
MAX_EXHAUSTIVE_GENERATORS = 20


class UsageError(ValueError):
    """Raised when an operation is called outside its supported domain."""


def _mask(n: int) -> int:
    return (1 << n) - 1


def bits_from_indices(indices: Iterable[int]) -> int:
    out = 0
    for i in indices:
        out |= 1 << i
    return out


def indices_from_bits(bits: int) -> list[int]:
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class PauliString:
    n: int
    x_bits: int = 0
    z_bits: int = 0

    def __post_init__(self):
        if not 0 < self.n <= MAX_QUBITS:
            raise UsageError(f"qubit count {self.n} outside 1..{MAX_QUBITS}")
        full = _mask(self.n)
        if self.x_bits & ~full or self.z_bits & ~full or self.x_bits < 0 or self.z_bits < 0:
            raise UsageError("support bits exceed qubit count")

    @classmethod
    def from_indices(cls, n: int, x: Iterable[int] = (), z: Iterable[int] = (),
                     y: Iterable[int] = ()) -> "PauliString":
        """Build from 0-based index lists; ``y`` sets both X and Z."""
        yb = bits_from_indices(y)
        return cls(n, bits_from_indices(x) | yb, bits_from_indices(z) | yb)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a dense label such as ``"XXIIYZ"``."""
        x = z = 0
        for i, ch in enumerate(label.upper()):
            if ch in "XY":
                x |= 1 << i
            if ch in "ZY":
                z |= 1 << i
            if ch not in "IXYZ":
                raise UsageError(f"bad Pauli symbol {ch!r}")
        return cls(len(label), x, z)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    @property
    def support(self) -> int:
        return self.x_bits | self.z_bits

    def is_identity(self) -> bool:
        return not (self.x_bits or self.z_bits)

    def hadamard(self) -> "PauliString":
        """Transversal Hadamard image: X and Z supports exchanged."""
        return PauliString(self.n, self.z_bits, self.x_bits)

    def symplectic(self) -> int:
        """Length-2n vector packed as ``x | z << n``."""
        return self.x_bits | (self.z_bits << self.n)

    def label(self) -> str:
        chars = []
        for i in range(self.n):
            xb = (self.x_bits >> i) & 1
            zb = (self.z_bits >> i) & 1
            chars.append("IXZY"[xb + 2 * zb])
        return "".join(chars)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __repr__(self):
        return f"PauliString({self.label()!r})"


def _check_same_n(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise UsageError(f"length mismatch: {a.n} vs {b.n}")


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_same_n(a, b)
    return ((a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()) % 2 == 0


def multiply(a: PauliString, b: PauliString) -> PauliString:
    _check_same_n(a, b)
    return PauliString(a.n, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits)


class BitMatrix:
    """Dense GF(2) matrix with rows packed into Python integers.

    Bit ``j`` of ``rows[i]`` is entry ``(i, j)``.
    """

    def __init__(self, rows: Sequence[int], cols: int):
        self.cols = cols
        full = _mask(cols)
        for r in rows:
            if r < 0 or r & ~full:
                raise UsageError("row has bits beyond column count")
        self.rows = list(rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.cols

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]]) -> "BitMatrix":
        cols = len(entries[0]) if entries else 0
        rows = [bits_from_indices(j for j, v in enumerate(row) if v & 1) for row in entries]
        return cls(rows, cols)

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.cols)] for r in self.rows]

    def echelon(self) -> tuple[list[int], list[int], list[int]]:
        """Reduced row echelon form.

        Returns ``(basis, pivots, combos)``: independent reduced rows, the pivot
        bit of each, and for each a bitmask of original rows summing to it.
        """
        basis: list[int] = []
        pivots: list[int] = []
        combos: list[int] = []
        for idx, row in enumerate(self.rows):
            combo = 1 << idx
            for b, p, c in zip(basis, pivots, combos):
                if (row >> p) & 1:
                    row ^= b
                    combo ^= c
            if not row:
                continue
            p = row.bit_length() - 1
            for i in range(len(basis)):
                if (basis[i] >> p) & 1:
                    basis[i] ^= row
                    combos[i] ^= combo
            basis.append(row)
            pivots.append(p)
            combos.append(combo)
        return basis, pivots, combos

    def rank(self) -> int:
        return len(self.echelon()[0])

    def solve(self, target: int) -> int | None:
        """Find a bitmask ``c`` over rows with XOR of selected rows == target.

        Returns ``None`` when the target is outside the row space.
        """
        basis, pivots, combos = self.echelon()
        combo = 0
        for b, p, c in zip(basis, pivots, combos):
            if (target >> p) & 1:
                target ^= b
                combo ^= c
        return None if target else combo

    def contains(self, target: int) -> bool:
        return self.solve(target) is not None

    def nullspace(self) -> list[int]:
        """Basis of ``{v : rows . v == 0}`` as column-bit integers."""
        basis, pivots, _ = self.echelon()
        pivot_set = set(pivots)
        out = []
        for free in range(self.cols):
            if free in pivot_set:
                continue
            v = 1 << free
            for b, p in zip(basis, pivots):
                if (b >> free) & 1:
                    v |= 1 << p
            out.append(v)
        return out


def _generator_matrix(generators: Sequence[PauliString], n: int) -> BitMatrix:
    for g in generators:
        if g.n != n:
            raise UsageError("generators have inconsistent qubit counts")
    return BitMatrix([g.symplectic() for g in generators], 2 * n)


def in_group(p: PauliString, generators: Sequence[PauliString]) -> bool:
    """Phase-insensitive membership of ``p`` in the group generated by ``generators``."""
    if p.is_identity():
        return True
    return _generator_matrix(generators, p.n).contains(p.symplectic())


def group_elements(generators: Sequence[PauliString], n: int) -> list[PauliString]:
    """All distinct supports in the generated group (identity first)."""
    basis, _, _ = _generator_matrix(generators, n).echelon()
    if len(basis) > MAX_EXHAUSTIVE_GENERATORS:
        raise UsageError(f"group of rank {len(basis)} too large to list")
    elems = [0]
    for b in basis:
        elems += [e ^ b for e in elems]
    full = _mask(n)
    return [PauliString(n, e & full, e >> n) for e in elems]


def min_coset_weight(p: PauliString, stabilizers: Sequence[PauliString],
                     weight_bound: int | None = None) -> int:
    """Minimum weight of ``p * s`` over ``s`` in the stabilizer group.

    The group is scanned exhaustively when its rank is at most
    ``MAX_EXHAUSTIVE_GENERATORS``.  Larger groups need ``weight_bound``: every
    Pauli of weight up to the bound is tested for membership in the coset.
    """
    if p.is_identity():
        return 0
    matrix = _generator_matrix(stabilizers, p.n)
    rank = matrix.rank()
    if rank <= MAX_EXHAUSTIVE_GENERATORS:
        return min(multiply(p, s).weight for s in group_elements(stabilizers, p.n))
    if weight_bound is None:
        raise UsageError(f"stabilizer group of rank {rank} needs a weight bound")
    target = p.symplectic()
    for w in range(weight_bound + 1):
        for q in paulis_of_weight(p.n, w):
            if matrix.contains(target ^ q.symplectic()):
                return w
    raise UsageError(f"no coset element of weight <= {weight_bound}")


def paulis_of_weight(n: int, w: int) -> Iterable[PauliString]:
    for sites in combinations(range(n), w):
        for choice in range(3 ** w):
            x = z = 0
            for s in sites:
                choice, c = divmod(choice, 3)
                if c != 1:
                    x |= 1 << s
                if c != 0:
                    z |= 1 << s
            yield PauliString(n, x, z)
