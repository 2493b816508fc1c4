"""GF(2^8) arithmetic, coding vectors, and incremental knowledge spaces.

Field: GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1 (0x11B).
Addition is XOR; multiplication/inversion go through exp/log tables built
once at import (generator 0x03, which is primitive for this polynomial).

A KnowledgeSpace is a device's accumulated information: a row-reduced
(RREF) basis of coefficient vectors over the packet universe, with payload
bytes carried through every row operation so that a full-rank space can be
decoded back to the original payloads exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REDUCTION_POLY = 0x11B
FIELD_SIZE = 256

# Innovative-redraw cap: converts a "random draw happened to be dependent"
# pathology into a loud error instead of silent stalling.
MAX_DRAW_RETRIES = 100


class InverseOfZeroError(ArithmeticError):
    """Multiplicative inverse of 0 requested."""


class NoInnovativeCombinationError(ValueError):
    """No combination over the given support can be innovative for a listed receiver."""


class RetryExhaustedError(RuntimeError):
    """Random redraws failed to find a simultaneously innovative combination."""


class UndecodableError(ValueError):
    """decode_all called on a space with rank < M."""


def multiply_reference(a: int, b: int) -> int:
    """Table-free GF(2^8) multiply by repeated shift-reduce (carry-less).

    Kept as the independent reference the table-driven path is checked
    against exhaustively in the tests.
    """
    product = 0
    while b:
        if b & 1:
            product ^= a
        a <<= 1
        if a & 0x100:
            a ^= REDUCTION_POLY
        b >>= 1
    return product


def _build_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    exp = np.zeros(510, dtype=np.int32)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = multiply_reference(x, 0x03)
    exp[255:510] = exp[0:255]

    # Full 256x256 product table; one gather per vector-scalar multiply.
    logs = log[1:]
    mul = np.zeros((256, 256), dtype=np.uint8)
    mul[1:, 1:] = exp[(logs[:, None] + logs[None, :]) % 255]

    inv = np.zeros(256, dtype=np.uint8)
    inv[1:] = exp[(255 - logs) % 255]
    return exp, log, mul, inv


_EXP, _LOG, _MUL, _INV = _build_tables()


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    return int(_MUL[a, b])


def gf_inv(a: int) -> int:
    if a == 0:
        raise InverseOfZeroError("0 has no multiplicative inverse")
    return int(_INV[a])


def gf_mul_vec(vec: np.ndarray, scalar: int) -> np.ndarray:
    """Multiply every byte of `vec` by `scalar` in GF(2^8)."""
    if scalar == 0:
        return np.zeros_like(vec)
    if scalar == 1:
        return vec.copy()
    return _MUL[vec, scalar]


@dataclass
class CodedPacket:
    """A linear combination of packets: coefficient vector + combined payload."""

    coeffs: np.ndarray  # (M,) uint8
    payload: np.ndarray  # (L,) uint8

    def constituents(self) -> list[int]:
        """Packet ids with nonzero coefficient, ascending."""
        return [int(m) for m in np.flatnonzero(self.coeffs)]


def combine(coeffs: np.ndarray, payloads: np.ndarray) -> np.ndarray:
    """Apply a coefficient vector to the payload matrix: sum of coeffs[m]*payloads[m]."""
    out = np.zeros(payloads.shape[1], dtype=np.uint8)
    for m in np.flatnonzero(coeffs):
        out ^= gf_mul_vec(payloads[m], int(coeffs[m]))
    return out


class KnowledgeSpace:
    """Row-reduced span of received coding vectors, payloads in lockstep.

    Invariants: the basis is in reduced row-echelon form (unique per span),
    rows sorted by pivot column, each pivot normalized to 1 and cleared in
    every other row.  Rank never decreases; rank == M means every original
    packet is recoverable.
    """

    def __init__(self, n_packets: int, payload_len: int):
        self.n_packets = n_packets
        self.payload_len = payload_len
        self.basis = np.zeros((0, n_packets), dtype=np.uint8)
        self.payloads = np.zeros((0, payload_len), dtype=np.uint8)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def is_full(self) -> bool:
        return self.rank == self.n_packets

    def copy(self) -> "KnowledgeSpace":
        dup = KnowledgeSpace(self.n_packets, self.payload_len)
        dup.basis = self.basis.copy()
        dup.payloads = self.payloads.copy()
        dup.pivots = list(self.pivots)
        return dup

    def _reduce(
        self, coeffs: np.ndarray, payload: np.ndarray | None
    ) -> tuple[np.ndarray, np.ndarray | None]:
        """Eliminate the basis pivots from a vector (and its payload, if given)."""
        v = coeffs.copy()
        p = payload.copy() if payload is not None else None
        for row, pivot in enumerate(self.pivots):
            factor = int(v[pivot])
            if factor:
                v ^= gf_mul_vec(self.basis[row], factor)
                if p is not None:
                    p ^= gf_mul_vec(self.payloads[row], factor)
        return v, p

    def contains(self, coeffs: np.ndarray) -> bool:
        """True iff the coefficient vector lies in the span."""
        v, _ = self._reduce(coeffs, None)
        return not v.any()

    def contains_space(self, other: "KnowledgeSpace") -> bool:
        """True iff every basis row of `other` lies in this span."""
        if other.rank > self.rank:
            return False
        return all(self.contains(other.basis[r]) for r in range(other.rank))

    def same_span(self, other: "KnowledgeSpace") -> bool:
        """Span equality via RREF uniqueness: identical pivots and rows."""
        return self.pivots == other.pivots and np.array_equal(self.basis, other.basis)

    def insert(self, pkt: CodedPacket) -> bool:
        """Insert a coded packet if innovative; keep the basis in RREF.

        Returns True iff the packet increased the rank.
        """
        v, p = self._reduce(pkt.coeffs, pkt.payload)
        if not v.any():
            return False
        pivot = int(np.flatnonzero(v)[0])
        lead_inv = gf_inv(int(v[pivot]))
        v = gf_mul_vec(v, lead_inv)
        p = gf_mul_vec(p, lead_inv)
        # Clear the new pivot column in existing rows.
        for row in range(self.rank):
            factor = int(self.basis[row, pivot])
            if factor:
                self.basis[row] ^= gf_mul_vec(v, factor)
                self.payloads[row] ^= gf_mul_vec(p, factor)
        pos = int(np.searchsorted(np.asarray(self.pivots, dtype=int), pivot))
        self.basis = np.insert(self.basis, pos, v, axis=0)
        self.payloads = np.insert(self.payloads, pos, p, axis=0)
        self.pivots.insert(pos, pivot)
        return True

    def random_member(self, rng: np.random.Generator) -> CodedPacket:
        """Random nonzero combination of the basis rows (zero is redrawn away)."""
        while True:
            weights = rng.integers(0, FIELD_SIZE, size=self.rank, dtype=np.uint8)
            if weights.any():
                break
        coeffs = np.zeros(self.n_packets, dtype=np.uint8)
        payload = np.zeros(self.payload_len, dtype=np.uint8)
        for row in np.flatnonzero(weights):
            w = int(weights[row])
            coeffs ^= gf_mul_vec(self.basis[row], w)
            payload ^= gf_mul_vec(self.payloads[row], w)
        return CodedPacket(coeffs, payload)

    def decode_all(self) -> dict[int, np.ndarray]:
        """Recover every original payload; requires full rank.

        With RREF maintained throughout, a full-rank basis is the identity,
        so row i's payload is packet i's payload.
        """
        if not self.is_full():
            raise UndecodableError(
                f"rank {self.rank} < {self.n_packets}: packets not recoverable"
            )
        return {m: self.payloads[m].copy() for m in range(self.n_packets)}


def seed_with_units(
    space: KnowledgeSpace, packets: set[int], payloads: np.ndarray
) -> KnowledgeSpace:
    """Insert a unit vector (with payload) for every directly received packet."""
    for m in sorted(packets):
        coeffs = np.zeros(space.n_packets, dtype=np.uint8)
        coeffs[m] = 1
        space.insert(CodedPacket(coeffs, payloads[m].copy()))
    return space


def _draw_innovative(make_candidate, targets: list[KnowledgeSpace]) -> CodedPacket:
    for _ in range(MAX_DRAW_RETRIES):
        pkt = make_candidate()
        if not pkt.coeffs.any():
            continue
        if all(not space.contains(pkt.coeffs) for space in targets):
            return pkt
    raise RetryExhaustedError(
        f"no simultaneously innovative draw in {MAX_DRAW_RETRIES} tries"
    )


def draw_coded(
    support: set[int],
    payloads: np.ndarray,
    rng: np.random.Generator,
    must_be_innovative_for: list[KnowledgeSpace] | None = None,
) -> CodedPacket:
    """Draw a random coded packet over `support`, innovative for every listed space.

    Coefficients are uniform over the whole field per support position; the
    all-zero vector is rejected and dependent draws are retried (the
    deterministic surrogate for a sufficiently large field).

    Raises NoInnovativeCombinationError if some listed space already spans
    the support's unit vectors, RetryExhaustedError if the cap is hit.
    """
    if not support:
        raise ValueError("empty support")
    targets = list(must_be_innovative_for or [])
    n_packets = payloads.shape[0]
    unit = np.zeros(n_packets, dtype=np.uint8)
    for space in targets:
        for m in support:
            unit[:] = 0
            unit[m] = 1
            if not space.contains(unit):
                break
        else:
            raise NoInnovativeCombinationError(
                "receiver already spans every support packet"
            )
    support_idx = np.asarray(sorted(support), dtype=int)

    def candidate() -> CodedPacket:
        coeffs = np.zeros(n_packets, dtype=np.uint8)
        coeffs[support_idx] = rng.integers(0, FIELD_SIZE, size=len(support_idx), dtype=np.uint8)
        return CodedPacket(coeffs, combine(coeffs, payloads))

    return _draw_innovative(candidate, targets)


def draw_from_span(
    space: KnowledgeSpace,
    rng: np.random.Generator,
    must_be_innovative_for: list[KnowledgeSpace] | None = None,
) -> CodedPacket:
    """Draw a random member of `space`, innovative for every listed receiver.

    Raises NoInnovativeCombinationError if a listed receiver already
    contains the whole span (nothing from it can be innovative there).
    """
    if space.rank == 0:
        raise ValueError("cannot draw from an empty span")
    targets = list(must_be_innovative_for or [])
    for receiver in targets:
        if receiver.contains_space(space):
            raise NoInnovativeCombinationError(
                "receiver already contains the transmitter's span"
            )
    return _draw_innovative(lambda: space.random_member(rng), targets)
