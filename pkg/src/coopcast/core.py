"""Domain model: devices, packets, stage-1 outcomes, validated instances.

Packets and devices are plain dense integer indices.  An Instance captures
the situation after the lossy broadcast stage: per-device Wants/Has
partition over the packet universe, the common-missing set, and synthetic
payload bytes so decoding can be verified end-to-end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PacketId = int
DeviceId = int

SOURCE = "source"

DEFAULT_PAYLOAD_LEN = 8


class InstanceError(ValueError):
    """Invalid problem instance."""


class EmptyUniverseError(InstanceError):
    """No devices to cooperate."""


class OrphanPacketError(InstanceError):
    """A packet wanted by no device; callers must pre-drop (derive_from_stage1)."""


class InstanceFormatError(InstanceError):
    """Malformed instance text."""


class SimulationError(RuntimeError):
    """Internal scheduler failure."""


class NonTerminationError(SimulationError):
    """Slot guard tripped; a scheduler stopped making progress."""


class DecodeMismatchError(SimulationError):
    """Final decode differs from the original payload bytes."""


class NotInstantlyDecodableError(SimulationError):
    """A delivered combination left a receiver with an undecodable packet."""


@dataclass(frozen=True)
class Instance:
    """Recovery problem: who wants what after the lossy broadcast stage.

    wants/has partition the packet universe per device; common_missing is
    the intersection of all wants sets (recoverable only from the source).
    payloads is an (M, L) uint8 array of synthetic packet contents.
    original_ids maps the dense packet index back to the pre-drop id when
    the instance came out of derive_from_stage1.
    """

    n_devices: int
    n_packets: int
    wants: tuple[frozenset[PacketId], ...]
    has: tuple[frozenset[PacketId], ...]
    common_missing: frozenset[PacketId]
    payloads: np.ndarray
    original_ids: tuple[PacketId, ...] = field(default=())

    @property
    def devices(self) -> range:
        return range(self.n_devices)

    @property
    def payload_len(self) -> int:
        return self.payloads.shape[1]

    def union_wants(self) -> frozenset[PacketId]:
        out: frozenset[PacketId] = frozenset()
        for w in self.wants:
            out |= w
        return out

    def max_wants(self) -> int:
        return max(len(w) for w in self.wants)

    def min_wants(self) -> int:
        return min(len(w) for w in self.wants)

    def is_trivial(self) -> bool:
        return self.n_packets == 0


@dataclass(frozen=True)
class TransmissionRecord:
    """One link's transmission in one slot.

    coefficients is empty for uncoded sends; decoded (per-device packet
    extracted on reception) is filled by the instantly-decodable scheduler.
    """

    slot: int
    link: str  # "cellular" | "local"
    sender: object  # SOURCE or DeviceId
    constituents: tuple[PacketId, ...]
    coefficients: dict[PacketId, int]
    innovative_for: frozenset[DeviceId]
    decoded: dict[DeviceId, PacketId] | None = None


@dataclass(frozen=True)
class RunResult:
    """Outcome of one scheme run: completion time plus the full slot trace."""

    completion_time: int
    trace: tuple[TransmissionRecord, ...]
    per_device_decode_slot: dict[DeviceId, int]


def _default_rng(rng: np.random.Generator | None) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(0)


def make_instance(
    n_devices: int,
    wants_sets: list[set[PacketId]] | tuple[set[PacketId], ...],
    payload_len: int = DEFAULT_PAYLOAD_LEN,
    rng: np.random.Generator | None = None,
    original_ids: tuple[PacketId, ...] | None = None,
) -> Instance:
    """Build a validated instance from per-device wants sets.

    The packet count is inferred from the largest wanted index; indices
    must be dense in [0, M) with every packet wanted somewhere, otherwise
    OrphanPacketError (pre-drop via derive_from_stage1 instead).
    """
    if n_devices < 1:
        raise EmptyUniverseError("need at least one device")
    if len(wants_sets) != n_devices:
        raise InstanceError(
            f"wants_sets covers {len(wants_sets)} devices, expected {n_devices}"
        )
    wanted_somewhere: set[PacketId] = set()
    for w in wants_sets:
        for m in w:
            if m < 0:
                raise InstanceError(f"negative packet index {m}")
        wanted_somewhere |= set(w)
    n_packets = max(wanted_somewhere) + 1 if wanted_somewhere else 0
    orphans = set(range(n_packets)) - wanted_somewhere
    if orphans:
        raise OrphanPacketError(f"packets wanted by nobody: {sorted(orphans)}")
    if original_ids is None:
        original_ids = tuple(range(n_packets))
    elif len(original_ids) != n_packets:
        raise InstanceError("original_ids length must equal the packet count")

    universe = frozenset(range(n_packets))
    wants = tuple(frozenset(w) for w in wants_sets)
    has = tuple(universe - w for w in wants)
    common = universe
    for w in wants:
        common &= w
    payloads = _default_rng(rng).integers(
        0, 256, size=(n_packets, payload_len), dtype=np.uint8
    )
    return Instance(
        n_devices=n_devices,
        n_packets=n_packets,
        wants=wants,
        has=has,
        common_missing=common,
        payloads=payloads,
        original_ids=original_ids,
    )


def derive_from_stage1(
    received_matrix: list[set[PacketId]] | tuple[set[PacketId], ...],
    m_total: int,
    payload_len: int = DEFAULT_PAYLOAD_LEN,
    rng: np.random.Generator | None = None,
) -> Instance:
    """Turn per-device stage-1 reception sets into a recovery instance.

    Packets received by every device are dropped and the rest re-indexed
    densely; the dense->original mapping is kept on the instance.  An
    all-received outcome yields the trivial (M=0) instance.
    """
    n_devices = len(received_matrix)
    if n_devices < 1:
        raise EmptyUniverseError("need at least one device")
    for received in received_matrix:
        bad = [m for m in received if m < 0 or m >= m_total]
        if bad:
            raise InstanceError(f"received ids out of range: {sorted(bad)}")

    surviving = [
        m
        for m in range(m_total)
        if any(m not in received for received in received_matrix)
    ]
    reindex = {orig: new for new, orig in enumerate(surviving)}
    wants_sets = [
        {reindex[m] for m in surviving if m not in received}
        for received in received_matrix
    ]
    return make_instance(
        n_devices,
        wants_sets,
        payload_len=payload_len,
        rng=rng,
        original_ids=tuple(surviving),
    )


def slot_guard(instance: Instance) -> int:
    """Non-termination tripwire for the slot loops; generous, never hit in practice."""
    return 4 * instance.n_packets + instance.n_devices + 4


def parse_instance_text(
    text: str,
    payload_len: int = DEFAULT_PAYLOAD_LEN,
    rng: np.random.Generator | None = None,
) -> Instance:
    """Parse the instance text format.

    First non-comment line: ``M=<int> N=<int>``; then exactly one line per
    device, ``<device-index>: <space-separated wanted packet indices>``
    (the list may be empty).  Lines starting with ``#`` are comments.
    """
    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines:
        raise InstanceFormatError("empty instance file")
    header = lines[0].split()
    if len(header) != 2 or not header[0].startswith("M=") or not header[1].startswith("N="):
        raise InstanceFormatError(f"bad header line: {lines[0]!r}")
    try:
        m_total = int(header[0][2:])
        n_devices = int(header[1][2:])
    except ValueError as exc:
        raise InstanceFormatError(f"bad header line: {lines[0]!r}") from exc
    if len(lines) - 1 != n_devices:
        raise InstanceFormatError(
            f"expected {n_devices} device lines, found {len(lines) - 1}"
        )

    wants_sets: list[set[int] | None] = [None] * n_devices
    for ln in lines[1:]:
        head, sep, tail = ln.partition(":")
        if not sep:
            raise InstanceFormatError(f"missing ':' in device line: {ln!r}")
        try:
            dev = int(head)
            wanted = {int(tok) for tok in tail.split()}
        except ValueError as exc:
            raise InstanceFormatError(f"bad device line: {ln!r}") from exc
        if dev < 0 or dev >= n_devices:
            raise InstanceFormatError(f"device index {dev} out of range")
        if wants_sets[dev] is not None:
            raise InstanceFormatError(f"duplicate line for device {dev}")
        out_of_range = {m for m in wanted if m < 0 or m >= m_total}
        if out_of_range:
            raise InstanceFormatError(
                f"packet ids out of range for device {dev}: {sorted(out_of_range)}"
            )
        wants_sets[dev] = wanted

    try:
        instance = make_instance(
            n_devices, [w if w is not None else set() for w in wants_sets],
            payload_len=payload_len, rng=rng,
        )
    except InstanceError as exc:
        raise InstanceFormatError(str(exc)) from exc
    if instance.n_packets != m_total:
        raise InstanceFormatError(
            f"header says M={m_total} but wanted ids cover only {instance.n_packets}"
        )
    return instance


def format_instance_text(instance: Instance) -> str:
    lines = [f"M={instance.n_packets} N={instance.n_devices}"]
    for n in instance.devices:
        ids = " ".join(str(m) for m in sorted(instance.wants[n]))
        lines.append(f"{n}: {ids}".rstrip())
    return "\n".join(lines) + "\n"
