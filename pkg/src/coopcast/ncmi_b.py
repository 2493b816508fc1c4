"""Batch-coded recovery over both links.

Every slot the source broadcasts a random linear combination over the
union of wants sets (innovative for every incomplete device) while the
device with the largest knowledge rank broadcasts a random member of its
span, innovative for every receiver it can still teach.  Local
transmissions stop once every device has either completed or collected
its full local quota (wants size minus the common-missing count), since
the remainder can only come from the source.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf_linalg
from .core import (
    DecodeMismatchError,
    DeviceId,
    Instance,
    NonTerminationError,
    RunResult,
    SOURCE,
    TransmissionRecord,
    slot_guard,
)
from .gf_linalg import KnowledgeSpace, draw_coded, draw_from_span, seed_with_units


@dataclass
class BatchState:
    spaces: list[KnowledgeSpace]
    innovative_from_local: list[int]
    innovative_total: list[int]
    slot: int

    @classmethod
    def initial(cls, instance: Instance) -> "BatchState":
        spaces = []
        for n in instance.devices:
            space = KnowledgeSpace(instance.n_packets, instance.payload_len)
            seed_with_units(space, set(instance.has[n]), instance.payloads)
            spaces.append(space)
        return cls(
            spaces=spaces,
            innovative_from_local=[0] * instance.n_devices,
            innovative_total=[0] * instance.n_devices,
            slot=0,
        )

    def incomplete(self) -> list[DeviceId]:
        return [n for n, s in enumerate(self.spaces) if not s.is_full()]


def transmitter_candidates(state: BatchState) -> list[list[DeviceId]]:
    """Maximum-rank candidate groups; devices with identical spans collapse into one.

    Returns the groups (each sorted ascending) in order of their lowest
    member, all sharing the maximal rank.
    """
    groups: list[list[DeviceId]] = []
    for n, space in enumerate(state.spaces):
        for members in groups:
            if state.spaces[members[0]].same_span(space):
                members.append(n)
                break
        else:
            groups.append([n])
    top = max(state.spaces[g[0]].rank for g in groups)
    return [g for g in groups if state.spaces[g[0]].rank == top]


def _local_quota_met(state: BatchState, instance: Instance) -> bool:
    mc = len(instance.common_missing)
    return all(
        state.innovative_from_local[n] >= len(instance.wants[n]) - mc
        or state.innovative_total[n] >= len(instance.wants[n])
        for n in instance.devices
    )


def select_local_transmitter(
    state: BatchState, instance: Instance, rng: np.random.Generator
) -> DeviceId | None:
    """Largest-knowledge device, or None once local sending is no longer useful.

    Ties among distinct spans break uniformly at random (one rng draw);
    a group of span-identical devices counts as a single candidate and is
    represented by its lowest index.
    """
    if _local_quota_met(state, instance):
        return None
    candidates = transmitter_candidates(state)
    if len(candidates) == 1:
        return candidates[0][0]
    return candidates[int(rng.integers(0, len(candidates)))][0]


def step(
    state: BatchState, instance: Instance, rng: np.random.Generator
) -> tuple[TransmissionRecord, TransmissionRecord | None]:
    """Advance one slot; both links transmit simultaneously.

    RNG consumption order: transmitter tie-break first, then cellular
    coefficients, then local coefficients.  The local combination is drawn
    from the transmitter's pre-slot span (it cannot retransmit what it is
    receiving this very slot) but must be innovative relative to receivers
    that already absorbed this slot's cellular packet, so a slot teaches
    two dimensions whenever two are missing.
    """
    incomplete = state.incomplete()
    slot = state.slot + 1

    tx = select_local_transmitter(state, instance, rng)
    tx_span = state.spaces[tx].copy() if tx is not None else None

    cell = draw_coded(
        set(instance.union_wants()),
        instance.payloads,
        rng,
        must_be_innovative_for=[state.spaces[n] for n in incomplete],
    )
    gained = set()
    for n in instance.devices:
        if state.spaces[n].insert(cell):
            gained.add(n)
            state.innovative_total[n] += 1
    cell_record = TransmissionRecord(
        slot=slot,
        link="cellular",
        sender=SOURCE,
        constituents=tuple(cell.constituents()),
        coefficients={m: int(cell.coeffs[m]) for m in cell.constituents()},
        innovative_for=frozenset(gained),
    )

    local_record = None
    if tx is not None:
        targets = [
            n
            for n in instance.devices
            if n != tx and not state.spaces[n].contains_space(tx_span)
        ]
        if targets:
            local = draw_from_span(
                tx_span, rng, must_be_innovative_for=[state.spaces[n] for n in targets]
            )
            gained_local = set()
            for n in instance.devices:
                if n == tx:
                    continue
                if state.spaces[n].insert(local):
                    gained_local.add(n)
                    state.innovative_from_local[n] += 1
                    state.innovative_total[n] += 1
            local_record = TransmissionRecord(
                slot=slot,
                link="local",
                sender=tx,
                constituents=tuple(local.constituents()),
                coefficients={m: int(local.coeffs[m]) for m in local.constituents()},
                innovative_for=frozenset(gained_local),
            )

    state.slot = slot
    return cell_record, local_record


def run(instance: Instance, rng: np.random.Generator) -> RunResult:
    """Run to completion: every device at full rank, decode verified byte-exact."""
    state = BatchState.initial(instance)
    decode_slot = {n: 0 for n in instance.devices if state.spaces[n].is_full()}
    trace: list[TransmissionRecord] = []
    guard = slot_guard(instance)

    while state.incomplete():
        if state.slot >= guard:
            raise NonTerminationError(f"batch scheduler exceeded {guard} slots")
        cell_record, local_record = step(state, instance, rng)
        trace.append(cell_record)
        if local_record is not None:
            trace.append(local_record)
        for n in instance.devices:
            if n not in decode_slot and state.spaces[n].is_full():
                decode_slot[n] = state.slot

    for n in instance.devices:
        decoded = state.spaces[n].decode_all()
        for m in range(instance.n_packets):
            if not np.array_equal(decoded[m], instance.payloads[m]):
                raise DecodeMismatchError(
                    f"device {n} decoded packet {m} incorrectly"
                )
    return RunResult(
        completion_time=state.slot,
        trace=tuple(trace),
        per_device_decode_slot=decode_slot,
    )
