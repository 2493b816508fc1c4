"""Partition the union of wants sets into instantly-decodable want-vectors.

A want-vector has one slot per device holding either NULL (None) or the
single packet that device still needs from the vector; XORing the vector's
distinct constituents is then decodable on sight by every device that
wants one of them.  Vectors are built greedily in ascending packet order
and merged first-fit into the earliest vector with disjoint device
support, then classified:

  m_c -- all-same vectors (one packet missing everywhere): source-only.
  m_d -- vectors NULL at n_star (the device with the smallest original
         wants set): n_star holds every constituent, one local send.
  m_l -- the rest: one source send, or at most two local sends.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DeviceId, Instance, PacketId


@dataclass(frozen=True)
class WantVector:
    """Per-device slots; each non-NULL entry is the packet that device wants here."""

    slots: tuple[PacketId | None, ...]

    def constituents(self) -> tuple[PacketId, ...]:
        """Distinct packets in the vector, ascending."""
        return tuple(sorted({m for m in self.slots if m is not None}))

    def support(self) -> frozenset[DeviceId]:
        return frozenset(n for n, m in enumerate(self.slots) if m is not None)

    def is_all_same(self) -> bool:
        return all(m is not None for m in self.slots) and len(set(self.slots)) == 1


@dataclass(frozen=True)
class Grouping:
    """The m_c / m_l / m_d split plus the designated minimum-wants device."""

    m_c: tuple[WantVector, ...]
    m_l: tuple[WantVector, ...]
    m_d: tuple[WantVector, ...]
    n_star: DeviceId

    def class_sizes(self) -> tuple[int, int, int]:
        return len(self.m_c), len(self.m_l), len(self.m_d)


def build_vectors(instance: Instance) -> list[WantVector]:
    """First-fit greedy vector construction over packets in ascending order.

    Each packet's fresh vector merges into the earliest existing vector
    whose non-NULL device slots are disjoint from its own; otherwise it is
    appended as a new vector.
    """
    vectors: list[list[PacketId | None]] = []
    for m in range(instance.n_packets):
        fresh: list[PacketId | None] = [
            m if m in instance.wants[n] else None for n in instance.devices
        ]
        for vec in vectors:
            if all(
                vec[n] is None or fresh[n] is None for n in instance.devices
            ):
                for n in instance.devices:
                    if fresh[n] is not None:
                        vec[n] = fresh[n]
                break
        else:
            vectors.append(fresh)
    return [WantVector(tuple(vec)) for vec in vectors]


def pick_n_star(instance: Instance) -> DeviceId:
    """Device with the minimum original wants-set size; ties to the lowest index."""
    return min(instance.devices, key=lambda n: (len(instance.wants[n]), n))


def classify(vectors: list[WantVector], instance: Instance) -> Grouping:
    """Split built vectors into m_c / m_l / m_d, preserving within-class order."""
    n_star = pick_n_star(instance)
    m_c: list[WantVector] = []
    m_l: list[WantVector] = []
    m_d: list[WantVector] = []
    for vec in vectors:
        if vec.is_all_same():
            m_c.append(vec)
        elif vec.slots[n_star] is None:
            m_d.append(vec)
        else:
            m_l.append(vec)
    return Grouping(m_c=tuple(m_c), m_l=tuple(m_l), m_d=tuple(m_d), n_star=n_star)


def group(instance: Instance) -> Grouping:
    return classify(build_vectors(instance), instance)


def format_grouping(grouping: Grouping) -> str:
    """Render the CLI `group` output: one line per class plus n_star."""

    def render(vectors: tuple[WantVector, ...]) -> str:
        return " | ".join(
            "+".join(f"p{m}" for m in vec.constituents()) for vec in vectors
        )

    mc_packets = " ".join(
        f"p{vec.constituents()[0]}" for vec in grouping.m_c
    )
    return "\n".join(
        [
            f"MC: {mc_packets}".rstrip(),
            f"ML: {render(grouping.m_l)}".rstrip(),
            f"MD: {render(grouping.m_d)}".rstrip(),
            f"NSTAR: {grouping.n_star}",
        ]
    )
