"""Service families: named services, composition, and encapsulation.

A service is a functional unit paired with a current state, or the empty
service, which rejects every method.  A service family maps focus names to
services; composing two families that share a focus collapses that focus to
the empty service, and encapsulation removes a set of foci.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from operator import itemgetter
from typing import TYPE_CHECKING, Any, Hashable, Iterable, Mapping, Union

from .isa import IDENT_RE

if TYPE_CHECKING:  # pragma: no cover
    from .funit import FunctionalUnit


class Reply(Enum):
    """The three reply values: true, false, and divergent."""

    T = "T"
    F = "F"
    D = "D"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def of(cls, flag: bool) -> "Reply":
        return cls.T if flag else cls.F


@dataclass(frozen=True)
class EmptyService:
    """The unique service unable to process any method."""


@dataclass(frozen=True)
class UnitService:
    """A functional unit observed at one of its states."""

    unit: "FunctionalUnit"
    state: Hashable


Service = Union[EmptyService, UnitService]

EMPTY_SERVICE = EmptyService()


class ServiceFamily:
    """Immutable finite map from focus names to services."""

    __slots__ = ("_entries", "_key")

    def __init__(self, entries: Mapping[str, Service] | Iterable[tuple[str, Service]] = ()):
        d = dict(entries)
        for focus, svc in d.items():
            if not (isinstance(focus, str) and IDENT_RE.fullmatch(focus)):
                raise ValueError(f"bad focus name {focus!r}")
            if not isinstance(svc, (EmptyService, UnitService)):
                raise TypeError(f"not a service: {svc!r}")
        self._entries = d
        self._key = tuple(sorted(d.items(), key=itemgetter(0)))

    @property
    def foci(self) -> frozenset[str]:
        return frozenset(self._entries)

    def get(self, focus: str) -> Service | None:
        return self._entries.get(focus)

    def items(self) -> tuple[tuple[str, Service], ...]:
        return self._key

    def updated(self, focus: str, service: Service) -> "ServiceFamily":
        d = dict(self._entries)
        d[focus] = service
        return ServiceFamily(d)

    def __contains__(self, focus: str) -> bool:
        return focus in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ServiceFamily):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        inner = ", ".join(f"{f}: {s!r}" for f, s in self._key)
        return f"ServiceFamily({{{inner}}})"


EMPTY_FAMILY = ServiceFamily()


def singleton(focus: str, service: Service) -> ServiceFamily:
    """The family holding exactly one named service."""
    return ServiceFamily({focus: service})


def compose(u: ServiceFamily, v: ServiceFamily) -> ServiceFamily:
    """Union of two families; a focus present in both collapses to empty."""
    entries: dict[str, Service] = dict(u._entries)
    for focus, svc in v._entries.items():
        entries[focus] = EMPTY_SERVICE if focus in entries else svc
    return ServiceFamily(entries)


def encapsulate(foci: Iterable[str], u: ServiceFamily) -> ServiceFamily:
    """Restriction of u to the foci not in the given set."""
    hidden = frozenset(foci)
    return ServiceFamily({f: s for f, s in u._entries.items() if f not in hidden})


def service_step(s: Service, method: str) -> tuple[Reply, Service]:
    """Process one method: reply and successor service.

    A method outside the unit's interface, or any method offered to the empty
    service, is rejected with a divergent reply and the empty service.
    """
    if isinstance(s, UnitService):
        op = s.unit.ops.get(method)
        if op is not None:
            flag, nxt = op(s.state)
            return Reply.of(flag), UnitService(s.unit, nxt)
    return Reply.D, EMPTY_SERVICE
