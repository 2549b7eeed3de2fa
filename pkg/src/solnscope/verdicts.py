"""The verdict record shared by the P1 and P2 diagnostics."""
from __future__ import annotations

from dataclasses import dataclass


class UnsupportedProblem(Exception):
    """No exact route exists for this instance."""


class PreconditionFail(Exception):
    pass


@dataclass(frozen=True)
class Verdict:
    """A yes/no answer with the sets that justify it.

    ``value`` is None when the question could not be decided exactly.
    ``certificates`` is a tuple of (name, ConvexSet or text) pairs.
    """

    value: bool | None
    reason: str
    certificates: tuple = ()
    notes: tuple = ()

    @property
    def vacuous(self) -> bool:
        return self.reason == "Vacuous"

    def certificate(self, name: str):
        for key, val in self.certificates:
            if key == name:
                return val
        raise KeyError(name)


def undecidable(reason: str) -> Verdict:
    return Verdict(None, "Undecidable", notes=(reason,))
