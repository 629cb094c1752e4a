"""Wire-level messages exchanged by vertex processes, with bit accounting.

Bit sizes follow a notional encoding (used for CONGEST budget checks, not
for transport): a 3-bit kind tag, then for rationals the bit lengths of
numerator and denominator, for integers their bit length, and nothing
for tag-only kinds.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Union

from ._rational import Q, fmt, is_exact, nbits, rational_bits

TAG_BITS = 3


class Kind(str, enum.Enum):
    INITIAL_WEIGHT = "InitialWeight"
    REQUEST = "Request"
    REQUEST_DEGREE = "RequestDegree"
    BUDGET_EXACT = "BudgetExact"
    BUDGET_ACCEPT = "BudgetAccept"
    BUDGET_QUANTIZED = "BudgetQuantized"
    COVER_NOTICE = "CoverNotice"


RATIONAL_KINDS = frozenset({Kind.INITIAL_WEIGHT, Kind.REQUEST, Kind.BUDGET_EXACT})
INTEGER_KINDS = frozenset({Kind.REQUEST_DEGREE, Kind.BUDGET_QUANTIZED})
BUDGET_KINDS = frozenset({Kind.BUDGET_EXACT, Kind.BUDGET_ACCEPT, Kind.BUDGET_QUANTIZED})

Payload = Union[Q, int, None]


@dataclass(frozen=True)
class Message:
    """One delivered message. ``round`` is the round in which ``dst`` receives it."""

    kind: Kind
    src: int
    dst: int
    iteration: int
    payload: Payload = None
    round: int = -1

    def __post_init__(self) -> None:
        if self.src == self.dst:
            raise ValueError(f"message from vertex {self.src} to itself")
        if self.kind in RATIONAL_KINDS:
            if not is_exact(self.payload) or isinstance(self.payload, int) or self.payload < 0:
                raise ValueError(f"{self.kind.value} needs a non-negative rational, got {self.payload!r}")
        elif self.kind in INTEGER_KINDS:
            if not isinstance(self.payload, int) or self.payload < 0:
                raise ValueError(f"{self.kind.value} needs a non-negative int, got {self.payload!r}")
            if self.kind is Kind.REQUEST_DEGREE and self.payload == 0:
                raise ValueError("RequestDegree must carry a positive degree")
        elif self.payload is not None:
            raise ValueError(f"{self.kind.value} carries no payload")

    def to_record(self) -> dict:
        if self.kind in RATIONAL_KINDS:
            payload: str | int | None = fmt(self.payload)
        else:
            payload = self.payload
        return {
            "round": self.round,
            "src": self.src,
            "dst": self.dst,
            "kind": self.kind.value,
            "payload": payload,
            "iter": self.iteration,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_record(cls, rec: dict) -> "Message":
        kind = Kind(rec["kind"])
        payload = rec["payload"]
        if kind in RATIONAL_KINDS:
            payload = Q(payload)
        return cls(kind, rec["src"], rec["dst"], rec["iter"], payload, rec["round"])


def payload_bits(msg: Message) -> int:
    if msg.kind in RATIONAL_KINDS:
        return TAG_BITS + rational_bits(msg.payload)  # type: ignore[arg-type]
    if msg.kind in INTEGER_KINDS:
        return TAG_BITS + nbits(msg.payload)  # type: ignore[arg-type]
    return TAG_BITS
