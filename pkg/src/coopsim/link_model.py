"""Slot-based link capacity model.

A slot of length ``tau0`` on a link carries ``B0 * rho_capacity * (1 - rho_delay)``
bits, where ``B0 = c0 * tau0`` is what a full-capacity, zero-delay link
would carry. A transfer of ``payload_bits`` needs the ceiling of
payload over bits-per-slot slots.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from coopsim.topology import Link


class LinkModelError(Exception):
    pass


class AsymptoticCapacityViolated(LinkModelError):
    pass


class UnusableLink(LinkModelError):
    pass


class LinkClass(enum.Enum):
    USABLE = "usable"
    USELESS = "useless"
    NEAR_IMPOSSIBLE = "near_impossible"


@dataclass(frozen=True)
class NetworkParams:
    c0: float
    tau0: float
    c0_is_asymptotic: bool = False

    def __post_init__(self):
        if not (self.c0 > 0):
            raise ValueError(f"c0 must be positive, got {self.c0!r}")
        if not (self.tau0 > 0):
            raise ValueError(f"tau0 must be positive, got {self.tau0!r}")

    @property
    def b0(self) -> float:
        return self.c0 * self.tau0


@dataclass(frozen=True)
class TransferRequest:
    payload_bits: int

    def __post_init__(self):
        if int(self.payload_bits) != self.payload_bits or self.payload_bits < 1:
            raise ValueError(f"payload_bits must be a positive integer, got {self.payload_bits!r}")


def bits_per_slot(params: NetworkParams, link: Link) -> float:
    if params.c0_is_asymptotic and link.rho_capacity >= 1.0:
        raise AsymptoticCapacityViolated(
            f"link {link.id!r} has rho_capacity=1 but c0 is an asymptotic limit"
        )
    return params.b0 * link.rho_capacity * (1.0 - link.rho_delay)


def classify_link(link: Link) -> LinkClass:
    if link.rho_delay == 1.0:
        return LinkClass.USELESS
    if link.rho_delay == 0.0:
        return LinkClass.NEAR_IMPOSSIBLE
    return LinkClass.USABLE


def slots_required(per_slot: float, request: TransferRequest | int) -> int:
    """Whole slots needed to move ``request`` at ``per_slot`` bits per slot.

    The result satisfies ``(k - 1) * per_slot < payload <= k * per_slot``
    as evaluated in floating point, not just in exact arithmetic, while
    ``k`` stays below 2**52.
    """
    payload = request.payload_bits if isinstance(request, TransferRequest) else request
    if not (per_slot > 0):
        raise UnusableLink(f"per-slot capacity must be positive, got {per_slot!r}")
    if payload < 1:
        raise ValueError(f"payload_bits must be >= 1, got {payload!r}")
    k = max(1, math.ceil(payload / per_slot))
    # the division can round across an integer; nudge back into the bracket
    if k * per_slot < payload:
        k += 1
    elif k > 1 and (k - 1) * per_slot >= payload:
        k -= 1
    return k
