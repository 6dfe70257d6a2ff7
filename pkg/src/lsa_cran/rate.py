"""Achievable rate of an MVNO on the shared distributed-MIMO C-RAN.

Rate grows with the number of spatial streams, one stream per ``m0`` antennas,
each stream carrying ``sigma`` bps/Hz over the assigned bandwidth. The default
parameters give 200 Mbps with 20 antennas on 10 MHz, and 200 Mbps on a single
5 MHz channel once 40 antennas are pooled.

Everything is integer arithmetic so that the allocator never compares floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class RateModelParams:
    m0: int = 10
    sigma_bps_hz: Fraction = Fraction(10)

    def __post_init__(self):
        if self.m0 < 1:
            raise ValueError("m0 must be >= 1")
        object.__setattr__(self, "sigma_bps_hz", Fraction(self.sigma_bps_hz))
        if self.sigma_bps_hz <= 0:
            raise ValueError("sigma must be positive")


def streams(params: RateModelParams, antennas: int) -> int:
    return antennas // params.m0


def rate(params: RateModelParams, antennas: int, bandwidth_hz: int) -> int:
    """Rate in bps, rounded down to an integer."""
    if antennas < 0 or bandwidth_hz < 0:
        raise ValueError("antennas and bandwidth must be non-negative")
    return int(bandwidth_hz * streams(params, antennas) * params.sigma_bps_hz)


def min_antennas(
    params: RateModelParams, bandwidth_hz: int, required_bps: int, m_min: int, m_max: int
) -> int | None:
    """Smallest antenna count in ``[m_min, m_max]`` reaching ``required_bps``, else None."""
    if m_min > m_max:
        raise ValueError("m_min > m_max")
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    per_stream = bandwidth_hz * params.sigma_bps_hz
    # ceil(required / per_stream) streams, but rate() floors, so re-check below
    need = -(-Fraction(required_bps) // per_stream)
    m = max(m_min, int(need) * params.m0)
    while m <= m_max and rate(params, m, bandwidth_hz) < required_bps:
        m += params.m0 - m % params.m0
    return m if m <= m_max else None
