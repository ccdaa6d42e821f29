"""Diagnostics on finished runs: characteristics, Oleinik-type bounds, oracles."""

from .characteristics import CharacteristicRegion, generalized_characteristic, region_balance
from .oleinik import exceptional_times, oleinik_two_sided, sample_oleinik
from .oracles import oracle_burgers_riemann, oracle_damped_burgers_ramp

__all__ = [
    "CharacteristicRegion", "generalized_characteristic", "region_balance",
    "exceptional_times", "oleinik_two_sided", "sample_oleinik",
    "oracle_burgers_riemann", "oracle_damped_burgers_ramp",
]
