"""Weather/lighting condition labels.

Kept in a leaf module because both the dataset manifest and the weather
simulator need them.
"""

from __future__ import annotations

import enum


class WeatherCondition(enum.Enum):
    """The seven condition labels. DAY_CLEAR is the identity condition."""

    DAY_CLEAR = "day-clear"
    DAY_RAIN = "day-rain"
    DAY_CLOUDY = "day-cloudy"
    DAY_SUNNY = "day-sunny"
    NIGHT_CLEAR = "night-clear"
    NIGHT_RAIN = "night-rain"
    NIGHT_CLOUDY = "night-cloudy"


# The six synthetic variants, in the fixed order used for cyclic assignment.
NON_CLEAR_CONDITIONS: tuple[WeatherCondition, ...] = (
    WeatherCondition.DAY_RAIN,
    WeatherCondition.DAY_CLOUDY,
    WeatherCondition.DAY_SUNNY,
    WeatherCondition.NIGHT_CLEAR,
    WeatherCondition.NIGHT_RAIN,
    WeatherCondition.NIGHT_CLOUDY,
)
