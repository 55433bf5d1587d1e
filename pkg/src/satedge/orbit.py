"""Single-plane constellation geometry.

The ground user sits at reference angle 0. Each satellite is described by the
signed angle ``gamma`` (degrees) between its Earth-center line and the user's
Earth-center line. Satellites move clockwise, so ``gamma`` decreases in time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence


@dataclass(frozen=True)
class ConstellationConfig:
    satellite_count: int = 12
    earth_radius: float = 6371.0          # km
    orbit_altitude: float = 780.0         # km
    angular_spacing: float = 4.0          # deg between neighbours
    angular_velocity: float = 0.0002      # deg/s, clockwise
    visibility_bound: float = 10.0        # deg, half-angle of service cone
    first_angle: Optional[float] = None   # deg; None centres the plane on the user

    def __post_init__(self):
        if self.satellite_count < 0:
            raise ValueError("satellite_count must be >= 0")
        if self.earth_radius <= 0 or self.orbit_altitude <= 0:
            raise ValueError("earth_radius and orbit_altitude must be positive")
        if not 0 < self.visibility_bound < 90:
            raise ValueError("visibility_bound out of (0, 90)")
        if self.angular_spacing <= 0:
            raise ValueError("angular_spacing must be positive")

    def initial_angles(self) -> list[float]:
        """Starting ``gamma`` of every satellite, evenly spaced."""
        J = self.satellite_count
        start = self.first_angle
        if start is None:
            start = -0.5 * (J - 1) * self.angular_spacing
        return [normalize_angle(start + j * self.angular_spacing) for j in range(J)]


@dataclass(frozen=True)
class SatelliteState:
    index: int
    gamma: float                          # deg, in (-180, 180]
    slant_range: float                    # km
    backlog_release_time: float = 0.0     # absolute s


def normalize_angle(angle: float) -> float:
    """Map ``angle`` (degrees) into (-180, 180]."""
    a = math.fmod(angle, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a


def slant_range(gamma: float, earth_radius: float, altitude: float) -> float:
    """User-to-satellite distance from the cosine rule (same unit as the radii)."""
    # H^2 + 4R(R+H)sin^2(gamma/2) is the cosine rule without the cancellation at gamma=0
    half = math.sin(math.radians(gamma) / 2.0)
    return math.sqrt(altitude * altitude + 4.0 * earth_radius * (earth_radius + altitude) * half * half)


def is_visible(state: SatelliteState, config: ConstellationConfig) -> bool:
    return abs(state.gamma) < config.visibility_bound


def initial_states(config: ConstellationConfig) -> list[SatelliteState]:
    return [
        SatelliteState(j, g, slant_range(g, config.earth_radius, config.orbit_altitude))
        for j, g in enumerate(config.initial_angles())
    ]


def advance(
    constellation: ConstellationConfig,
    states: Sequence[SatelliteState],
    dt: float,
) -> list[SatelliteState]:
    """Rotate every satellite clockwise by ``angular_velocity * dt`` degrees."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    shift = constellation.angular_velocity * dt
    out = []
    for s in states:
        g = normalize_angle(s.gamma - shift)
        out.append(replace(
            s, gamma=g,
            slant_range=slant_range(g, constellation.earth_radius, constellation.orbit_altitude),
        ))
    return out


def gamma_at(config: ConstellationConfig, gamma0: float, dt: float) -> float:
    """Angle of a satellite ``dt`` seconds after it was at ``gamma0``."""
    return normalize_angle(gamma0 - config.angular_velocity * dt)
