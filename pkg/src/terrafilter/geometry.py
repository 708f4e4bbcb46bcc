"""Waypoint geometry for gimbal-mounted rangefinder terrain following.

The vehicle at the current waypoint measures a slant range d at gimbal
pitch phi and heading psi; the next waypoint sits above the measured ground
point at the commanded clearance h. The vertical component dominates
terrain-following accuracy, so its uncertainty gets a closed form.
"""

import math
from dataclasses import dataclass

from .exceptions import InvalidInputError


@dataclass(frozen=True)
class WaypointGeometry:
    """One ranging configuration: gimbal pitch/yaw, slant distance,
    commanded clearance, and the sensor noise standard deviations."""

    pitch: float
    yaw: float
    lidar_distance: float
    clearance: float
    lidar_std: float = 0.0
    gimbal_std: float = 0.0

    def __post_init__(self):
        if self.lidar_distance <= 0:
            raise InvalidInputError("lidar_distance must be positive")
        if self.lidar_std < 0 or self.gimbal_std < 0:
            raise InvalidInputError("noise standard deviations must be non-negative")


def next_waypoint(current, geom: WaypointGeometry, noise=(0.0, 0.0)):
    """Advance one waypoint given a noisy range/pitch observation.

    ``noise`` is (v_d, v_phi), the rangefinder and gimbal errors:

        x' = x + h cos(phi + v_phi) cos(psi)
        y' = y + h cos(phi + v_phi) sin(psi)
        z' = z + h - (d + v_d) sin(phi + v_phi)
    """
    x, y, z = (float(c) for c in current)
    v_d, v_phi = (float(v) for v in noise)
    pitch = geom.pitch + v_phi
    h = geom.clearance
    return (
        x + h * math.cos(pitch) * math.cos(geom.yaw),
        y + h * math.cos(pitch) * math.sin(geom.yaw),
        z + h - (geom.lidar_distance + v_d) * math.sin(pitch),
    )


def vertical_recursion(z_prev: float, clearance: float, lidar_distance: float,
                       pitch: float, v_d: float = 0.0, v_phi: float = 0.0) -> float:
    """Vertical-only form of the waypoint step:
    z' = z + h - (d + v_d) sin(phi + v_phi)."""
    return float(z_prev) + clearance - (lidar_distance + v_d) * math.sin(pitch + v_phi)


def waypoint_std(lidar_distance: float, pitch: float,
                 lidar_std: float, gimbal_std: float) -> float:
    """First-order standard deviation of the vertical waypoint increment:

        sigma_dz = sqrt(sin^2(phi) sigma_lidar^2 + d^2 cos^2(phi) sigma_gimbal^2)

    At phi = pi/2 only the rangefinder matters; at phi = 0 only the gimbal
    does, amplified by the slant distance.
    """
    if lidar_distance <= 0:
        raise InvalidInputError("lidar_distance must be positive")
    s, c = math.sin(pitch), math.cos(pitch)
    return math.sqrt(
        s * s * lidar_std * lidar_std
        + lidar_distance * lidar_distance * c * c * gimbal_std * gimbal_std
    )
