import math

import numpy as np
import pytest

from terrafilter import (InvalidInputError, WaypointGeometry, next_waypoint,
                         vertical_recursion, waypoint_std)


class TestNextWaypoint:
    def test_straight_down_ranging(self):
        geom = WaypointGeometry(pitch=math.pi / 2, yaw=1.3,
                                lidar_distance=20.0, clearance=5.0)
        x, y, z = next_waypoint((1.0, 2.0, 3.0), geom)
        assert x == pytest.approx(1.0, abs=1e-12)
        assert y == pytest.approx(2.0, abs=1e-12)
        assert z == pytest.approx(3.0 + 5.0 - 20.0)

    def test_horizontal_ranging(self):
        geom = WaypointGeometry(pitch=0.0, yaw=0.0,
                                lidar_distance=20.0, clearance=5.0)
        x, y, z = next_waypoint((0.0, 0.0, 0.0), geom)
        assert (x, y, z) == pytest.approx((5.0, 0.0, 5.0))

    def test_hand_trigonometry(self):
        geom = WaypointGeometry(pitch=math.pi / 6, yaw=math.pi / 2,
                                lidar_distance=20.0, clearance=5.0)
        x, y, z = next_waypoint((0.0, 0.0, 0.0), geom)
        assert x == pytest.approx(0.0, abs=1e-12)
        assert y == pytest.approx(5.0 * math.cos(math.pi / 6))
        assert z == pytest.approx(5.0 - 20.0 * 0.5)

    def test_invalid_geometry(self):
        with pytest.raises(InvalidInputError):
            WaypointGeometry(pitch=0.1, yaw=0.0, lidar_distance=0.0,
                             clearance=5.0)
        with pytest.raises(InvalidInputError):
            WaypointGeometry(pitch=0.1, yaw=0.0, lidar_distance=1.0,
                             clearance=5.0, lidar_std=-0.1)


class TestVerticalRecursion:
    def test_level_flight_fixed_point(self):
        # d sin(phi) == h keeps altitude constant
        h, phi = 5.0, math.pi / 6
        d = h / math.sin(phi)
        assert vertical_recursion(12.0, h, d, phi) == pytest.approx(12.0)

    def test_matches_waypoint_z_component(self, rng):
        for _ in range(1000):
            z0 = rng.uniform(-50, 50)
            h = rng.uniform(1, 30)
            d = rng.uniform(1, 100)
            phi = rng.uniform(0.05, math.pi / 2 - 0.05)
            v_d = rng.normal(0, 0.1)
            v_phi = rng.normal(0, 0.01)
            geom = WaypointGeometry(pitch=phi, yaw=rng.uniform(0, 2 * math.pi),
                                    lidar_distance=d, clearance=h)
            _, _, z1 = next_waypoint((0.0, 0.0, z0), geom, noise=(v_d, v_phi))
            z2 = vertical_recursion(z0, h, d, phi, v_d, v_phi)
            assert z1 == pytest.approx(z2, abs=1e-12)

    def test_linearization_in_range_noise(self):
        # the increment is linear in v_d with slope -sin(phi + v_phi)
        h, d, phi = 5.0, 40.0, 0.7
        base = vertical_recursion(0.0, h, d, phi, 0.0, 0.0)
        for v_d in (1e-3, 1e-6, 1e-9):
            slope = (vertical_recursion(0.0, h, d, phi, v_d, 0.0) - base) / v_d
            assert slope == pytest.approx(-math.sin(phi), rel=1e-6)

    def test_linearization_in_pitch_noise(self):
        h, d, phi = 5.0, 40.0, 0.7
        base = vertical_recursion(0.0, h, d, phi, 0.0, 0.0)
        hh = 1e-7
        slope = (vertical_recursion(0.0, h, d, phi, 0.0, hh) - base) / hh
        assert slope == pytest.approx(-d * math.cos(phi), rel=1e-5)


class TestWaypointStd:
    def test_vertical_endpoint(self):
        assert waypoint_std(50.0, math.pi / 2, 0.05, 0.002) == pytest.approx(
            0.05, abs=1e-12)

    def test_horizontal_endpoint(self):
        assert waypoint_std(50.0, 0.0, 0.05, 0.002) == pytest.approx(
            50.0 * 0.002, abs=1e-12)

    def test_monte_carlo_oracle(self):
        d, phi, s_l, s_g = 50.0, math.pi / 4, 0.05, 0.002
        rng = np.random.default_rng(2024)
        n = 1_000_000
        v_d = rng.normal(0.0, s_l, n)
        v_phi = rng.normal(0.0, s_g, n)
        dz = -(d + v_d) * np.sin(phi + v_phi)  # clearance offset is constant
        analytic = waypoint_std(d, phi, s_l, s_g)
        assert analytic == pytest.approx(float(dz.std()), rel=0.02)

    def test_invalid_distance(self):
        with pytest.raises(InvalidInputError):
            waypoint_std(0.0, 0.5, 0.05, 0.002)
