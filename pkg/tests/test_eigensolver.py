import math

import numpy as np
import pytest

from trapspec.errors import DomainError, MeshError
from trapspec.eigensolver import (
    DIRICHLET,
    NEUMANN,
    Spectrum,
    compute_spectrum,
    exact_rectangle_spectrum,
    level_eigenvalues,
)
from trapspec.geometry import Polygon
from trapspec.mesh import refine_uniform, triangulate

PI2 = math.pi**2

UNIT_SQUARE = Polygon(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
RIGHT_ISO_TRIANGLE = Polygon(np.array([[0, 0], [1, 0], [0, 1]], dtype=float))


def half_square_dirichlet(n):
    """Dirichlet eigenvalues of the right isosceles triangle with legs 1.

    Antisymmetric square modes: pi^2 (m^2 + k^2) with m > k >= 1.
    """
    vals = sorted(
        PI2 * (m * m + k * k) for m in range(1, 40) for k in range(1, m)
    )
    return np.array(vals[:n])


class TestExactRectangle:
    def test_unit_square_dirichlet(self):
        s = exact_rectangle_spectrum(1, 1, 5)
        assert s.eigenvalues == pytest.approx(
            [2 * PI2, 5 * PI2, 5 * PI2, 8 * PI2, 10 * PI2], rel=1e-14
        )

    def test_unit_square_neumann(self):
        s = exact_rectangle_spectrum(1, 1, 4, bc=NEUMANN)
        assert s.eigenvalues == pytest.approx([0, PI2, PI2, 2 * PI2], abs=1e-12)

    def test_one_by_two(self):
        s = exact_rectangle_spectrum(1, 2, 1)
        assert s.eigenvalues[0] == pytest.approx(1.25 * PI2, rel=1e-14)

    def test_bad_input(self):
        with pytest.raises(DomainError):
            exact_rectangle_spectrum(-1, 1, 5)


class TestFemOracles:
    def test_unit_square_dirichlet_half_percent(self):
        s = compute_spectrum(UNIT_SQUARE, DIRICHLET, n=20, mesh_size=1 / 32, refine_levels=3)
        exact = exact_rectangle_spectrum(1, 1, 20).eigenvalues
        assert np.max(np.abs(s.eigenvalues - exact) / exact) < 0.005

    def test_unit_square_neumann_half_percent(self):
        s = compute_spectrum(UNIT_SQUARE, NEUMANN, n=20, mesh_size=1 / 32, refine_levels=3)
        exact = exact_rectangle_spectrum(1, 1, 20, bc=NEUMANN).eigenvalues
        assert abs(s.eigenvalues[0]) < 1e-6 * s.eigenvalues[-1]
        rel = np.abs(s.eigenvalues[1:] - exact[1:]) / exact[1:]
        assert np.max(rel) < 0.005

    def test_right_isosceles_triangle(self):
        s = compute_spectrum(
            RIGHT_ISO_TRIANGLE, DIRICHLET, n=10, mesh_size=1 / 32, refine_levels=3
        )
        exact = half_square_dirichlet(10)
        assert s.eigenvalues[0] == pytest.approx(5 * PI2, rel=0.005)
        assert np.max(np.abs(s.eigenvalues - exact) / exact) < 0.01

    def test_convergence_order(self):
        levels = level_eigenvalues(UNIT_SQUARE, DIRICHLET, 10, 1 / 32, 3)
        exact = exact_rectangle_spectrum(1, 1, 10).eigenvalues
        e0 = np.abs(levels[-3] - exact)
        e1 = np.abs(levels[-2] - exact)
        e2 = np.abs(levels[-1] - exact)
        orders = np.log2(e0 / e1), np.log2(e1 / e2)
        for o in orders:
            assert np.all(o > 1.7) and np.all(o < 2.3)

    def test_dirichlet_upper_bounds(self):
        # conforming Dirichlet elements over-estimate every eigenvalue
        for lev in level_eigenvalues(UNIT_SQUARE, DIRICHLET, 15, 1 / 16, 2):
            exact = exact_rectangle_spectrum(1, 1, 15).eigenvalues
            assert np.all(lev >= exact - 1e-9)

    def test_weyl_consistency(self):
        s = compute_spectrum(UNIT_SQUARE, DIRICHLET, n=120, mesh_size=1 / 32, refine_levels=2)
        lam_n = s.eigenvalues[-1]
        assert abs(lam_n - 4 * math.pi * s.count / 1.0) / lam_n <= 0.2

    def test_congruence_invariance(self):
        th = 0.7
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        moved = UNIT_SQUARE.transformed(rot, np.array([3.0, -1.5]))
        a = compute_spectrum(UNIT_SQUARE, DIRICHLET, n=10, mesh_size=1 / 16, refine_levels=2)
        b = compute_spectrum(moved, DIRICHLET, n=10, mesh_size=1 / 16, refine_levels=2)
        tol = (np.max(a.accuracy) + np.max(b.accuracy) + 1e-3) * a.eigenvalues
        assert np.all(np.abs(a.eigenvalues - b.eigenvalues) <= tol)

    def test_mesh_size_guard(self):
        with pytest.raises(MeshError):
            compute_spectrum(UNIT_SQUARE, DIRICHLET, n=5, mesh_size=0.5)


class TestMesh:
    def test_refinement_quadruples_triangles(self):
        m = triangulate(UNIT_SQUARE, 0.25)
        m2 = refine_uniform(m, UNIT_SQUARE)
        assert len(m2.triangles) == 4 * len(m.triangles)
        assert m2.h == pytest.approx(m.h / 2)

    def test_covers_area(self):
        m = triangulate(RIGHT_ISO_TRIANGLE, 0.1)
        p = m.nodes[m.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        assert np.all(areas > 0)  # CCW
        assert np.sum(areas) == pytest.approx(0.5, rel=1e-12)

    def test_boundary_mask(self):
        m = triangulate(UNIT_SQUARE, 0.2)
        on = m.nodes[m.boundary_mask]
        d = np.minimum.reduce(
            [on[:, 0], on[:, 1], 1 - on[:, 0], 1 - on[:, 1]]
        )
        assert np.max(np.abs(d)) < 1e-9


class TestSpectrumIO:
    def test_csv_round_trip(self):
        s = exact_rectangle_spectrum(1, 2, 30)
        s2 = Spectrum.from_csv(s.to_csv())
        assert np.array_equal(s.eigenvalues, s2.eigenvalues)
        assert s2.boundary_condition == DIRICHLET
        assert np.allclose(s2.source_domain.vertices, s.source_domain.vertices)

    def test_json_round_trip(self):
        s = exact_rectangle_spectrum(1, 1, 10, bc=NEUMANN)
        s2 = Spectrum.from_json(s.to_json())
        assert np.array_equal(s.eigenvalues, s2.eigenvalues)
        assert s2.boundary_condition == NEUMANN

    def test_sorted_enforced(self):
        with pytest.raises(DomainError):
            Spectrum(eigenvalues=np.array([3.0, 1.0]), boundary_condition=DIRICHLET)
