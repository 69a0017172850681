import json
import math

import numpy as np
from django.test import SimpleTestCase

from fields.exceptions import DimensionError, DomainError, QuadratureError
from fields.lattice_green import (
    GreenTable,
    KilledWalk,
    _bessel_values,
    box_exit_kernel,
    box_green_spectral,
    box_outer_boundary,
    box_sites,
    build_green_table,
    escape_probability,
    green_dirichlet,
    green_far_field_constant,
    green_fourier,
    green_infinite,
    green_table_path,
    hitting_distribution,
    load_or_build_green_table,
    walk_visits_oracle,
)

from .base import TempCacheMixin

G0_D3 = 1.516386059151978


class GreenInfiniteTests(SimpleTestCase):
    def test_origin_value_in_three_dimensions(self):
        self.assertAlmostEqual(green_infinite((0, 0, 0), 3), G0_D3, delta=1e-7)

    def test_neighbour_value_is_g0_minus_one(self):
        g0 = green_infinite((0, 0, 0), 3)
        self.assertAlmostEqual(green_infinite((1, 0, 0), 3), g0 - 1.0, delta=1e-7)

    def test_symmetric_under_sign_and_permutation(self):
        self.assertEqual(green_infinite((1, -2, 3), 3), green_infinite((3, 1, -2), 3))
        raw = _bessel_values(np.array([[1, 2, 3], [3, 2, 1], [2, 3, 1]]), 3, 64)
        self.assertAlmostEqual(raw[0], raw[1], delta=1e-12)
        self.assertAlmostEqual(raw[0], raw[2], delta=1e-12)

    def test_decreasing_along_an_axis(self):
        values = [green_infinite((k, 0, 0), 3) for k in range(6)]
        self.assertTrue(all(a > b > 0 for a, b in zip(values, values[1:])))

    def test_far_field_constant(self):
        a3 = green_far_field_constant(3)
        self.assertAlmostEqual(a3, 3 / (2 * math.pi), places=12)
        self.assertAlmostEqual(40 * green_infinite((40, 0, 0), 3) / a3, 1.0, delta=0.01)

    def test_fourier_cross_check(self):
        for x in [(0, 0, 0), (1, 1, 0)]:
            with self.subTest(x=x):
                self.assertAlmostEqual(green_fourier(x, 3, tol=1e-6), green_infinite(x, 3), delta=2e-5)

    def test_escape_probability(self):
        self.assertAlmostEqual(escape_probability(3), 1 / G0_D3, delta=1e-7)
        self.assertGreater(escape_probability(5), escape_probability(3))

    def test_higher_dimension_origin_above_one(self):
        self.assertGreater(green_infinite((0,) * 4, 4), 1.0)
        self.assertLess(green_infinite((0,) * 4, 4), green_infinite((0,) * 3, 3))

    def test_rejects_low_dimension(self):
        with self.assertRaises(DimensionError):
            green_infinite((0, 0), 2)

    def test_rejects_non_positive_tolerance(self):
        with self.assertRaises(DomainError):
            green_infinite((0, 0, 0), 3, tol=0)


class GreenTableTests(TempCacheMixin, SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.table = build_green_table(3, 4)

    def test_harmonic_away_from_origin(self):
        residuals = self.table.harmonicity_residuals()
        self.assertIn((0, 0, 0), residuals)
        self.assertLessEqual(max(abs(r) for r in residuals.values()), 1e-7)

    def test_lookup_uses_symmetry(self):
        self.assertEqual(self.table.value((-1, 2, 0)), self.table.value((0, 1, 2)))
        self.assertEqual(self.table[(0, 0, -3)], self.table.value((3, 0, 0)))
        self.assertAlmostEqual(self.table.g0, green_infinite((0, 0, 0), 3), delta=1e-7)

    def test_outside_window_is_rejected(self):
        with self.assertRaises(DomainError):
            self.table.value((5, 0, 0))
        with self.assertRaises(DomainError):
            self.table.cross([(0, 0, 0)], [(5, 0, 0)])

    def test_covariance_is_symmetric_positive_definite(self):
        sites = box_sites(3, 3)
        cov = self.table.covariance(sites)
        np.testing.assert_allclose(cov, cov.T)
        self.assertGreater(np.linalg.eigvalsh(cov).min(), 0)
        self.assertTrue(self.table.covers(sites))
        self.assertFalse(self.table.covers([(0, 0, 0), (6, 0, 0)]))

    def test_incomplete_values_are_rejected(self):
        with self.assertRaises(DomainError):
            GreenTable(3, 1, 1e-8, {(0, 0, 0): G0_D3})

    def test_cache_file_is_written_and_reused(self):
        table = load_or_build_green_table(3, 2)
        path = green_table_path(3, 2, 1e-8)
        self.assertTrue(path.exists())
        self.assertEqual(path.name, 'green-d3-R2-tol1e-08.json')
        with open(path, encoding='utf-8') as f:
            self.assertEqual(json.load(f)['radius'], 2)
        self.assertEqual(load_or_build_green_table(3, 2), table)

    def test_unreadable_cache_is_rebuilt(self):
        path = green_table_path(3, 1, 1e-8)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text('not json', encoding='utf-8')
        with self.assertLogs('fields.lattice_green', 'WARNING'):
            table = load_or_build_green_table(3, 1)
        self.assertAlmostEqual(table.g0, G0_D3, delta=1e-7)

    def test_cache_key_keeps_the_full_tolerance(self):
        self.assertNotEqual(green_table_path(3, 2, 1.5e-8), green_table_path(3, 2, 1.54e-8))

    def test_corrupted_cache_is_rebuilt(self):
        path = green_table_path(3, 1, 1e-8)
        path.parent.mkdir(parents=True, exist_ok=True)
        corrupted = build_green_table(3, 1).to_dict()
        corrupted['values'] = [[0, 0, 0, 0.5], [0, 0, 1, -3.0], [0, 1, 1, 0.2], [1, 1, 1, 0.1]]
        path.write_text(json.dumps(corrupted), encoding='utf-8')
        with self.assertLogs('fields.lattice_green', 'WARNING') as logs:
            table = load_or_build_green_table(3, 1)
        self.assertIn('g(0) > 1', logs.output[0])
        self.assertAlmostEqual(table.g0, G0_D3, delta=1e-7)
        self.assertGreater(min(table.values.values()), 0)

    def test_cache_for_another_window_is_rebuilt(self):
        path = green_table_path(3, 1, 1e-8)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(build_green_table(3, 2).to_dict()), encoding='utf-8')
        with self.assertLogs('fields.lattice_green', 'WARNING'):
            table = load_or_build_green_table(3, 1)
        self.assertEqual(table.radius, 1)

    def test_validate_rejects_a_non_harmonic_table(self):
        values = {(0, 0, 0): G0_D3, (0, 0, 1): G0_D3 - 0.99, (0, 1, 1): 0.3, (1, 1, 1): 0.2}
        with self.assertRaises(QuadratureError):
            GreenTable(3, 1, 1e-8, values).validate()
        self.assertIs(self.table.validate(), self.table)


class DirichletGreenTests(SimpleTestCase):
    def test_single_site(self):
        green = green_dirichlet([(0, 0, 0)])
        np.testing.assert_allclose(green.matrix, [[1.0]])

    def test_two_adjacent_sites(self):
        green = green_dirichlet([(0, 0, 0), (1, 0, 0)])
        np.testing.assert_allclose(green.matrix, [[36 / 35, 6 / 35], [6 / 35, 36 / 35]], atol=1e-12)
        self.assertLess(green.residual(), 1e-12)

    def test_empty_domain_is_rejected(self):
        with self.assertRaises(DomainError):
            green_dirichlet(np.zeros((0, 3), dtype=np.int64))

    def test_spectral_box_matches_dense_solve(self):
        dense = green_dirichlet(box_sites(4, 3))
        spectral = box_green_spectral(4, 3)
        np.testing.assert_allclose(spectral.matrix, dense.matrix, atol=1e-10)
        self.assertGreater(spectral.min_eigenvalue(), 0)

    def test_variances_grow_with_the_domain(self):
        small = green_dirichlet(box_sites(3, 3) + 1)
        large = green_dirichlet(box_sites(5, 3))
        index = {tuple(s): i for i, s in enumerate(large.sites.tolist())}
        for i, site in enumerate(small.sites.tolist()):
            self.assertLessEqual(small.matrix[i, i], large.matrix[index[tuple(site)], index[tuple(site)]] + 1e-12)
        self.assertTrue((large.diagonal() >= 1.0).all())
        self.assertTrue((large.diagonal() < G0_D3).all())

    def test_exit_kernel_rows_sum_to_one(self):
        boundary, kernel = box_exit_kernel(3, 3)
        self.assertEqual(boundary.shape, (54, 3))
        self.assertEqual(kernel.shape, (27, 54))
        np.testing.assert_allclose(kernel.sum(axis=1), 1.0, atol=1e-12)
        self.assertTrue((kernel > 0).all())

    def test_outer_boundary_neighbours_are_inside(self):
        outer, inner = box_outer_boundary(3, 3)
        np.testing.assert_array_equal(np.abs(outer - inner).sum(axis=1), 1)
        self.assertTrue(((inner >= 0) & (inner <= 2)).all())


class HittingDistributionTests(TempCacheMixin, SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.table = load_or_build_green_table(3, 4)

    def test_start_in_target_set_is_a_point_mass(self):
        hit = hitting_distribution((0, 0, 0), [(0, 0, 0), (1, 0, 0)])
        np.testing.assert_array_equal(hit.weights, [1.0, 0.0])
        self.assertEqual(hit.defect, 0.0)

    def test_single_target_mass_converges_from_below(self):
        exact = green_infinite((2, 0, 0), 3) / green_infinite((0, 0, 0), 3)
        masses = [
            hitting_distribution((2, 0, 0), [(0, 0, 0)], trunc_radius=r).weights.sum() for r in (8, 16, 32)
        ]
        self.assertTrue(masses[0] < masses[1] < masses[2] < exact)
        self.assertLess(exact - masses[2], 0.01)

    def test_unconverged_refinement_is_flagged(self):
        with self.assertLogs('fields.lattice_green', 'WARNING'):
            hit = hitting_distribution((2, 0, 0), [(0, 0, 0)], max_sites=100_000, method='truncated')
        self.assertFalse(hit.converged)
        self.assertEqual(hit.radius, 32)

    def test_default_is_exact_from_the_green_function(self):
        exact = green_infinite((2, 0, 0), 3) / green_infinite((0, 0, 0), 3)
        hit = hitting_distribution((2, 0, 0), [(0, 0, 0)])
        self.assertTrue(hit.converged)
        self.assertEqual(hit.radius, 0)
        self.assertAlmostEqual(hit.weights[0], exact, delta=1e-7)

    def test_exact_weights_reproduce_g_on_the_target_set(self):
        targets = [(0, 0, 0), (1, 0, 0), (0, 2, 1)]
        hit = hitting_distribution((3, 1, 0), targets, green=self.table)
        np.testing.assert_allclose(
            hit.weights @ self.table.covariance(targets), self.table.cross([(3, 1, 0)], targets)[0], atol=1e-10,
        )
        self.assertTrue(0 < hit.weights.sum() < 1)

    def test_exact_and_truncated_agree_on_an_enclosing_shell(self):
        boundary, _ = box_outer_boundary(3, 3)
        exact = hitting_distribution((1, 1, 1), boundary, green=self.table)
        truncated = hitting_distribution((1, 1, 1), boundary, trunc_radius=4)
        np.testing.assert_allclose(exact.weights, truncated.weights, atol=1e-5)
        self.assertAlmostEqual(exact.weights.sum(), 1.0, delta=1e-5)

    def test_truncated_weights_sit_below_the_exact_ones(self):
        exact = hitting_distribution((2, 0, 0), [(0, 0, 0), (0, 1, 0)], green=self.table)
        truncated = hitting_distribution((2, 0, 0), [(0, 0, 0), (0, 1, 0)], trunc_radius=16)
        self.assertTrue((truncated.weights < exact.weights).all())

    def test_unknown_method_is_rejected(self):
        with self.assertRaises(DomainError):
            hitting_distribution((2, 0, 0), [(0, 0, 0)], method='walk')

    def test_shell_identity_for_the_box_interior(self):
        boundary, _ = box_outer_boundary(3, 3)
        centre = (1, 1, 1)
        hit = hitting_distribution(centre, boundary, trunc_radius=4)
        self.assertAlmostEqual(hit.weights.sum(), 1.0, delta=1e-9)
        g_to_shell = self.table.cross([centre], boundary)[0]
        shell = self.table.covariance(boundary)
        np.testing.assert_allclose(hit.weights @ shell, g_to_shell, atol=1e-7)

        box = box_green_spectral(3, 3)
        self.assertAlmostEqual(self.table.g0 - box.matrix[13, 13], hit.weights @ g_to_shell, delta=1e-7)

    def test_killed_walk_rejects_a_small_truncation(self):
        from fields.exceptions import TruncationError

        with self.assertRaises(TruncationError):
            KilledWalk([(0, 0, 0), (10, 0, 0)], radius=4)

    def test_killed_walk_rejects_a_start_in_the_target(self):
        walk = KilledWalk([(0, 0, 0)], radius=4)
        with self.assertRaises(DomainError):
            walk.row((0, 0, 0))


class WalkOracleTests(SimpleTestCase):
    def test_visit_count_estimates_g0(self):
        oracle = walk_visits_oracle(3, walks=4000, max_steps=400, seed=1)
        self.assertLess(abs(oracle.green_estimate - G0_D3), 5 * oracle.visits_stderr + 0.005)
        self.assertLess(abs(oracle.return_probability - (1 - 1 / G0_D3)), 0.05)
        self.assertGreater(oracle.tail, 0)
