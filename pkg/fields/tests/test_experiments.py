import csv
import json

from django.test import SimpleTestCase, override_settings

from fields.emit import emit, format_value, validate_svg
from fields.exceptions import ConfigError
from fields.experiments import (
    ExperimentConfig,
    load_config,
    run_bounds,
    run_gumbel,
    run_lln,
    run_markov_check,
    run_oracle,
    run_sample,
)
from fields.field_sampler import LAW_DIRICHLET, LAW_IID

from .base import TempCacheMixin


class ConfigTests(TempCacheMixin, SimpleTestCase):
    def test_json_round_trip(self):
        config = ExperimentConfig(name='lln', sides=[4, 6], replicates=200)
        self.assertEqual(ExperimentConfig.from_json(config.to_json()), config)

    def test_invalid_values_are_reported_by_key(self):
        for key, value in [('delta', 0.5), ('replicates', 0), ('n_grid', []), ('n_grid', [8]), ('laws', ['gff'])]:
            with self.subTest(key=key, value=value):
                with self.assertRaises(ConfigError) as cm:
                    ExperimentConfig.from_dict({key: value})
                self.assertIn(key, cm.exception.errors)

    def test_unknown_keys_are_rejected(self):
        with self.assertRaises(ConfigError) as cm:
            ExperimentConfig.from_dict({'sidez': [4]})
        self.assertIn('sidez', cm.exception.errors)

    def test_malformed_json(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_json('{"d": 3')
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_json('[1, 2]')

    def test_tolerance_defaults(self):
        config = ExperimentConfig(tolerances={'gumbel': 0.1})
        self.assertEqual(config.tolerance('gumbel'), 0.1)
        self.assertEqual(config.tolerance('identity'), 1e-7)

    @override_settings(GFFX={'WORKERS': 3, 'OUTPUT_DIR': 'elsewhere'})
    def test_load_config_layers(self):
        path = self.make_out_dir() / 'config.json'
        path.write_text(json.dumps({'sides': [4], 'master_seed': 5}), encoding='utf-8')
        config = load_config(path, name='lln', master_seed=7)
        self.assertEqual(config.name, 'lln')
        self.assertEqual(config.sides, [4])
        self.assertEqual(config.master_seed, 7)
        self.assertEqual(config.workers, 3)
        self.assertEqual(config.output_dir, 'elsewhere')

    def test_missing_config_file(self):
        with self.assertRaises(ConfigError):
            load_config(self.make_out_dir() / 'missing.json')


class GumbelExperimentTests(TempCacheMixin, SimpleTestCase):
    def config(self, **values):
        base = {'laws': [LAW_IID], 'sides': [4, 8], 'replicates': 200, 'master_seed': 1}
        return ExperimentConfig.from_dict({**base, **values})

    def test_rows_and_checks(self):
        config = self.config()
        result = run_gumbel(config)
        self.assertFalse(result.partial)
        self.assertEqual(len(result.rows), 2 * len(config.z_grid))
        self.assertIn('gumbel_band[iid,n=8]', result.checks)
        self.assertIn('ks_decreasing[iid]', result.checks)
        for row in result.rows:
            self.assertLessEqual(row['ci_low'], row['empirical_P'] + 1e-12)
            self.assertGreaterEqual(row['ci_high'], row['empirical_P'] - 1e-12)

    def test_rows_are_reproducible_across_worker_counts(self):
        serial = run_gumbel(self.config())
        pooled = run_gumbel(self.config(workers=2))
        self.assertEqual(serial.rows, pooled.rows)

    def test_single_replicate_skips_checks(self):
        result = run_gumbel(self.config(replicates=1))
        self.assertFalse(result.partial)
        self.assertEqual(result.checks, {})
        self.assertTrue(all(row['ks'] != row['ks'] for row in result.rows))

    def test_dirichlet_box_adds_bulk_rows(self):
        config = self.config(laws=[LAW_DIRICHLET], sides=[4], replicates=50)
        result = run_gumbel(config)
        laws = {row['law'] for row in result.rows}
        self.assertEqual(laws, {'dirichlet-box', 'dirichlet-box-bulk'})
        self.assertEqual(len(result.rows), 2 * len(config.z_grid))
        self.assertTrue(all(row['lower_bound'] is not None for row in result.rows))


class LLNExperimentTests(TempCacheMixin, SimpleTestCase):
    def test_iid_ratios(self):
        config = ExperimentConfig.from_dict({'name': 'lln', 'laws': [LAW_IID], 'sides': [4, 16], 'replicates': 400})
        result = run_lln(config)
        ratios = [row['ratio'] for row in result.rows]
        self.assertTrue(ratios[0] < ratios[1] < 1.0)
        self.assertTrue(result.checks['lln_increasing[iid]'])

    def test_too_few_replicates_are_flagged(self):
        config = ExperimentConfig.from_dict({'name': 'lln', 'laws': [LAW_IID], 'sides': [4], 'replicates': 10})
        result = run_lln(config)
        self.assertEqual(result.rows[0]['flag'], 'too-few-replicates')
        self.assertEqual(result.checks, {})


class BoundsExperimentTests(TempCacheMixin, SimpleTestCase):
    def test_bounds_table(self):
        config = ExperimentConfig.from_dict({
            'name': 'bounds', 'lambdas': [1.0], 'replicates': 2000, 'instance_side': 4, 'z_grid': [0.0, 1.0],
        })
        result = run_bounds(config)
        self.assertFalse(result.partial, result.error)
        kinds = [row['kind'] for row in result.rows]
        self.assertEqual(kinds.count('analytic'), 6 * 2)
        self.assertEqual(kinds.count('iid-control'), 1)
        self.assertEqual(kinds.count('field-instance'), 1)
        for name in (
            'b1_decreasing', 'b3_decreasing', 'b2_decreasing_past_turning_point', 'b2_exponent',
            'poisson_gap[iid,lambda=1]', 'exact_b2_below_instance_bound',
        ):
            self.assertTrue(result.checks[name], name)
        self.assertTrue(result.passed, result.failed_checks)
        self.assertEqual(result.summary['b2_points_past_turning_point'], 3)
        self.assertGreater(result.summary['instance_exact_b2'], 0)

    def test_b2_decay_is_not_checked_on_a_short_grid(self):
        config = ExperimentConfig.from_dict({
            'name': 'bounds', 'lambdas': [1.0], 'replicates': 10, 'instance_side': 2, 'n_grid': [1e3, 1e4, 1e5, 1e6],
        })
        result = run_bounds(config)
        self.assertFalse(result.partial, result.error)
        self.assertEqual(result.summary['b2_points_past_turning_point'], 1)
        self.assertNotIn('b2_decreasing_past_turning_point', result.checks)
        self.assertTrue(result.checks['b1_decreasing'])

    def test_lambda_beyond_the_control_size_is_partial(self):
        config = ExperimentConfig.from_dict({
            'name': 'bounds', 'lambdas': [100.0], 'replicates': 10, 'instance_side': 4, 'n_grid': [1e3],
        })
        result = run_bounds(config)
        self.assertTrue(result.partial)
        self.assertIn('lambda', result.error)


class MarkovCheckExperimentTests(TempCacheMixin, SimpleTestCase):
    def test_identities_hold(self):
        config = ExperimentConfig.from_dict({
            'name': 'markov_check', 'sides': [4, 6], 'check_side': 6, 'replicates': 200,
            'delta': 0.2, 'epsilon': 0.5,
        })
        result = run_markov_check(config)
        self.assertFalse(result.partial, result.error)
        for name in ('markov_identity', 'hitting_methods_agree', 'site_identity', 'drift_variance_below_sup'):
            self.assertTrue(result.checks[name], name)
        exceedances = [row for row in result.rows if row['kind'] == 'drift-exceedance']
        self.assertEqual([row['n'] for row in exceedances], [4, 6])
        for row in exceedances:
            self.assertTrue(0.0 <= row['value'] <= 1.0)


class SmallRunnerTests(TempCacheMixin, SimpleTestCase):
    def test_sample_rows(self):
        config = ExperimentConfig(name='sample', master_seed=4)
        result = run_sample(config, law=LAW_DIRICHLET, side=3)
        self.assertEqual(len(result.rows), 27)
        self.assertEqual(result.columns, ['x1', 'x2', 'x3', 'value'])
        self.assertEqual(result.rows, run_sample(config, law=LAW_DIRICHLET, side=3).rows)

    def test_sample_rejects_the_conditional_law(self):
        result = run_sample(ExperimentConfig(name='sample'), law='conditional', side=3)
        self.assertTrue(result.partial)

    def test_oracle_on_a_pair_of_sites(self):
        config = ExperimentConfig(name='oracle', d=3)
        result = run_oracle(config, side=2, z=0.0, budget=20_000)
        self.assertFalse(result.partial, result.error)
        self.assertEqual(len(result.rows), 2 + 28)
        self.assertTrue(result.checks['savage_bound'])

    def test_oracle_refuses_large_boxes(self):
        result = run_oracle(ExperimentConfig(name='oracle'), side=3, z=0.0, budget=20_000)
        self.assertTrue(result.partial)


class EmitTests(TempCacheMixin, SimpleTestCase):
    def setUp(self):
        config = ExperimentConfig.from_dict({'laws': [LAW_IID], 'sides': [4, 8], 'replicates': 20})
        self.result = run_gumbel(config)

    def test_format_value(self):
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value(float('nan')), '')
        self.assertEqual(format_value(0.1), '0.1')
        self.assertEqual(format_value(True), 'true')

    def test_all_artifacts(self):
        out = self.make_out_dir()
        written = emit(self.result, out_dir=out)
        self.assertEqual(sorted(p.suffix for p in written), ['.csv', '.json', '.svg'])

        with open(out / 'gumbel.csv', encoding='utf-8', newline='') as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], self.result.columns)
        self.assertEqual(len(rows), 1 + len(self.result.rows))

        sidecar = json.loads((out / 'gumbel.json').read_text(encoding='utf-8'))
        self.assertEqual(sidecar['config']['sides'], [4, 8])
        self.assertEqual(sidecar['master_seed'], 0)
        self.assertIn('wall_clock', sidecar)

        root = validate_svg(out / 'gumbel.svg')
        self.assertTrue(root.tag.endswith('svg'))

    def test_csv_bytes_are_reproducible(self):
        again = run_gumbel(self.result.config)
        first, second = self.make_out_dir(), self.make_out_dir()
        emit(self.result, ['csv'], first)
        emit(again, ['csv'], second)
        self.assertEqual((first / 'gumbel.csv').read_bytes(), (second / 'gumbel.csv').read_bytes())

    def test_svg_only_removes_the_intermediate_csv(self):
        out = self.make_out_dir()
        written = emit(self.result, ['svg'], out)
        self.assertEqual([p.name for p in written], ['gumbel.svg'])
        self.assertFalse((out / 'gumbel.csv').exists())

    def test_malformed_svg_is_rejected(self):
        path = self.make_out_dir() / 'broken.svg'
        path.write_text('<svg><g></svg>', encoding='utf-8')
        with self.assertRaises(ValueError):
            validate_svg(path)
