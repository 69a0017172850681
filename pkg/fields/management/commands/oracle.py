from fields.experiments import run_oracle
from fields.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Monte Carlo ground truth for exceedances on a box of at most 12 sites'
    experiment = 'oracle'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--side', type=int, default=2, help='Box side n (n^d <= 12)')
        parser.add_argument('--z', type=float, default=0.0, help='Threshold level u_N(z)')
        parser.add_argument('--budget', type=int, default=100_000, help='Monte Carlo samples')

    def run(self, config, options):
        return run_oracle(config, side=options['side'], z=options['z'], budget=options['budget'])
