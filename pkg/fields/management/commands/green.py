from fields.experiments import run_green
from fields.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Tabulate the lattice Green's function on a window"
    experiment = 'green'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--radius', type=int, default=8, help='l-infinity radius of the window')

    def run(self, config, options):
        return run_green(config, radius=options['radius'])
