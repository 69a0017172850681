from fields.experiments import run_sample
from fields.field_sampler import LAW_DIRICHLET
from fields.forms import SAMPLED_LAWS
from fields.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Draw one field realisation on a box'
    experiment = 'sample'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--law', choices=SAMPLED_LAWS, default=LAW_DIRICHLET)
        parser.add_argument('--side', type=int, default=8, help='Box side n')

    def run(self, config, options):
        return run_sample(config, law=options['law'], side=options['side'])
