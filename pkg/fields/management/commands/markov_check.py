from fields.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Check the Markov decomposition identities and bulk drift exceedances'
    experiment = 'markov_check'
