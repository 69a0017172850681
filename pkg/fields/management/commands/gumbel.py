from fields.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Compare rescaled maxima with the Gumbel law'
    experiment = 'gumbel'
