from fields.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Estimate E[max] / sqrt(2 g(0) log N) along increasing boxes'
    experiment = 'lln'
