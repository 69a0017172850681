from fields.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Tabulate the Stein-Chen bounds and check Poisson gaps'
    experiment = 'bounds'
