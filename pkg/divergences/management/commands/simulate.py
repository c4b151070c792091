from django.core.management.base import CommandError

from ...services import SimulationService, split_labels
from ..base import DivergenceCommand


class Command(DivergenceCommand):
    help = ('Write a synthetic readout experiment: ideal.csv and observed.csv sampled from a '
            'known tree model, the observed side with per-variable bit-flip noise, plus truth.json')

    def add_arguments(self, parser):
        parser.add_argument('--variables', type=int, default=10)
        parser.add_argument('--samples', type=int, default=100_000, help='rows per sample file')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--noise', metavar='E1,E2,...',
                            help='flip probability per variable (default: evenly spaced 0.01..0.2, shuffled)')
        parser.add_argument('--out', metavar='DIR', required=True)

    def run(self, **options):
        noise = None
        if options['noise']:
            try:
                noise = [float(part) for part in split_labels(options['noise'])]
            except ValueError:
                raise CommandError("--noise must be a comma list of numbers", returncode=2) from None
        paths = SimulationService().simulate(
            options['out'], options['variables'], options['samples'], options['seed'], noise
        )
        for name in ('ideal', 'observed', 'truth'):
            self.stdout.write(f"{name}: {paths[name]}")
