from django.core.management.base import CommandError

from ...engine import PRESETS
from ...services import LEARNERS, ErrorAnalysisService, dump_json, split_labels
from ..base import DivergenceCommand


def _orders(value):
    try:
        orders = [int(part) for part in split_labels(value)]
    except ValueError:
        raise CommandError(f"--orders must be a comma list of integers, got {value!r}", returncode=2) from None
    if not orders or min(orders) < 1:
        raise CommandError('--orders needs positive tuple sizes', returncode=2)
    return orders


class Command(DivergenceCommand):
    help = ('Fit models to ideal and observed samples, then write marginal divergence grids '
            'and a ranking summary into a directory')

    def add_arguments(self, parser):
        parser.add_argument('--ideal-data', metavar='PATH', required=True)
        parser.add_argument('--observed-data', metavar='PATH', required=True)
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--structure', metavar='PATH', help='structure file shared by both models')
        source.add_argument('--learn', choices=LEARNERS, help='learn the structure from the data')
        parser.add_argument('--separate-structures', action='store_true',
                            help='learn one structure per sample file instead of one on both together')
        parser.add_argument('--pseudocount', type=float, default=None)
        parser.add_argument('--orders', default='1,2', help='tuple sizes, e.g. 1,2,3')
        parser.add_argument('--preset', choices=sorted(PRESETS), default='hellinger')
        parser.add_argument('--truth', metavar='PATH', help='truth.json from the simulate command')
        parser.add_argument('--threads', type=int, default=None)
        parser.add_argument('--out', metavar='DIR', required=True)

    def run(self, **options):
        summary = ErrorAnalysisService(options['threads']).report(
            options['ideal_data'],
            options['observed_data'],
            options['out'],
            structure_path=options['structure'],
            learn=options['learn'],
            pseudocount=options['pseudocount'],
            orders=_orders(options['orders']),
            preset=options['preset'],
            truth_path=options['truth'],
            separate_structures=options['separate_structures'],
        )
        self.stdout.write(dump_json(summary), ending='')
