from django.core.management.base import CommandError

from ...engine import PRESETS
from ...services import DivergenceService, ModelFileService
from ..base import DivergenceCommand


class Command(DivergenceCommand):
    help = ('Marginal divergence of every variable tuple of one order. '
            'Repeat --p/--q to average the grids of several model pairs.')

    def add_arguments(self, parser):
        parser.add_argument('--p', metavar='PATH', action='append', required=True)
        parser.add_argument('--q', metavar='PATH', action='append', required=True)
        parser.add_argument('--order', type=int, required=True, help='tuple size')
        parser.add_argument('--preset', choices=sorted(PRESETS), default='hellinger')
        parser.add_argument('--tuples', metavar='FILE', help='only these tuples, one per line')
        parser.add_argument('--out', metavar='PATH', help='output file (default: stdout)')
        parser.add_argument('--format', choices=('csv', 'json'), default='csv')
        parser.add_argument('--threads', type=int, default=None,
                            help='worker threads (DIVKIT_THREADS overrides; default: machine parallelism)')

    def run(self, **options):
        for side in ('p', 'q'):
            if isinstance(options[side], str):
                options[side] = [options[side]]
        if len(options['p']) != len(options['q']):
            raise CommandError('give the same number of --p and --q files', returncode=2)

        files = ModelFileService()
        pairs = [(files.load_model(p), files.load_model(q)) for p, q in zip(options['p'], options['q'])]
        variables = pairs[0][0].variables

        service = DivergenceService()
        tuples = service.read_tuples(options['tuples'], variables) if options['tuples'] else None
        rows = service.grid(pairs, options['order'], options['preset'], tuples, options['threads'])
        self.emit(service.render_grid(rows, variables, options['format']), options['out'])
