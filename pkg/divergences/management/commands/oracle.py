from django.conf import settings

from ...services import DivergenceService, ModelFileService
from ..base import DivergenceCommand


class Command(DivergenceCommand):
    help = ('Debugging aid: brute-force divergence over the full joint table. '
            'Refuses domains larger than DIVKIT_ORACLE_MAX_CELLS.')

    def add_arguments(self, parser):
        parser.add_argument('--p', metavar='PATH', required=True)
        parser.add_argument('--q', metavar='PATH', required=True)
        self.add_parameter_arguments(parser)
        self.add_scope_arguments(parser)
        parser.add_argument('--max-cells', type=int, default=settings.DIVKIT_ORACLE_MAX_CELLS)

    def run(self, **options):
        files = ModelFileService()
        P = files.load_model(options['p'])
        Q = files.load_model(options['q'])
        value = DivergenceService().oracle(P, Q, options, options['max_cells'])
        self.stdout.write(f"{value:.12g}")
