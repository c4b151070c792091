from ...services import DivergenceService, ModelFileService
from ..base import DivergenceCommand


class Command(DivergenceCommand):
    help = 'Exact alpha-beta divergence between two model files (joint, marginal or conditional)'

    def add_arguments(self, parser):
        parser.add_argument('--p', metavar='PATH', required=True, help='model file of the first distribution')
        parser.add_argument('--q', metavar='PATH', required=True, help='model file of the second distribution')
        self.add_parameter_arguments(parser)
        self.add_scope_arguments(parser)
        parser.add_argument('--out', metavar='PATH', help='output file (default: stdout)')
        parser.add_argument('--format', choices=('json', 'csv'), default='json')

    def run(self, **options):
        files = ModelFileService()
        P = files.load_model(options['p'])
        Q = files.load_model(options['q'])

        service = DivergenceService()
        result = service.divergence(P, Q, options)
        self.emit(service.render_result(result, P.variables, options['format']), options['out'])
