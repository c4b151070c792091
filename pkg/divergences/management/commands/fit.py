from ...services import LEARNERS, ModelFileService, ModelFittingService, format_float
from ..base import DivergenceCommand


class Command(DivergenceCommand):
    help = 'Fit a decomposable model to a sample file and write it as a model file'

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--structure', metavar='PATH', help='structure file with a chordal graph')
        source.add_argument('--learn', choices=LEARNERS, help='learn the structure from the data')
        parser.add_argument('--data', metavar='PATH', required=True, help='CSV sample file')
        parser.add_argument('--pseudocount', type=float, default=None,
                            help='Dirichlet pseudocount (default: DIVKIT_DEFAULT_PSEUDOCOUNT, 1.0)')
        parser.add_argument('--out', metavar='PATH', required=True, help='model file to write')

    def run(self, **options):
        fitting = ModelFittingService()
        model, data = fitting.fit_files(
            options['data'],
            structure_path=options['structure'],
            learn=options['learn'],
            pseudocount=options['pseudocount'],
        )
        ModelFileService().save_model(model, options['out'])

        summary = fitting.summary(model, data)
        self.stdout.write(
            f"variables={summary['variables']} cliques={summary['cliques']} "
            f"treewidth={summary['treewidth']} log_likelihood={format_float(summary['log_likelihood'])}"
        )
