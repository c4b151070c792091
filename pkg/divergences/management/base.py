from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from ..engine import PRESETS
from ..exceptions import DivergenceError


class DivergenceCommand(BaseCommand):
    """Base for the toolkit's commands

    Subclasses implement ``run``; any DivergenceError it raises leaves the
    command with that error's exit code.
    """

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except DivergenceError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, **options):
        raise NotImplementedError('subclasses of DivergenceCommand must provide a run() method')

    def emit(self, text: str, out=None) -> None:
        """Write a payload to ``out``, or to stdout when no path (or '-') is given"""
        if out is None or out == '-':
            self.stdout.write(text, ending='' if text.endswith('\n') else '\n')
            return
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8')

    @staticmethod
    def add_parameter_arguments(parser):
        parser.add_argument('--alpha', type=float, help='alpha parameter of the divergence')
        parser.add_argument('--beta', type=float, help='beta parameter of the divergence')
        parser.add_argument('--preset', choices=sorted(PRESETS), help='named member of the divergence family')

    @staticmethod
    def add_scope_arguments(parser):
        parser.add_argument('--marginal', metavar='V1,V2,...', help='divergence of the marginals on these variables')
        parser.add_argument('--target', metavar='Y1,...', help='conditional divergence of these variables...')
        parser.add_argument('--given', metavar='Z1,...', help='...given these variables')
