import json
import logging

from django.core.management.base import BaseCommand, CommandError

from blockmcmc.conf import resolve_output
from blockmcmc.exceptions import AutoblockError
from blockmcmc.io import write_json

logger = logging.getLogger('blockmcmc.commands')

USAGE = 1
RUNTIME_FAILURE = 3


class EngineCommand(BaseCommand):
    """Management command whose failures end as a JSON error line and an exit code.

    Subclasses implement ``run(**options)``.
    """

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except CommandError:
            raise
        except AutoblockError as exc:
            self.fail(type(exc).__name__, str(exc), exc.exit_code)
        except Exception as exc:
            logger.exception('%s failed', self.command_name)
            self.fail(type(exc).__name__, str(exc), RUNTIME_FAILURE)

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def fail(self, error, message, exit_code, **extra):
        document = {'error': error, 'message': message, 'exit_code': exit_code, **extra}
        self.stderr.write(json.dumps(document, default=str))
        raise CommandError(message, returncode=exit_code)

    def validate(self, form):
        """Cleaned data of a bound form; invalid flags are usage errors."""
        if not form.is_valid():
            self.fail('UsageError', 'Invalid options', USAGE, fields=form.errors.get_json_data())
        return form.cleaned_data

    def require(self, options, *names):
        missing = [f'--{name.replace("_", "-")}' for name in names if not options.get(name)]
        if missing:
            self.fail('UsageError', f'Missing required option(s): {", ".join(missing)}', USAGE)

    def output_path(self, path):
        return resolve_output(path)

    def write_document(self, path, document):
        return write_json(self.output_path(path), document)
