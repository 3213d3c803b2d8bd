# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Shared click classes of the command line interface.

Exit codes are 0 on success, 1 on usage errors and 2 on runtime errors.

"""
import sys

import click

from ferhelper.exceptions import FerError

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _NoArgsError(click.UsageError):
    """Invoked without any argument, show the full help."""

    def show(self, file=None):
        click.echo(self.ctx.get_help(), file=file, err=file is None)


class _ExitCodeMixin:
    def parse_args(self, ctx, args):
        # values of --config count as arguments
        no_args = not args and not ctx.default_map
        if no_args and self.no_args_is_help and not ctx.resilient_parsing:
            raise _NoArgsError('', ctx=ctx)
        return super().parse_args(ctx, args)

    def main(self, args=None, prog_name=None, standalone_mode=True, **extra):
        try:
            rv = super().main(
                args=args,
                prog_name=prog_name,
                standalone_mode=False,
                **extra,
            )
        except click.UsageError as err:
            err.show()
            exit_code = EXIT_USAGE
        except click.ClickException as err:
            err.show()
            exit_code = EXIT_RUNTIME
        except click.Abort:
            click.echo('Aborted!', err=True)
            exit_code = EXIT_USAGE
        except (FerError, OSError) as err:
            click.echo(f'Error: {err}', err=True)
            exit_code = EXIT_RUNTIME
        else:
            exit_code = rv if isinstance(rv, int) else 0

        if standalone_mode:
            sys.exit(exit_code)
        return exit_code


class FerCommand(_ExitCodeMixin, click.Command):
    """Command mapping usage errors to 1 and runtime errors to 2."""

    def __init__(self, *args, **kwargs):
        kwargs.setdefault('no_args_is_help', True)
        super().__init__(*args, **kwargs)


class FerGroup(_ExitCodeMixin, click.Group):
    """Group mapping usage errors to 1 and runtime errors to 2."""

    command_class = FerCommand


def get_workers():
    """Return the group level `--workers`, 1 outside of the group."""
    ctx = click.get_current_context(silent=True)
    if ctx is None:
        return 1
    return (ctx.find_root().obj or {}).get('workers', 1)
