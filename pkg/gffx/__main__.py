"""Entry point for ``python -m gffx <subcommand> ...``.

Subcommands may be spelled with hyphens (``markov-check``); they map onto the
management commands of the ``fields`` app.
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'gffx.settings')
    from django.core.management import execute_from_command_line

    argv = ['gffx', *sys.argv[1:]]
    if len(argv) > 1 and not argv[1].startswith('-'):
        argv[1] = argv[1].replace('-', '_')
    execute_from_command_line(argv)


if __name__ == '__main__':
    main()
