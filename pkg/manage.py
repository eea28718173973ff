#!/usr/bin/env python
"""
Command-line entry point for the clustering pipeline.

    python manage.py match docs/examples/handling_ontology.json docs/examples/handling_requests.jsonl
    python manage.py cluster ONTOLOGY REQUESTS --mode requests -o clusters.json --dot clusters.dot
    python manage.py sweep ONTOLOGY REQUESTS -o sweep.csv
    python manage.py export_dot clusters.json -o clusters.dot
"""

import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the project dependencies "
            "(pip install -e .) into the active environment first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
