"""python -m rdftuner entry point."""

from .cli import main

main()
