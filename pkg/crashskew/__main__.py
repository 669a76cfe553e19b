"""Entry point for ``python -m crashskew``."""

try:
    # Prefer absolute import when run as a module
    from crashskew.cli import main
except ImportError:
    from .cli import main


if __name__ == "__main__":
    raise SystemExit(main())
