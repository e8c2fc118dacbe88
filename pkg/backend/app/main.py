import sys

from .cli.commands import cli, dispatch

__all__ = ["cli", "main"]


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
