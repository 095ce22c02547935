from .main import Command, main, parse_args, run
from .printer import Printer

__all__ = ["Command", "Printer", "main", "parse_args", "run"]
