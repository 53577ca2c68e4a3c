"""Definition-file parser, commands and reports."""

from .document import Document, load, parse, parse_operator_text
from .main import main
from .report import SCHEMA, Report

__all__ = ["Document", "Report", "SCHEMA", "load", "main", "parse", "parse_operator_text"]
