"""Command-line front end: expression parser, config, check catalog and suite runner."""
from .checks import CATALOG, run_check
from .config import Caps, Config, ConfigError
from .parser import ExpressionError, format_expression, parse_expression
from .suite import run_suite

__all__ = ["CATALOG", "Caps", "Config", "ConfigError", "ExpressionError", "format_expression",
           "parse_expression", "run_check", "run_suite"]
