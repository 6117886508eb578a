"""Command-line solver backends speaking the solution-file contract."""
