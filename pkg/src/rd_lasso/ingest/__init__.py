"""Data ingestion."""

from .csv_loader import MISSING_TOKENS, ColumnMapping, LoadReport, load_csv, load_csv_with_report

__all__ = ["MISSING_TOKENS", "ColumnMapping", "LoadReport", "load_csv", "load_csv_with_report"]
