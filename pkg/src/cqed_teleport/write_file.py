import csv
import json
import sys
from collections.abc import Generator, Iterable
from pathlib import Path
from typing import TextIO

from cqed_teleport._enums import OutputFormat
from cqed_teleport._types import CellValue, ResultSet, Rows
from cqed_teleport.exceptions import ResultWriteError

FLOAT_FORMAT = ".12g"


def format_cell(value: CellValue) -> str:
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return str(value)


def json_cell(value: CellValue) -> CellValue:
    if isinstance(value, float):
        return float(format(value, FLOAT_FORMAT))
    return value


def prepare_rows(
    columns: Iterable[str], rows: Rows
) -> Generator[list[str], None, None]:
    """
    Generator that transforms result rows into CSV rows.

    Args:
        columns: Header, also the order of values in each row.
        rows: Result rows keyed by column.

    Yields:
        The header, then one list of formatted values per row.
    """
    columns = list(columns)
    yield columns
    for row in rows:
        yield [format_cell(row.get(column, "")) for column in columns]


def write_csv(f: TextIO, columns: Iterable[str], rows: Rows) -> None:
    writer = csv.writer(f, lineterminator="\n")
    writer.writerows(prepare_rows(columns, rows))


def write_json(f: TextIO, columns: Iterable[str], rows: Rows) -> None:
    columns = list(columns)
    records = [
        {column: json_cell(row[column]) for column in columns if column in row}
        for row in rows
    ]
    json.dump(records, f, indent=2, ensure_ascii=False)
    f.write("\n")


WRITERS = {OutputFormat.CSV: write_csv, OutputFormat.JSON: write_json}


def series_path(file_name: Path) -> Path:
    return file_name.with_name(f"{file_name.stem}_series.csv")


def _write(file_name: Path, writer, columns: Iterable[str], rows: Rows) -> None:
    try:
        with file_name.open("w", newline="", encoding="utf-8") as f:
            writer(f, columns, rows)
    except OSError as e:
        raise ResultWriteError(f"Cannot write {file_name}: {e.strerror}") from e


def emit_results(
    results: ResultSet,
    output_format: OutputFormat = OutputFormat.CSV,
    file_name: Path | None = None,
    snapshot_series: bool = False,
) -> list[Path]:
    """
    Write result rows as CSV or as a JSON array, to ``file_name`` or stdout.

    The time series, when requested and present, goes to
    ``<stem>_series.csv`` next to ``file_name``; it is not written to stdout.

    Returns:
        The files written.

    Raises:
        ResultWriteError: If a file cannot be written.
    """
    writer = WRITERS[OutputFormat(output_format)]
    if file_name is None:
        writer(sys.stdout, results.columns, results.rows)
        return []

    written = [file_name]
    _write(file_name, writer, results.columns, results.rows)
    if snapshot_series and results.series:
        path = series_path(file_name)
        _write(path, write_csv, results.series_columns, results.series)
        written.append(path)
    return written
