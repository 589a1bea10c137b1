"""
CSV result files: '#'-prefixed metadata lines, a header row, round-trip-safe numbers.
"""
import csv
import json
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"


def format_value(value: object) -> str:
    """
    Render one CSV cell.

    Args:
        value: None, bool, int, float or str.

    Returns:
        str: Empty for None, true/false for flags, 17 significant digits for floats.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[object]],
              config_json: Optional[str] = None, metadata: Optional[Dict[str, object]] = None) -> str:
    """
    Write a result table.

    Args:
        path (str): Target file; parent directories are created.
        header (Sequence[str]): Column names.
        rows (Iterable[Sequence[object]]): Table rows.
        config_json (str, optional): Originating configuration, embedded verbatim.
        metadata (Dict[str, object], optional): Extra flags, written as sorted JSON.

    Returns:
        str: The path written.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        if config_json is not None:
            handle.write(f"# config: {config_json}\n")
        if metadata:
            handle.write(f"# metadata: {json.dumps(metadata, sort_keys=True, default=str)}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: str) -> List[Dict[str, str]]:
    """Rows of a result file as dictionaries, metadata lines skipped."""
    with open(path, newline="", encoding="utf-8") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


def read_metadata(path: str) -> Dict[str, str]:
    """The '#' lines of a result file keyed by their label (config, metadata)."""
    found = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            label, _, value = line[1:].strip().partition(": ")
            found[label] = value
    return found
