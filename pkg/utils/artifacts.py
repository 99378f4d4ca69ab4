"""
Rendering of result payloads to JSON/CSV text and writing artifact files.
"""
import csv
import io
import json
import logging
import os
from typing import Any, Dict, List, Tuple

from utils.numeric import to_json_value

logger = logging.getLogger('artifacts')


def render_json(payload: Dict[str, Any]) -> str:
    """Deterministic JSON: insertion-ordered keys, exact values as "p/q" strings."""
    return json.dumps(to_json_value(payload), indent=2, allow_nan=False)


def _cell(value: Any) -> Any:
    value = to_json_value(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return value


def render_csv(rows: List[Dict[str, Any]]) -> str:
    """One line per row; the header is the union of row keys in first-seen order."""
    columns: List[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(value) for key, value in row.items()})
    return buffer.getvalue().rstrip("\n")


def write_artifact(target_file: str, content: str) -> Tuple[str, bool]:
    """
    Write a rendered artifact, creating parent directories.

    Args:
        target_file: Path of the artifact
        content: Rendered JSON or CSV text

    Returns:
        Tuple of (result message, success status)
    """
    try:
        os.makedirs(os.path.dirname(os.path.abspath(target_file)), exist_ok=True)
        with open(target_file, 'w', encoding='utf-8') as f:
            f.write(content)
            if not content.endswith("\n"):
                f.write("\n")
        logger.info(f"write_artifact: {len(content)} characters to {target_file}")
        return f"Successfully wrote {target_file}", True
    except Exception as e:
        return f"Error writing artifact: {str(e)}", False
