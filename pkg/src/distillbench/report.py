"""CSV comparison reports with a fixed, documented column order."""

import csv

CSV_COLUMNS = [
    "model",
    "architecture",
    "role",
    "regime",
    "test_accuracy",
    "train_accuracy",
    "success_rate",
    "failure_rate",
    "sample_efficiency",
    "adversarial_accuracy",
]

NOT_APPLICABLE = "n/a"


def format_cell(value) -> str:
    if value is None:
        return NOT_APPLICABLE
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report_csv(path, rows: list[dict]) -> None:
    """Write one row per model; missing or undefined values become 'n/a'."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([format_cell(row.get(col)) for col in CSV_COLUMNS])


def render_table(rows: list[dict]) -> str:
    """Human-readable rendering of the same rows for terminal output."""
    cells = [[format_cell(row.get(col)) for col in CSV_COLUMNS] for row in rows]
    widths = [
        max(len(CSV_COLUMNS[i]), *(len(r[i]) for r in cells)) if cells else len(CSV_COLUMNS[i])
        for i in range(len(CSV_COLUMNS))
    ]
    lines = ["  ".join(c.ljust(w) for c, w in zip(CSV_COLUMNS, widths))]
    for r in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)
