"""Figure rendering from scenario CSV tables.

Strictly read-only over its inputs: rows are filtered by method label and
plotted against the sweep column, with error bars wherever a standard error
is present. No numbers are transformed beyond axis labeling.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


class FigureSpecError(Exception):
    """Bad figure spec or input CSV (CLI exit code 2)."""


EXPECTED_COLUMNS = [
    "scenario_id",
    "sweep_name",
    "sweep_value",
    "method",
    "mean",
    "std_error",
    "num_trials",
    "seed",
]

FIGURE_KINDS = {
    "correlation_vs_N": ("number of antennas", "correlation magnitude"),
    "se_vs_K": ("number of users", "spectrum efficiency [bit/s/Hz]"),
    "se_vs_snr": ("SNR [dB]", "spectrum efficiency [bit/s/Hz]"),
}

_SPEC_KEYS = {
    "input_csv",
    "figure_kind",
    "series",
    "output_path",
    "title",
    "x_label",
    "y_label",
    "x_limits",
    "y_limits",
    "fixed_timestamp",
}
_REQUIRED_KEYS = {"input_csv", "figure_kind", "series", "output_path"}


@dataclass
class FigureSpec:
    input_csv: str
    figure_kind: str
    series: list[str]
    output_path: str
    title: str | None = None
    x_label: str | None = None
    y_label: str | None = None
    x_limits: list[float] | None = None
    y_limits: list[float] | None = None
    fixed_timestamp: bool = False


def load_spec(path) -> FigureSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise FigureSpecError(f"figure spec not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise FigureSpecError(f"figure spec is not valid JSON: {exc}") from exc
    return spec_from_dict(raw)


def spec_from_dict(raw: dict) -> FigureSpec:
    if not isinstance(raw, dict):
        raise FigureSpecError("figure spec must be a JSON object")
    unknown = raw.keys() - _SPEC_KEYS
    if unknown:
        raise FigureSpecError(f"unknown figure spec keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - raw.keys()
    if missing:
        raise FigureSpecError(f"figure spec missing keys: {sorted(missing)}")
    if raw["figure_kind"] not in FIGURE_KINDS:
        raise FigureSpecError(
            f"figure_kind must be one of {sorted(FIGURE_KINDS)}, got {raw['figure_kind']!r}"
        )
    series = raw["series"]
    if not isinstance(series, list) or not series or not all(isinstance(s, str) for s in series):
        raise FigureSpecError("'series' must be a non-empty list of method labels")
    return FigureSpec(**raw)


def read_rows(path) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FigureSpecError(f"input CSV is empty: {path}") from None
            if header != EXPECTED_COLUMNS:
                raise FigureSpecError(
                    f"input CSV does not match the scenario schema: header {header}"
                )
            rows = []
            for line_no, record in enumerate(reader, start=2):
                if len(record) != len(EXPECTED_COLUMNS):
                    raise FigureSpecError(f"malformed CSV row at line {line_no}")
                row = dict(zip(EXPECTED_COLUMNS, record))
                try:
                    row["sweep_value"] = float(row["sweep_value"])
                    row["mean"] = float(row["mean"])
                    row["std_error"] = float(row["std_error"])
                except ValueError as exc:
                    raise FigureSpecError(f"non-numeric value at line {line_no}: {exc}") from None
                rows.append(row)
    except OSError as exc:
        raise FigureSpecError(f"cannot read input CSV: {exc}") from exc
    if not rows:
        raise FigureSpecError(f"input CSV has no data rows: {path}")
    return rows


def _styles() -> dict:
    with resources.files("ldma_plot").joinpath("styles.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


_FALLBACK_CYCLE = ["tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple", "tab:brown"]


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written path.

    Every requested series must be present in the CSV, otherwise this is a
    hard error: a silently empty plot would hide a broken run.
    """
    rows = read_rows(spec.input_csv)
    styles = _styles()
    by_method: dict[str, list[dict]] = {}
    for row in rows:
        by_method.setdefault(row["method"], []).append(row)

    missing = [label for label in spec.series if label not in by_method]
    if missing:
        raise FigureSpecError(
            f"series not present in {spec.input_csv}: {missing}; available: {sorted(by_method)}"
        )

    x_default, y_default = FIGURE_KINDS[spec.figure_kind]
    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=150)
    for i, label in enumerate(spec.series):
        series_rows = sorted(by_method[label], key=lambda r: r["sweep_value"])
        x = [r["sweep_value"] for r in series_rows]
        y = [r["mean"] for r in series_rows]
        err = [r["std_error"] for r in series_rows]
        style = styles.get(label, {})
        kwargs = {
            "label": style.get("label", label),
            "color": style.get("color", _FALLBACK_CYCLE[i % len(_FALLBACK_CYCLE)]),
            "linestyle": style.get("linestyle", "-"),
            "marker": style.get("marker", "o"),
            "markersize": 4,
        }
        if any(e > 0 for e in err):
            ax.errorbar(x, y, yerr=err, capsize=3, **kwargs)
        else:
            ax.plot(x, y, **kwargs)

    ax.set_xlabel(spec.x_label or x_default)
    ax.set_ylabel(spec.y_label or y_default)
    if spec.title:
        ax.set_title(spec.title)
    if spec.x_limits:
        ax.set_xlim(spec.x_limits)
    if spec.y_limits:
        ax.set_ylim(spec.y_limits)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()

    out = Path(spec.output_path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    metadata = None
    suffix = out.suffix.lower()
    if spec.fixed_timestamp:
        # Pin everything that could put a clock or environment detail into
        # the bytes, so identical inputs give identical files.
        if suffix == ".png":
            metadata = {"Software": "ldma-plot"}
        elif suffix == ".svg":
            metadata = {"Date": None}
        previous = os.environ.get("SOURCE_DATE_EPOCH")
        os.environ["SOURCE_DATE_EPOCH"] = "0"
        try:
            fig.savefig(out, metadata=metadata)
        finally:
            if previous is None:
                os.environ.pop("SOURCE_DATE_EPOCH", None)
            else:
                os.environ["SOURCE_DATE_EPOCH"] = previous
    else:
        fig.savefig(out)
    plt.close(fig)
    return out
