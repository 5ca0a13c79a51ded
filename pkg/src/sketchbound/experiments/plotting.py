"""SVG figures drawn from the rows already written to CSV."""
from collections import defaultdict
from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from sketchbound.utils.serialization import read_csv  # noqa: E402

# Fixed ids / no date so reruns give identical SVG text
plt.rcParams["svg.hashsalt"] = "sketchbound"
plt.rcParams["svg.fonttype"] = "none"

OVERLAYS = (
    ("hmt", "Prior upper bound", "tab:red", "--"),
    ("sharp_upper", "sharp upper bound", "tab:blue", "-"),
    ("sharp_lower", "sharp lower bound", "tab:green", "-"),
    ("proxy", "error proxy", "black", ":"),
)


def _float(value: str):
    return float(value) if value not in ("", None) else None


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_fig1(csv_path: Path, svg_path: Path, title: str = "") -> Path:
    """Scatter of W draws against n (log x) with the bound curves."""
    rows = read_csv(csv_path)
    by_n: Dict[int, List[dict]] = defaultdict(list)
    for row in rows:
        by_n[int(row["n"])].append(row)
    grid = sorted(by_n)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.scatter(
        [int(row["n"]) for row in rows],
        [float(row["value"]) for row in rows],
        s=8,
        alpha=0.5,
        color="tab:orange",
        label="worst-case error W",
    )
    for column, label, color, style in OVERLAYS:
        points = [(n, _float(by_n[n][0][column])) for n in grid]
        points = [(n, v) for n, v in points if v is not None]
        if points:
            ax.plot(*zip(*points), style, color=color, label=label, linewidth=1.2)

    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("||(I - QQ*)A|| / sigma_{k+1}")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, svg_path)


def plot_fig2(histogram_csv: Path, svg_path: Path, title: str = "") -> Path:
    """Histogram of W draws from the binned counts."""
    rows = read_csv(histogram_csv)
    left = [float(row["bin_left"]) for row in rows]
    right = [float(row["bin_right"]) for row in rows]
    counts = [int(row["count"]) for row in rows]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.bar(left, counts, width=[r - l for l, r in zip(left, right)], align="edge", color="tab:blue", edgecolor="white")
    ax.set_xlabel("W")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    return _save(fig, svg_path)
