"""Figure rendering for the report path: PNGs next to the CSVs of a run."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .metrics import read_csv_columns, smooth  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_run(run_dir: Path, smooth_window: int = 5,
               out_dir: Path | None = None) -> list[Path]:
    """Render the standard figures for one run directory."""
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir is not None else run_dir
    out.mkdir(parents=True, exist_ok=True)
    written = []

    msgs = read_csv_columns(run_dir / "messages.csv")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    for ax, col, label in ((ax1, "avg", "messages sent avg."),
                           (ax2, "std", "messages sent std. dev.")):
        ax.plot(msgs["sample"], msgs[col], color="0.8", lw=0.8, label="raw")
        ax.plot(msgs["sample"], smooth(msgs[col], smooth_window),
                color="black", lw=1.2, label=f"smoothed ({smooth_window})")
        ax.set_xlabel("sample")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
    written.append(_save(fig, out / "messages.png"))

    load = read_csv_columns(run_dir / "load.csv")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    ax1.plot(load["sample"], load["max"], color="black", lw=1.0)
    ax1.set_xlabel("sample")
    ax1.set_ylabel("max load")
    ax2.plot(load["sample"], load["std"], color="0.8", lw=0.8)
    ax2.plot(load["sample"], smooth(load["std"], smooth_window),
             color="black", lw=1.2)
    ax2.set_xlabel("sample")
    ax2.set_ylabel("load std. dev.")
    written.append(_save(fig, out / "load.png"))

    lat = read_csv_columns(run_dir / "latency.csv")
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(lat.get("hops", []), lat.get("count", []), color="0.3", width=0.8)
    ax.set_xlabel("hops")
    ax.set_ylabel("delivered messages")
    written.append(_save(fig, out / "latency.png"))

    dist = read_csv_columns(run_dir / "distances.csv")
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(dist.get("total_distance", []), dist.get("object_count", []),
           color="0.3", width=0.8)
    ax.set_xlabel("total distance")
    ax.set_ylabel("number of objects")
    written.append(_save(fig, out / "distances.png"))

    mig = read_csv_columns(run_dir / "migrations.csv")
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(mig["sample"], mig["count"], color="black", lw=1.0)
    ax.set_xlabel("sample")
    ax.set_ylabel("migrations per interval")
    written.append(_save(fig, out / "migrations.png"))

    return written
