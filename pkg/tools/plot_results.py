# tools/plot_results.py
# Usage:
#   python tools/plot_results.py out/learner_scaling
#   python tools/plot_results.py out/pre/pretrain_surfaces.csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from src.harness.results import read_csv  # noqa: E402


def _f(value):
    return float("nan") if value == "n/a" else float(value)


def _series(rows, key, x, y):
    out = defaultdict(lambda: ([], []))
    for r in rows:
        xs, ys = out[tuple(r[k] for k in key)]
        xs.append(_f(r[x]))
        ys.append(_f(r[y]))
    return out


def plot_curves(rows, key, x, title, path):
    fig, ax = plt.subplots(figsize=(8, 5))
    for label, (xs, ys) in sorted(_series(rows, key, x, "mean_t2f").items()):
        ax.plot(xs, ys, marker="o", markersize=3, label=" ".join(label))
    ax.set_xlabel(x)
    ax.set_ylabel("mean t2f (steps)")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_bars(rows, group, bar, value, title, path, log=False):
    groups = sorted({r[group] for r in rows}, key=lambda g: (len(g), g))
    bars = sorted({r[bar] for r in rows})
    width = 0.8 / max(len(bars), 1)
    fig, ax = plt.subplots(figsize=(10, 5))
    for i, b in enumerate(bars):
        heights = []
        for g in groups:
            match = [_f(r[value]) for r in rows if r[group] == g and r[bar] == b]
            heights.append(match[0] if match else float("nan"))
        ax.bar([k + i * width for k in range(len(groups))], heights, width, label=f"{bar}={b}")
    ax.set_xticks([k + width * (len(bars) - 1) / 2 for k in range(len(groups))])
    ax.set_xticklabels(groups)
    ax.set_ylabel(value)
    if log:
        ax.set_yscale("log")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_surface(rows, path):
    theta_dots = sorted({r["theta_dot"] for r in rows}, key=float)
    fig, axes = plt.subplots(2, len(theta_dots), figsize=(4 * len(theta_dots), 7), squeeze=False)
    for col, td in enumerate(theta_dots):
        sub = [r for r in rows if r["theta_dot"] == td]
        alphas = [float(r["alpha"]) for r in sub]
        alpha_dots = [float(r["alpha_dot"]) for r in sub]
        for row, name in enumerate(("value", "prob")):
            ax = axes[row][col]
            sc = ax.scatter(alphas, alpha_dots, c=[float(r[name]) for r in sub], cmap="viridis", s=12)
            ax.set_title(f"{name}, theta_dot={float(td):g}")
            ax.set_xlabel("alpha (rad)")
            ax.set_ylabel("alpha_dot (rad/s)")
            fig.colorbar(sc, ax=ax)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        print("usage: plot_results.py <results dir | surfaces csv>")
        return 2
    target = Path(argv[0])

    if target.is_file():
        print(f"PNG:{plot_surface(read_csv(target), target.with_suffix('.png'))}")
        return 0

    written = []
    if (target / "approaches.csv").exists():
        rows = read_csv(target / "approaches.csv")
        written.append(plot_bars(rows, "approach", "C", "updates_per_weight", "Updates per weight",
                                 target / "approaches_updates.png", log=True))
        written.append(plot_bars(rows, "approach", "C", "mean_t2f", "Mean t2f", target / "approaches_t2f.png"))
    if (target / "device_modes.csv").exists():
        rows = [r for r in read_csv(target / "device_modes.csv") if r["C"] == "50"]
        written.append(plot_bars(rows, "variation", "dr", "efficiency", "Weight-update efficiency (C=50)",
                                 target / "device_modes_efficiency.png"))
    if (target / "pretraining_curves.csv").exists():
        rows = read_csv(target / "pretraining_curves.csv")
        written.append(plot_curves(rows, ("pretrained",), "first_trial", "Exact re-training",
                                   target / "pretraining_curves.png"))
    if (target / "learner_scaling.csv").exists():
        rows = read_csv(target / "learner_scaling.csv")
        written.append(plot_curves(rows, ("init", "K"), "samples", "Synchronous re-training",
                                   target / "learner_scaling.png"))
    if (target / "device_curves.csv").exists():
        rows = read_csv(target / "device_curves.csv")
        written.append(plot_curves(rows, ("variation",), "samples", "Variable-amplitude re-training",
                                   target / "device_curves.png"))
    if (target / "checkpoints.csv").exists():
        rows = [dict(r, run="retrain") for r in read_csv(target / "checkpoints.csv")]
        written.append(plot_curves(rows, ("run",), "samples", "Re-training checkpoints", target / "checkpoints.png"))

    if not written:
        print(f"NO_RESULTS:{target}")
        return 1
    for path in written:
        print(f"PNG:{path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
