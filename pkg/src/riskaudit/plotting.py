"""Optional SVG rendering of figure tables. Purely decorative; the tables are the output."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

TITLES = {
    1: ("Decile score", "Observed recidivism rate"),
    2: ("Prior count", "False positive rate"),
    3: ("Decile score", "Share of defendants"),
}


def render_figure(figure, rows, path):
    xlabel, ylabel = TITLES[figure]
    series = list(dict.fromkeys(r["series"] for r in rows))
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.8 / max(len(series), 1)
    for i, name in enumerate(series):
        pts = [r for r in rows if r["series"] == name and r["y"] is not None]
        xs = list(range(len(pts))) if figure == 2 else [r["x"] for r in pts]
        ys = [r["y"] for r in pts]
        if figure == 3:
            ax.bar([x + (i - 0.5) * width for x in xs], ys, width=width, label=name)
            continue
        yerr = [[y - r["ci_low"] for y, r in zip(ys, pts)], [r["ci_high"] - y for y, r in zip(ys, pts)]]
        ax.errorbar(xs, ys, yerr=yerr, marker="o", capsize=3, label=name)
        if figure == 2:
            ax.set_xticks(xs, [r["x"] for r in pts])
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
