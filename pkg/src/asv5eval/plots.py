"""Optional SVG figures (needs matplotlib).  Output is byte-stable across runs."""

from __future__ import annotations

from contextlib import contextmanager


@contextmanager
def _figure(width: float, height: float):
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("SVG output needs matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed hash salt and no date metadata keep the SVG bytes reproducible
    with matplotlib.rc_context({"svg.hashsalt": "asv5eval", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(width, height))
        try:
            yield fig, ax
        finally:
            plt.close(fig)


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})


def boxplot_svg(per_slice_values: dict, path, ylabel: str = "minDCF") -> None:
    """One box per slice, slices in sorted order."""
    names = sorted(per_slice_values)
    with _figure(max(4.0, 0.6 * len(names)), 3.5) as (fig, ax):
        ax.boxplot([per_slice_values[n] for n in names])
        ax.set_xticks(range(1, len(names) + 1), names, rotation=60, ha="right")
        ax.set_ylabel(ylabel)
        _save(fig, path)


def ape_svg(curve, path) -> None:
    """Normalised actual/min DCF and the dummy bound against the Bayes threshold."""
    with _figure(5.0, 3.5) as (fig, ax):
        ax.plot(curve.tau_bayes, curve.dummy_bound, ":", color="grey", label="dummy bound")
        ax.plot(curve.tau_bayes, curve.norm_act_dcf, "-", label="actual DCF")
        ax.plot(curve.tau_bayes, curve.norm_min_dcf, "--", label="min DCF")
        ax.set_xlabel("Bayes threshold  -log beta")
        ax.set_ylabel("normalised DCF")
        ax.legend(loc="upper right", fontsize="small")
        _save(fig, path)
