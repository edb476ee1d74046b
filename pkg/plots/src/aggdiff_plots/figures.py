"""The four figure kinds: decay, convergence, entropy, rate_surface.

Reference slopes are taken verbatim from summary.json rate reports; nothing is
refitted here. Rendering is a pure function of the input files (fixed style,
no timestamps), so repeated renders of the same inputs are identical.
"""

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import SchemaError, read_diagnostics, read_rates, read_summary, summary_exponent

FIGURE_KINDS = ("decay", "convergence", "entropy", "rate_surface")

#: constant PNG metadata so repeated renders are byte-stable
_METADATA = {"Software": "aggdiff-plots"}
_DPI = 150


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple  # diagnostics.csv paths (rates.csv for rate_surface)
    output: str
    summary: str | None = None  # summary.json for reference annotations
    labels: tuple = ()

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}"
            )
        if not self.inputs:
            raise SchemaError("figure spec needs at least one input file")


def _labels_for(spec):
    if spec.labels and len(spec.labels) == len(spec.inputs):
        return list(spec.labels)
    return [Path(p).parent.name or str(p) for p in spec.inputs]


def _reference_line(ax, x, y_anchor, slope, frame, label):
    """Straight guide line through the anchor with the given exponent."""
    x = np.asarray(x, dtype=float)
    if frame == "t":
        ref = y_anchor * ((1.0 + x) / (1.0 + x[0])) ** slope
    else:
        ref = y_anchor * np.exp(slope * (x - x[0]))
    ax.plot(x, ref, "k--", linewidth=1.0, label=label)


def _load_reference(spec, name):
    if spec.summary is None:
        return None
    summary = read_summary(spec.summary)
    try:
        return summary_exponent(summary, name)
    except SchemaError:
        # short runs carry no rate reports; render without the reference line
        return None


def _save(fig, output):
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=_DPI, metadata=_METADATA)
    plt.close(fig)


def render_decay(spec):
    """log-log sup-norm decay in the physical frame with the predicted slope."""
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ref = _load_reference(spec, "linf_decay")
    for path, label in zip(spec.inputs, _labels_for(spec)):
        cols = read_diagnostics(path)
        t = np.asarray(cols["t"])
        d_tau_sum = np.asarray(cols["tau"])
        # physical-frame sup norm: theta is e^{d tau} u, and d = slope source;
        # the stored linf column is the rescaled one, so plot its decaying
        # physical counterpart linf * e^{-d tau} with d inferred from the slope
        # annotation when available, else plot the rescaled linf directly
        if ref is not None and ref.get("predicted_exponent") is not None:
            dval = -ref["predicted_exponent"] / _beta_guess(cols)
            linf = np.asarray(cols["linf"]) * np.exp(-dval * d_tau_sum)
        else:
            linf = np.asarray(cols["linf"])
        ax.loglog(1.0 + t, linf, label=label)
    if ref is not None and ref.get("predicted_exponent") is not None:
        first = read_diagnostics(spec.inputs[0])
        t0 = np.asarray(first["t"])
        y0 = ax.get_lines()[0].get_ydata()[0]
        _reference_line(
            ax, t0, y0, ref["predicted_exponent"], "t",
            f"reference slope {ref['predicted_exponent']:g}",
        )
        if ref.get("fitted_exponent") is not None:
            ax.set_title(
                f"fitted {ref['fitted_exponent']:.4g}, "
                f"predicted {ref['predicted_exponent']:.4g}", fontsize=10,
            )
    ax.set_xlabel("1 + t")
    ax.set_ylabel("sup norm")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, spec.output)


def _beta_guess(cols):
    """beta from the stored (tau, t) pairs: t = beta (e^{tau/beta} - 1)."""
    tau = np.asarray(cols["tau"])
    t = np.asarray(cols["t"])
    pos = tau > 0
    if not np.any(pos):
        return 1.0
    # invert on the last sample (most sensitive); bisection on beta
    tau_s, t_s = tau[pos][-1], t[pos][-1]
    lo, hi = 1e-3, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * np.expm1(tau_s / mid) > t_s:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def render_convergence(spec):
    """Semilog distance-to-profile decay in tau with the predicted rate line."""
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ref = _load_reference(spec, "l1_convergence")
    for path, label in zip(spec.inputs, _labels_for(spec)):
        cols = read_diagnostics(path)
        ax.semilogy(cols["tau"], cols["l1_to_ground"], label=label)
    if ref is not None and ref.get("predicted_exponent") is not None:
        first = read_diagnostics(spec.inputs[0])
        _reference_line(
            ax, np.asarray(first["tau"]), first["l1_to_ground"][0],
            ref["predicted_exponent"], "tau",
            f"reference rate {ref['predicted_exponent']:g}",
        )
        if ref.get("fitted_exponent") is not None:
            ax.set_title(
                f"fitted {ref['fitted_exponent']:.4g}, "
                f"predicted {ref['predicted_exponent']:.4g}", fontsize=10,
            )
    ax.set_xlabel("tau")
    ax.set_ylabel("L1 distance to ground state")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, spec.output)


def render_entropy(spec):
    """Semilog relative entropy and production decay in tau."""
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ref = _load_reference(spec, "entropy_convergence")
    for path, label in zip(spec.inputs, _labels_for(spec)):
        cols = read_diagnostics(path)
        tau = np.asarray(cols["tau"])
        hrel = np.asarray(cols["H_rel"])
        pos = hrel > 0
        ax.semilogy(tau[pos], hrel[pos], label=f"{label}: H_rel")
        prod = np.asarray(cols["I"])
        ppos = prod > 0
        ax.semilogy(tau[ppos], prod[ppos], ":", label=f"{label}: I")
    if ref is not None and ref.get("predicted_exponent") is not None:
        first = read_diagnostics(spec.inputs[0])
        tau0 = np.asarray(first["tau"])
        h0 = first["H_rel"][0]
        if h0 > 0:
            _reference_line(
                ax, tau0, h0, ref["predicted_exponent"], "tau",
                f"reference rate {ref['predicted_exponent']:g}",
            )
        if ref.get("fitted_exponent") is not None:
            ax.set_title(
                f"fitted {ref['fitted_exponent']:.4g}, "
                f"predicted {ref['predicted_exponent']:.4g}", fontsize=10,
            )
    ax.set_xlabel("tau")
    ax.set_ylabel("relative entropy / production")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, spec.output)


def render_rate_surface(spec):
    """Heatmap of fitted convergence rates over the (m, gamma) sweep plane."""
    rows = read_rates(spec.inputs[0])
    ms = sorted({r["m"] for r in rows if r["m"] is not None})
    gams = sorted({r["gamma"] if r["gamma"] is not None else -1.0 for r in rows})
    grid = np.full((len(gams), len(ms)), np.nan)
    for r in rows:
        gam = r["gamma"] if r["gamma"] is not None else -1.0
        i, j = gams.index(gam), ms.index(r["m"])
        if r["fitted"] is not None:
            grid[i, j] = r["fitted"]
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(ms)), [f"{m:g}" for m in ms])
    ax.set_yticks(
        range(len(gams)), ["local" if g < 0 else f"{g:g}" for g in gams]
    )
    ax.set_xlabel("m")
    ax.set_ylabel("gamma")
    fig.colorbar(im, ax=ax, label="fitted rate")
    for i in range(len(gams)):
        for j in range(len(ms)):
            if np.isfinite(grid[i, j]):
                ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center",
                        fontsize=7, color="w")
    fig.tight_layout()
    _save(fig, spec.output)


_RENDERERS = {
    "decay": render_decay,
    "convergence": render_convergence,
    "entropy": render_entropy,
    "rate_surface": render_rate_surface,
}


def render(spec):
    """Dispatch one FigureSpec to its renderer; returns the output path."""
    _RENDERERS[spec.kind](spec)
    return spec.output
