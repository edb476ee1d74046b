import json

import numpy as np
import pytest

HEADER = "tau,t,mass,linf,l1_to_ground,H,I,H_rel,E_k_0.01,lp_2"


def _beta(d, m):
    return 1.0 / (d * (m - 1.0) + 2.0)


@pytest.fixture
def run_dir(tmp_path):
    """Synthetic run directory: diagnostics.csv + summary.json.

    The sup norm follows (1+t)^{-1} exactly (d=2, m=1, so d*beta = 1) and the
    L1 distance and relative entropy decay like e^{-tau}; the summary pins the
    matching rate reports.
    """
    d, m = 2, 1.0
    beta = _beta(d, m)
    tau = np.linspace(0.0, 6.0, 61)
    t = beta * np.expm1(tau / beta)
    linf_resc = np.full_like(tau, 0.16)  # rescaled linf is constant at the fix point
    l1 = 0.8 * np.exp(-tau)
    hrel = 0.3 * np.exp(-2.0 * tau)
    prod = 2.0 * hrel
    H = -d / 2.0 * np.log(2.0 * np.pi) + hrel
    rows = np.column_stack(
        [tau, t, np.ones_like(tau), linf_resc, l1, H, prod, hrel,
         np.full_like(tau, 0.01), np.full_like(tau, 0.2)]
    )
    out = tmp_path / "run"
    out.mkdir()
    with open(out / "diagnostics.csv", "w") as fh:
        fh.write(HEADER + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    summary = {
        "status": "completed",
        "rate_reports": [
            {"name": "linf_decay", "fitted_exponent": -1.002,
             "predicted_exponent": -1.0, "window": [2.0, 6.0],
             "residual": 0.01, "verdict": "pass", "frame": "t"},
            {"name": "l1_convergence", "fitted_exponent": -0.98,
             "predicted_exponent": -1.0, "window": [2.0, 6.0],
             "residual": 0.02, "verdict": "pass", "frame": "tau"},
            {"name": "entropy_convergence", "fitted_exponent": -1.95,
             "predicted_exponent": -2.0, "window": [2.0, 6.0],
             "residual": 0.03, "verdict": "pass", "frame": "tau"},
        ],
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=1)
    return out


@pytest.fixture
def rates_csv(tmp_path):
    """3x3 sweep fixture: m in {1, 1.15, 4/3} x gamma in {2, 2.5, 3}."""
    path = tmp_path / "rates.csv"
    lines = ["d,m,gamma,M,predicted,fitted,residual,verdict"]
    for m in (1.0, 1.15, 4 / 3):
        for gam in (2.0, 2.5, 3.0):
            fitted = 0.9 - 0.1 * m - 0.05 * gam
            lines.append(f"3,{m:.17g},{gam:.17g},0.1,1.0,{fitted:.17g},0.02,pass")
    path.write_text("\n".join(lines) + "\n")
    return path
