"""Figures of merit and the eta sweep."""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from ._csvio import write_csv
from .design import DesignParams, designed_pulses
from .model import Chirality
from .propagate import DEFAULT_STEPS, basis_state, propagate

__all__ = [
    "enantiomeric_excess",
    "omega_max",
    "SweepRow",
    "sweep_eta",
    "default_eta_grid",
    "write_sweep_csv",
    "SWEEP_HEADER",
]

SWEEP_HEADER = ("eta", "P3_L", "P3_R", "P2_R", "excess", "omega_max")


def enantiomeric_excess(p3_left: float, p3_right: float) -> float:
    """``|P3_L - P3_R| / (P3_L + P3_R)``."""
    for name, p in (("p3_left", p3_left), ("p3_right", p3_right)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be a probability in [0, 1], got {p!r}")
    total = p3_left + p3_right
    if total == 0:
        raise ValueError("enantiomeric excess is undefined when both populations are zero")
    return abs((p3_left - p3_right) / total)


def _refine_peak(f, t, k):
    # golden-section search on the bracket around a discrete interior maximum
    try:
        res = minimize_scalar(
            lambda x: -f(x), bracket=(t[k - 1], t[k], t[k + 1]), method="golden", tol=1e-12
        )
    except ValueError:  # flat top: no strict bracket
        return f(t[k])
    return max(-float(res.fun), f(t[k]))


def omega_max(pulses) -> float:
    """Largest ``|Omega_j(t)|`` over the pulse window, all three waveforms.

    The grid maximum of each waveform is refined with a golden-section
    search on the closed form when one is available.
    """
    t = np.asarray(pulses.t)
    best = 0.0
    for j, wave in enumerate((pulses.omega_x, pulses.omega_y, pulses.omega_z)):
        mag = np.abs(np.asarray(wave, dtype=float))
        k = int(np.argmax(mag))
        peak = float(mag[k])
        if pulses.func is not None and 0 < k < len(t) - 1:
            peak = _refine_peak(lambda x: abs(float(pulses.at(x)[j])), t, k)
        best = max(best, peak)
    return best


@dataclass(frozen=True)
class SweepRow:
    eta: float
    p3_left: float
    p3_right: float
    p2_right: float
    excess: float
    omega_max: float
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def default_eta_grid(n=20, lo=0.005, hi=0.1):
    return np.geomspace(lo, hi, n)


def _sweep_point(eta, tau, steps, method):
    """Both enantiomers under the shared field designed from the left branch."""
    try:
        pulses = designed_pulses(DesignParams(tau, eta, steps + 1), Chirality.LEFT)
        psi0 = basis_state(1)
        left = propagate(pulses, Chirality.LEFT, psi0, steps, method).final_populations
        right = propagate(pulses, Chirality.RIGHT, psi0, steps, method).final_populations
        return SweepRow(
            eta=float(eta),
            p3_left=float(left[2]),
            p3_right=float(right[2]),
            p2_right=float(right[1]),
            excess=enantiomeric_excess(float(left[2]), float(right[2])),
            omega_max=omega_max(pulses),
        )
    except (ValueError, ArithmeticError) as exc:
        nan = math.nan
        return SweepRow(float(eta), nan, nan, nan, nan, nan, error=f"{type(exc).__name__}: {exc}")


def sweep_eta(etas, tau, steps=DEFAULT_STEPS, workers=1, method="magnus4"):
    """Endpoint populations, excess and peak Rabi frequency versus ``eta``.

    Each point is independent; with ``workers > 1`` they run in a process
    pool. Rows are returned sorted by ``eta`` so output does not depend on
    scheduling. A point that fails numerically is returned with ``error`` set.
    """
    etas = [float(e) for e in etas]
    if not etas:
        raise ValueError("eta sweep needs at least one value")
    bad = [e for e in etas if not (0 < e <= 0.2)]
    if bad:
        raise ValueError(f"sweep eta values must lie in (0, 0.2], got {bad}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, etas, [tau] * len(etas), [steps] * len(etas), [method] * len(etas)))
    else:
        rows = [_sweep_point(e, tau, steps, method) for e in etas]
    return sorted(rows, key=lambda r: r.eta)


def write_sweep_csv(rows, path):
    cols = [[getattr(r, f.name) for r in rows] for f in fields(SweepRow) if f.name != "error"]
    write_csv(path, SWEEP_HEADER, cols)
