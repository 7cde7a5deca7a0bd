"""Weighted nonlinear decay fits with deterministic starting points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

MODELS = ("exponential", "gaussian_envelope", "damped_cosine")
PARAM_NAMES = {
    "exponential": ("A", "alpha", "B"),
    "gaussian_envelope": ("A", "tau", "B"),
    "damped_cosine": ("A", "tau", "f", "phi", "B"),
}


@dataclass
class DecayFit:
    model: str
    params: dict
    stderr: dict
    residual_norm: float
    converged: bool
    degenerate: bool = False
    covariance: np.ndarray | None = field(default=None, repr=False)

    def ci(self, name: str, z: float = 1.0) -> tuple[float, float]:
        v, s = self.params[name], self.stderr.get(name, math.inf)
        return v - z * s, v + z * s

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": {k: float(v) for k, v in self.params.items()},
            "stderr": {k: float(v) for k, v in self.stderr.items()},
            "residual_norm": float(self.residual_norm),
            "converged": bool(self.converged),
            "degenerate": bool(self.degenerate),
        }


def model_function(model: str):
    if model == "exponential":
        return lambda x, a, alpha, b: a * np.power(alpha, x) + b
    if model == "gaussian_envelope":
        return lambda x, a, tau, b: a * np.exp(-((x / tau) ** 2)) + b
    if model == "damped_cosine":
        return lambda x, a, tau, f, phi, b: (
            a * np.exp(-((x / tau) ** 2)) * np.cos(2 * np.pi * f * x + phi) + b)
    raise ValueError(f"unknown model {model!r}")


def _init_exponential(x, y):
    b0 = float(np.min(y)) - 0.05 * (float(np.ptp(y)) + 1e-3)
    z = np.log(np.clip(y - b0, 1e-12, None))
    slope, icpt = np.polyfit(x, z, 1)
    alpha = float(np.clip(np.exp(slope), 1e-3, 1.0 - 1e-9))
    return [float(np.exp(icpt)), alpha, b0]


def _init_gaussian(x, y):
    tail = max(1, len(y) // 4)
    b0 = float(np.mean(y[-tail:]))
    a0 = float(y[0] - b0)
    level = b0 + a0 / math.e
    below = np.nonzero((y - level) * np.sign(a0 or 1.0) < 0)[0]
    tau0 = float(x[below[0]]) if len(below) else float(x[-1])
    return [a0, max(tau0, float(x[1] - x[0]) if len(x) > 1 else 1.0), b0]


def _init_damped_cosine(x, y):
    b0 = float(np.mean(y))
    dx = float(np.median(np.diff(x)))
    spec = np.abs(np.fft.rfft(y - b0))
    freqs = np.fft.rfftfreq(len(y), dx)
    k = int(np.argmax(spec[1:]) + 1)
    f0 = float(freqs[k])
    # amplitude envelope from the local peak-to-peak in windows of one period
    win = max(2, int(round(1 / (f0 * dx))))
    env = np.array([np.ptp(y[i:i + win]) / 2 for i in range(0, len(y) - win + 1, win)])
    tx = x[: len(env) * win: win] + win * dx / 2
    a0 = float(env[0]) if len(env) else float(np.ptp(y) / 2)
    below = np.nonzero(env < a0 / math.e)[0]
    tau0 = float(tx[below[0]]) if len(below) else float(x[-1])
    c = np.cos(2 * np.pi * f0 * x)
    s = np.sin(2 * np.pi * f0 * x)
    w = np.exp(-((x / tau0) ** 2))
    coef, *_ = np.linalg.lstsq(np.stack([c * w, s * w], 1), y - b0, rcond=None)
    phi0 = float(math.atan2(-coef[1], coef[0]))
    a0 = float(math.hypot(*coef))
    return [a0, tau0, f0, phi0, b0]


_INIT = {"exponential": _init_exponential, "gaussian_envelope": _init_gaussian,
         "damped_cosine": _init_damped_cosine}


def fit_decay(x, y, stderr=None, model: str = "exponential", p0=None,
              max_nfev: int = 2000, fixed: dict | None = None) -> DecayFit:
    """Weighted Levenberg-Marquardt fit; covariance from the final Jacobian.

    `fixed` pins named parameters (e.g. {"B": 0.0}); they get zero stderr.
    Non-convergence or a singular Jacobian is reported through the
    `converged` flag rather than an exception.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    names = PARAM_NAMES[model]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fixed = dict(fixed or {})
    if any(k not in names for k in fixed):
        raise ValueError(f"fixed parameters must be among {names}")
    free = [k for k in names if k not in fixed]
    if len(x) < len(free) + (1 if model == "exponential" and "B" in free else 0):
        raise ValueError(f"need at least {len(free)} points for model {model}")
    sigma = np.ones_like(y) if stderr is None else np.asarray(stderr, dtype=float)
    floor = max(1e-12, 1e-3 * float(np.median(sigma[sigma > 0]))) if np.any(sigma > 0) else 1.0
    sigma = np.where(sigma > 0, sigma, floor)
    f = model_function(model)
    start = list(p0) if p0 is not None else _INIT[model](x, y)
    if fixed and model == "exponential" and p0 is None:
        # re-derive the start with the pinned offset removed
        b = fixed.get("B", start[2])
        z = np.log(np.clip(np.abs(y - b), 1e-12, None))
        slope, icpt = np.polyfit(x, z, 1)
        start = [float(np.sign(np.mean(y - b)) or 1.0) * float(np.exp(icpt)),
                 float(np.clip(np.exp(slope), 1e-3, 1.0 - 1e-12)), b]
    start_free = [v for k, v in zip(names, start) if k not in fixed]

    def full(q):
        it = iter(q)
        return [fixed[k] if k in fixed else next(it) for k in names]

    def resid(q):
        return (f(x, *full(q)) - y) / sigma

    nan = {k: math.nan for k in names}
    try:
        sol = least_squares(resid, start_free, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=max_nfev * len(names))
    except (ValueError, np.linalg.LinAlgError):
        return DecayFit(model, dict(zip(names, start)), nan, math.inf, False, True)
    params = dict(zip(names, (float(v) for v in full(sol.x))))
    r = sol.fun
    dof = max(1, len(y) - len(free))
    jtj = sol.jac.T @ sol.jac
    converged = bool(sol.status > 0) and bool(np.all(np.isfinite(sol.x)))
    try:
        cov = np.linalg.inv(jtj)
        if stderr is None:
            cov = cov * float(r @ r) / dof
        errs = dict(zip(free, np.sqrt(np.clip(np.diag(cov), 0, None))))
        errs.update({k: 0.0 for k in fixed})
        if np.linalg.cond(jtj) > 1e14:
            converged = False
    except np.linalg.LinAlgError:
        cov, errs, converged = None, nan, False
    degenerate = False
    if model == "exponential":
        alpha = params["alpha"]
        hi = alpha + errs.get("alpha", math.inf)
        degenerate = not (0 < alpha <= 1) or not hi < 1 or not converged
    if model in ("gaussian_envelope", "damped_cosine"):
        params["tau"] = abs(params["tau"])
        degenerate = not converged or params["tau"] <= 0
    return DecayFit(model, params, {k: float(v) for k, v in errs.items()},
                    float(np.linalg.norm(r)), converged, degenerate, cov)
