"""Exponential-decay fitting for RB and T-gate benchmarks.

The decay model is ``p(L) = A f^L + B`` with a fixed asymptote ``B`` (1/4 for
two-qubit RB, 1/2 for the T benchmark).  ``f`` is kept in (0, 1) by a
logistic reparameterization and the weighted residuals are minimized with
Levenberg-Marquardt (``scipy.optimize.least_squares``).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import least_squares
from scipy.special import expit, logit
from sklearn.base import BaseEstimator, RegressorMixin, clone
from sklearn.utils.validation import check_is_fitted, check_X_y, column_or_1d

from .data import DecaySeries, FitResult


class FitError(RuntimeError):
    """Raised for degenerate data or optimizer failure."""


def _lengths(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[:, 0] if X.ndim == 2 else X


class ExponentialDecayRegressor(BaseEstimator, RegressorMixin):
    """Estimator for ``p(L) = A f^L + asymptote``.

    Args:
        asymptote: fixed value approached as L grows.
        amplitude: fixed ``A``; ``None`` fits it.
        max_nfev: optimizer evaluation budget.

    Attributes:
        f_: fitted decay constant.
        amplitude_: fitted (or fixed) amplitude.
        converged_: whether the optimizer reported success.
    """

    def __init__(self, asymptote: float = 0.25, amplitude: float | None = None, max_nfev: int = 2000):
        self.asymptote = asymptote
        self.amplitude = amplitude
        self.max_nfev = max_nfev

    def _initial(self, L, y):
        # log-linear guess from points above the asymptote
        excess = y - self.asymptote
        ok = excess > 1e-6
        if ok.sum() >= 2 and np.ptp(L[ok]) > 0:
            slope, icpt = np.polyfit(L[ok], np.log(excess[ok]), 1)
            f0 = float(np.clip(math.exp(slope), 1e-3, 1 - 1e-9))
            a0 = float(math.exp(icpt))
        else:
            f0, a0 = 0.5, 1.0 - self.asymptote
        return f0, (self.amplitude if self.amplitude is not None else a0)

    def fit(self, X, y, sample_weight=None):
        """Fit to lengths ``X`` (shape (n,) or (n, 1)) and survivals ``y``.

        ``sample_weight`` holds shot counts; residuals are weighted by the
        binomial standard error.
        """
        L = _lengths(X)
        L, y = check_X_y(L.reshape(-1, 1), y, y_numeric=True)
        L = L[:, 0]
        if len(np.unique(L)) < 3:
            raise FitError("need at least three distinct sequence lengths")
        w = np.ones_like(y) if sample_weight is None else column_or_1d(sample_weight).astype(float)
        top = self.asymptote + (self.amplitude if self.amplitude is not None else 1 - self.asymptote)
        if np.allclose(y, y[0]):
            if self.amplitude is not None and np.isclose(y[0], top):
                self.f_, self.amplitude_, self.converged_ = 1.0, float(self.amplitude), True
                self.message_ = "constant data at the zero-decay level"
                return self
            if self.amplitude is None and y[0] > self.asymptote:
                # f = 1 with A = y - asymptote reproduces constant data exactly
                self.f_, self.amplitude_, self.converged_ = 1.0, float(y[0] - self.asymptote), True
                self.message_ = "constant data: no decay"
                return self
            raise FitError("degenerate data: all survival values are equal")
        p_hat = np.clip(y, 0.5 / np.maximum(w, 1), 1 - 0.5 / np.maximum(w, 1))
        sigma = np.sqrt(p_hat * (1 - p_hat) / np.maximum(w, 1))
        if sample_weight is None:
            sigma = np.ones_like(y)
        f0, a0 = self._initial(L, y)
        fixed_a = self.amplitude is not None

        def model(theta):
            f = expit(theta[0])
            a = self.amplitude if fixed_a else theta[1]
            return a * f ** L + self.asymptote

        def resid(theta):
            return (model(theta) - y) / sigma

        x0 = [logit(f0)] if fixed_a else [logit(f0), a0]
        sol = least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=self.max_nfev)
        if not np.all(np.isfinite(sol.x)):
            raise FitError(f"fit did not converge: {sol.message}")
        self.f_ = float(expit(sol.x[0]))
        self.amplitude_ = float(self.amplitude if fixed_a else sol.x[1])
        self.converged_ = bool(sol.success)
        self.message_ = str(sol.message)
        return self

    def predict(self, X):
        check_is_fitted(self, "f_")
        return self.amplitude_ * self.f_ ** _lengths(X) + self.asymptote


def rb_estimator() -> ExponentialDecayRegressor:
    return ExponentialDecayRegressor(asymptote=0.25)


def t_decay_estimator() -> ExponentialDecayRegressor:
    return ExponentialDecayRegressor(asymptote=0.5, amplitude=0.5)


def rb_fidelities(f: float, mean_cnots: float) -> dict:
    """Average fidelity per two-qubit Clifford and infidelity per CNOT."""
    F = 1.0 - 3.0 * (1.0 - f) / 4.0
    return {"F_avg": F, "infidelity_per_cnot": (1.0 - F) / mean_cnots}


def t_fidelity(eps: float) -> float:
    return 1.0 - 2.0 * eps / 3.0


def _resample(series: DecaySeries, rng) -> np.ndarray:
    """One bootstrap survival vector: circuits, then shots within circuits."""
    out = []
    for k, L in enumerate(series.lengths):
        if series.circuit_survival is not None:
            ps = np.asarray(series.circuit_survival[k], dtype=float)
            ns = np.asarray(series.circuit_shots[k], dtype=int)
            pick = rng.integers(len(ps), size=len(ps))
            hits = rng.binomial(ns[pick], ps[pick])
            out.append(hits.sum() / max(ns[pick].sum(), 1))
        else:
            n = max(series.shots[k], 1)
            out.append(rng.binomial(n, series.survival[k]) / n)
    return np.array(out)


def bootstrap(estimator: ExponentialDecayRegressor, series: DecaySeries, n_boot: int = 200,
              seed: int = 0) -> np.ndarray:
    """Fitted ``f`` over ``n_boot`` nonparametric bootstrap replicates."""
    if n_boot < 1:
        return np.array([])
    rng = np.random.default_rng(seed)
    L = np.array(series.lengths, dtype=float)
    fs = []
    for _ in range(n_boot):
        y = _resample(series, rng)
        try:
            fs.append(clone(estimator).fit(L, y, sample_weight=series.shots).f_)
        except FitError:
            # all-equal replicate: its f is the no-decay limit or undefined
            fs.append(1.0 if np.all(y >= estimator.asymptote + (estimator.amplitude or 0.0) - 1e-12)
                      else np.nan)
    return np.array(fs)


def fit_rb(series: DecaySeries, mean_cnots_per_clifford: float, n_boot: int = 200,
           seed: int = 0) -> FitResult:
    """Fit ``p(L) = a f^L + 1/4`` and convert to per-Clifford and per-CNOT error."""
    est = rb_estimator().fit(series.lengths, series.survival, sample_weight=series.shots)
    derived = rb_fidelities(est.f_, mean_cnots_per_clifford)
    fs = bootstrap(est, series, n_boot, seed)
    stderr = {}
    if fs.size:
        fs = fs[np.isfinite(fs)]
        stderr["f"] = float(np.std(fs, ddof=1)) if fs.size > 1 else 0.0
        Fs = 1.0 - 3.0 * (1.0 - fs) / 4.0
        stderr["F_avg"] = float(np.std(Fs, ddof=1)) if fs.size > 1 else 0.0
        stderr["infidelity_per_cnot"] = stderr["F_avg"] / mean_cnots_per_clifford
    resid = np.array(series.survival) - est.predict(series.lengths)
    return FitResult(
        model="rb",
        params={"a": est.amplitude_, "f": est.f_},
        derived=derived | {"mean_cnots_per_clifford": mean_cnots_per_clifford},
        stderr=stderr, residuals=resid.tolist(), converged=est.converged_, message=est.message_,
    )


def fit_t_decay(series: DecaySeries, n_boot: int = 200, seed: int = 0) -> FitResult:
    """Fit ``p(L) = 1/2 + (1/2)(1 - 2 eps)^L`` and report ``F_avg = 1 - 2 eps / 3``."""
    est = t_decay_estimator().fit(series.lengths, series.survival, sample_weight=series.shots)
    eps = (1.0 - est.f_) / 2.0
    fs = bootstrap(est, series, n_boot, seed)
    stderr = {}
    if fs.size:
        fs = fs[np.isfinite(fs)]
        eps_b = (1.0 - fs) / 2.0
        stderr["eps"] = float(np.std(eps_b, ddof=1)) if fs.size > 1 else 0.0
        stderr["F_avg"] = 2.0 * stderr["eps"] / 3.0
    resid = np.array(series.survival) - est.predict(series.lengths)
    return FitResult(
        model="t",
        params={"eps": eps},
        derived={"F_avg": t_fidelity(eps)},
        stderr=stderr, residuals=resid.tolist(), converged=est.converged_, message=est.message_,
    )
