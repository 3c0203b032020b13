"""Least squares engines for the two model families.

Polynomials are fitted in closed form through an orthogonal factorization
of the Vandermonde design matrix.  Sinusoids a*sin(b*x + c) + d go through
a damped Gauss-Newton iteration with analytic Jacobian and a deterministic
multi-start grid over frequency and phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

POLYNOMIAL = "polynomial"
SINUSOID = "sinusoid"

# Damped Gauss-Newton controls: multiplicative damping, relative-decrease /
# step-size termination, hard iteration cap per start.
_DAMPING_INIT = 1e-3
_DAMPING_UP = 10.0
_DAMPING_DOWN = 10.0
_SSE_REL_TOL = 1e-12
_STEP_TOL = 1e-10
_MAX_ITER = 200

# Multi-start grid: frequency multipliers of (2*pi / abscissa span) and
# phase offsets, in priority order; 15 starts in total.
_B_MULTIPLIERS = (0.25, 0.5, 1.0, 2.0, 4.0)
_C_OFFSETS = (-math.pi / 2, 0.0, math.pi / 2)


class SingularFitError(RuntimeError):
    """The linear design matrix is rank deficient."""


class NonConvergenceError(RuntimeError):
    """Every start of the iterative solver failed to meet tolerance.

    Carries the lowest-SSE result seen so far in ``best``.
    """

    def __init__(self, message: str, best: "FitResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class Dataset:
    """Paired observation vectors (x_i, y_i)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
            raise ValueError("x and y must be one-dimensional and equally long")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("observations must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class ModelSpec:
    """A regression family: polynomial of fixed degree, or sinusoid."""

    family: str
    degree: int | None = None

    def __post_init__(self) -> None:
        if self.family == POLYNOMIAL:
            if self.degree is None or self.degree < 0:
                raise ValueError("polynomial models need a nonnegative degree")
        elif self.family == SINUSOID:
            if self.degree is not None:
                raise ValueError("sinusoid models take no degree")
        else:
            raise ValueError(f"unknown model family {self.family!r}")

    @classmethod
    def polynomial(cls, degree: int) -> "ModelSpec":
        return cls(POLYNOMIAL, degree)

    @classmethod
    def sinusoid(cls) -> "ModelSpec":
        return cls(SINUSOID)

    @property
    def n_params(self) -> int:
        """Coefficient count: degree + 1, or 4 for (a, b, c, d)."""
        return self.degree + 1 if self.family == POLYNOMIAL else 4


@dataclass(frozen=True)
class FitResult:
    """A fitted coefficient vector plus solver diagnostics."""

    model: ModelSpec
    params: np.ndarray
    sse: float
    iterations: int
    converged: bool

    def __post_init__(self) -> None:
        p = np.asarray(self.params, dtype=float)
        if p.size != self.model.n_params:
            raise ValueError(
                f"{self.model.family} expects {self.model.n_params} parameters, got {p.size}"
            )
        object.__setattr__(self, "params", p)

    def predict(self, x) -> np.ndarray:
        return predict(self.model, self.params, x)


def predict(model: ModelSpec, params, x) -> np.ndarray:
    """Evaluate the model elementwise at ``x``.

    Polynomial coefficients are ordered highest degree first and evaluated
    by Horner's rule.
    """
    p = np.asarray(params, dtype=float)
    if p.size != model.n_params:
        raise ValueError(
            f"{model.family} expects {model.n_params} parameters, got {p.size}"
        )
    xv = np.asarray(x, dtype=float)
    if model.family == POLYNOMIAL:
        acc = np.full_like(xv, p[0])
        for coeff in p[1:]:
            acc = acc * xv + coeff
        return acc
    a, b, c, d = p
    return a * np.sin(b * xv + c) + d


def fit_linear(degree: int, data: Dataset) -> FitResult:
    """Ordinary least squares for a polynomial of the given degree.

    Solved through an SVD-based orthogonal factorization of the Vandermonde
    matrix rather than normal equations; a rank-deficient design raises
    SingularFitError.
    """
    n_params = degree + 1
    if len(data) < n_params:
        raise ValueError(
            f"degree {degree} needs at least {n_params} points, got {len(data)}"
        )
    design = np.vander(data.x, n_params)
    coeffs, _, rank, _ = np.linalg.lstsq(design, data.y, rcond=None)
    if rank < n_params:
        raise SingularFitError(
            f"design matrix rank {rank} below {n_params}; abscissas are degenerate"
        )
    residual = design @ coeffs - data.y
    model = ModelSpec.polynomial(degree)
    return FitResult(model, coeffs, float(residual @ residual), 0, True)


def _sinusoid_residual_jacobian(params: np.ndarray, x: np.ndarray, y: np.ndarray):
    a, b, c, _ = params
    arg = b * x + c
    s, co = np.sin(arg), np.cos(arg)
    r = params[0] * s + params[3] - y
    jac = np.column_stack([s, a * x * co, a * co, np.ones_like(x)])
    return r, jac


def _damped_gauss_newton(x: np.ndarray, y: np.ndarray, p0) -> tuple[np.ndarray, float, int, bool]:
    """One solver run from one start; returns (params, sse, iterations, converged)."""
    p = np.asarray(p0, dtype=float).copy()
    r, _ = _sinusoid_residual_jacobian(p, x, y)
    sse = float(r @ r)
    lam = _DAMPING_INIT
    eye = np.eye(4)
    for it in range(1, _MAX_ITER + 1):
        _, jac = _sinusoid_residual_jacobian(p, x, y)
        grad = jac.T @ r
        hess = jac.T @ jac
        try:
            step = np.linalg.solve(hess + lam * eye, -grad)
        except np.linalg.LinAlgError:
            lam *= _DAMPING_UP
            continue
        candidate = p + step
        r_new, _ = _sinusoid_residual_jacobian(candidate, x, y)
        sse_new = float(r_new @ r_new)
        if sse_new <= sse and np.all(np.isfinite(candidate)):
            rel_drop = (sse - sse_new) / sse if sse > 0.0 else 0.0
            p, r, sse = candidate, r_new, sse_new
            lam = max(lam / _DAMPING_DOWN, 1e-15)
            if rel_drop < _SSE_REL_TOL or float(np.max(np.abs(step))) < _STEP_TOL:
                return p, sse, it, True
        else:
            lam *= _DAMPING_UP
            if lam > 1e15:
                # Steps this damped are numerically zero: stationary point.
                return p, sse, it, True
    return p, sse, _MAX_ITER, False


def canonicalize_sinusoid(params) -> np.ndarray:
    """Resolve the (a,b,c,d) <-> (-a,b,c+pi,d) symmetry: a > 0, c in (-pi, pi]."""
    a, b, c, d = (float(v) for v in np.asarray(params, dtype=float))
    if a < 0.0:
        a, c = -a, c + math.pi
    c = (c + math.pi) % (2.0 * math.pi) - math.pi
    if c <= -math.pi:
        # The modulo lands on the open boundary only when c + pi divides 2*pi.
        c += 2.0 * math.pi
    return np.array([a, b, c, d])


def default_starts(data: Dataset, starts: int | None = None) -> list[np.ndarray]:
    """Deterministic multi-start grid for the sinusoid solver.

    Frequencies are multiples of 2*pi over the abscissa span; amplitude and
    offset come from the ordinate range and mean.  ``starts`` truncates the
    grid (1 start reproduces single-basin behaviour).
    """
    span = float(data.x.max() - data.x.min())
    if span <= 0.0:
        raise ValueError("abscissas must span a positive interval")
    a0 = (float(data.y.max()) - float(data.y.min())) / 2.0
    d0 = float(data.y.mean())
    grid = [
        np.array([a0, mult * 2.0 * math.pi / span, c0, d0])
        for mult in _B_MULTIPLIERS
        for c0 in _C_OFFSETS
    ]
    if starts is not None:
        if starts < 1:
            raise ValueError("starts must be at least 1")
        grid = grid[:starts]
    return grid


def fit_nonlinear(data: Dataset, init=None, *, model: ModelSpec | None = None,
                  starts: int | None = None) -> FitResult:
    """Least squares fit of a*sin(b*x + c) + d.

    With ``init`` the solver runs once from that point; otherwise every grid
    start runs and the lowest SSE (ties broken by start order) wins.  The
    winning parameters are canonicalized to a > 0, c in (-pi, pi].  If no
    start converges, NonConvergenceError carries the best result seen.
    """
    if model is None:
        model = ModelSpec.sinusoid()
    if model.family != SINUSOID:
        raise ValueError("fit_nonlinear only supports the sinusoid family")
    if len(data) < model.n_params:
        raise ValueError(f"sinusoid fits need at least {model.n_params} points, got {len(data)}")

    if init is not None:
        start_list = [np.asarray(init, dtype=float)]
        if start_list[0].size != 4:
            raise ValueError("sinusoid init must have 4 parameters (a, b, c, d)")
    else:
        start_list = default_starts(data, starts)

    best: tuple[np.ndarray, float, int, bool] | None = None
    any_converged = False
    for p0 in start_list:
        p, sse, iters, converged = _damped_gauss_newton(data.x, data.y, p0)
        any_converged = any_converged or converged
        if best is None or sse < best[1]:
            best = (p, sse, iters, converged)

    params, sse, iters, converged = best
    result = FitResult(model, canonicalize_sinusoid(params), sse, iters, converged)
    if not any_converged:
        raise NonConvergenceError(
            f"no start met tolerance within {_MAX_ITER} iterations", result
        )
    return result


def fit(model: ModelSpec, data: Dataset, init=None) -> FitResult:
    """Dispatch to the family's solver."""
    if model.family == POLYNOMIAL:
        return fit_linear(model.degree, data)
    return fit_nonlinear(data, init, model=model)
