"""Bloch-vector estimators from shot statistics.

Two estimators over the closed unit ball:

* ``mle_reconstruct`` maximizes the binomial log-likelihood
  sum_u [p_u ln(1 + a.u) + (1 - p_u) ln(1 - a.u)]
  by projected gradient ascent (the feasible set is the unit ball, so the
  Euclidean projection is a radial rescale).
* ``lr_reconstruct`` minimizes the squared probability residual
  sum_u (1 + u.a - 2 p_u)^2 in closed form, falling back to the
  boundary (secular equation) solution when the unconstrained minimizer
  leaves the ball.

Both accept the same input: measurement axes, empirical probabilities,
and per-basis shot counts.  Unequal shot counts weight each term by
N_u / mean(N); with equal counts the objectives reduce to the unweighted
sums above.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import BlochVector

# Floor for log arguments: keeps the objective finite on the boundary when
# some empirical probability is exactly 0 or 1.
_LOG_FLOOR = 1e-14

_BALL_SLACK = 1e-12


class NonSpanningBasesError(ValueError):
    """Measurement axes do not span R^3; the state is not identifiable."""


class MaxIterationsExceededError(RuntimeError):
    """Solver hit its iteration cap.  Carries the best iterate in .result."""

    def __init__(self, message: str, result: "ReconstructionResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-10
    max_iter: int = 10_000
    # declare convergence when the relative objective change stays below
    # rel_obj_tol for stall_iters consecutive iterations
    rel_obj_tol: float = 1e-14
    stall_iters: int = 5


@dataclass(frozen=True)
class ReconstructionResult:
    estimate: BlochVector
    estimator: str
    objective: float
    iterations: int
    converged: bool
    gradient_norm_final: float

    def __post_init__(self):
        if self.estimate.norm() > 1.0 + 1e-9:
            raise ValueError("estimate left the unit ball")


@dataclass(frozen=True)
class ReconstructionInput:
    """Axes, empirical probabilities, and shot weights for one reconstruction.

    axes is (m, 3) with unit rows, probabilities and shots are length m.
    """

    axes: np.ndarray
    probabilities: np.ndarray
    shots: np.ndarray

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=float)
        probs = np.asarray(self.probabilities, dtype=float)
        shots = np.asarray(self.shots, dtype=float)
        if axes.ndim != 2 or axes.shape[1] != 3:
            raise ValueError("axes must be an (m, 3) array")
        if probs.shape != (axes.shape[0],) or shots.shape != (axes.shape[0],):
            raise ValueError("probabilities and shots must match the number of axes")
        if np.any((probs < 0.0) | (probs > 1.0)):
            raise ValueError("empirical probabilities must lie in [0, 1]")
        if np.any(shots <= 0):
            raise ValueError("shot counts must be positive")
        norms = np.linalg.norm(axes, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("all measurement axes must be unit vectors")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "shots", shots)

    @classmethod
    def from_entries(cls, entries) -> "ReconstructionInput":
        """Build from an iterable of (axis, p_u, shots) triples."""
        axes, probs, shots = [], [], []
        for u, p, n in entries:
            axes.append(u.as_tuple() if isinstance(u, BlochVector) else tuple(u))
            probs.append(float(p))
            shots.append(float(n))
        return cls(np.array(axes, dtype=float), np.array(probs), np.array(shots))

    @classmethod
    def from_records(cls, records, catalog) -> "ReconstructionInput":
        """Build from MeasurementRecords, looking axes up in a PvmCatalog."""
        entries = [
            (catalog.basis_by_id(r.basis_id).axis, r.empirical_probability, r.shots)
            for r in records
        ]
        return cls.from_entries(entries)

    def weights(self) -> np.ndarray:
        """Per-basis weights N_u / mean(N); all ones for equal shot counts."""
        return self.shots / self.shots.mean()


def _check_spanning(axes: np.ndarray) -> None:
    if axes.shape[0] < 3:
        raise NonSpanningBasesError(f"need >= 3 bases to span R^3, got {axes.shape[0]}")
    svals = np.linalg.svd(axes, compute_uv=False)
    if svals[-1] <= 1e-9 * svals[0]:
        raise NonSpanningBasesError("measurement axes are rank-deficient; state not identifiable")


def _objective(a: np.ndarray, axes: np.ndarray, probs: np.ndarray, w: np.ndarray) -> float:
    c = axes @ a
    return float(
        np.sum(w * (probs * np.log(np.maximum(1.0 + c, _LOG_FLOOR))
                    + (1.0 - probs) * np.log(np.maximum(1.0 - c, _LOG_FLOOR))))
    )


def _gradient(a: np.ndarray, axes: np.ndarray, probs: np.ndarray, w: np.ndarray) -> np.ndarray:
    c = axes @ a
    coef = w * (probs / np.maximum(1.0 + c, _LOG_FLOOR)
                - (1.0 - probs) / np.maximum(1.0 - c, _LOG_FLOOR))
    return axes.T @ coef


def mle_objective(a, input: ReconstructionInput) -> float:
    """Per-shot-normalized log-likelihood at a (log arguments floored)."""
    avec = np.asarray(a.as_tuple() if isinstance(a, BlochVector) else a, dtype=float)
    return _objective(avec, input.axes, input.probabilities, input.weights())


def mle_gradient(a, input: ReconstructionInput) -> np.ndarray:
    """Analytic gradient sum_u w_u [p_u/(1+a.u) - (1-p_u)/(1-a.u)] u."""
    avec = np.asarray(a.as_tuple() if isinstance(a, BlochVector) else a, dtype=float)
    return _gradient(avec, input.axes, input.probabilities, input.weights())


def _project_ball(a: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(a)
    if n <= 1.0:
        return a
    return a / n


def _stationarity(a: np.ndarray, g: np.ndarray) -> float:
    """First-order optimality measure on the ball.

    Interior: plain gradient norm.  On the boundary the KKT condition for a
    maximizer is g parallel to a with nonnegative multiplier, so only the
    tangential component counts (an inward-pointing gradient still counts in
    full, since moving inward is feasible).
    """
    r = np.linalg.norm(a)
    if r < 1.0 - 1e-9:
        return float(np.linalg.norm(g))
    ahat = a / r
    lam = float(g @ ahat)
    if lam <= 0.0:
        return float(np.linalg.norm(g))
    return float(np.linalg.norm(g - lam * ahat))


def _solve_mle(axes: np.ndarray, probs: np.ndarray, w: np.ndarray, opts: SolverOptions):
    """Projected gradient ascent with Armijo backtracking from a = 0.

    Returns (a, objective, iterations, converged, stationarity).
    """
    a = np.zeros(3)
    f = _objective(a, axes, probs, w)
    step = 1.0
    sigma = 1e-4
    stall = 0
    pg = np.inf
    for it in range(1, opts.max_iter + 1):
        g = _gradient(a, axes, probs, w)
        pg = _stationarity(a, g)
        if pg <= opts.tolerance:
            return a, f, it, True, pg
        step = min(step * 2.0, 1e6)
        f_new = f
        a_new = a
        while True:
            cand = _project_ball(a + step * g)
            fc = _objective(cand, axes, probs, w)
            d = cand - a
            if fc >= f + sigma * float(g @ d):
                a_new, f_new = cand, fc
                break
            step *= 0.5
            if step < 1e-18:
                # no ascent direction left at floating-point resolution
                break
        rel_change = abs(f_new - f) / max(1.0, abs(f))
        a, f = a_new, f_new
        if rel_change <= opts.rel_obj_tol:
            stall += 1
            if stall >= opts.stall_iters:
                g = _gradient(a, axes, probs, w)
                return a, f, it, True, _stationarity(a, g)
        else:
            stall = 0
    return a, f, opts.max_iter, False, pg


def mle_reconstruct(input: ReconstructionInput, opts: SolverOptions | None = None) -> ReconstructionResult:
    """Maximum-likelihood Bloch vector over the closed unit ball.

    Raises NonSpanningBasesError for rank-deficient axes and
    MaxIterationsExceededError (carrying the best iterate) if the iteration
    cap is hit before the stationarity tolerance.
    """
    opts = opts or SolverOptions()
    _check_spanning(input.axes)
    w = input.weights()
    a, f, iters, converged, pg = _solve_mle(input.axes, input.probabilities, w, opts)
    result = ReconstructionResult(
        estimate=BlochVector.from_sequence(a),
        estimator="mle",
        objective=f,
        iterations=iters,
        converged=converged,
        gradient_norm_final=pg,
    )
    if not converged:
        raise MaxIterationsExceededError(
            f"projected gradient ascent did not reach tolerance {opts.tolerance:g} "
            f"in {opts.max_iter} iterations (stationarity {pg:.3g})",
            result,
        )
    return result


def _secular_boundary(G: np.ndarray, b: np.ndarray, tol: float = 1e-12):
    """Solve (G + lam I) a = b with lam > 0 such that ||a|| = 1.

    G is symmetric positive definite here, so ||a(lam)|| decreases strictly
    from ||G^-1 b|| > 1 to 0 and the root is unique.  Newton steps on
    1/||a|| - 1 with a bisection safeguard.
    """
    evals, evecs = np.linalg.eigh(G)
    beta = evecs.T @ b

    def norm_at(lam: float) -> float:
        return float(np.sqrt(np.sum((beta / (evals + lam)) ** 2)))

    lo = 0.0
    hi = max(float(np.linalg.norm(b) - evals[0]), 1e-30)
    while norm_at(hi) > 1.0:
        hi *= 2.0
    lam = 0.5 * hi
    for it in range(1, 200):
        n = norm_at(lam)
        if abs(n - 1.0) <= tol:
            break
        if n > 1.0:
            lo = lam
        else:
            hi = lam
        # Newton on phi(lam) = 1/n - 1, the standard well-behaved form
        dn2 = -2.0 * float(np.sum(beta**2 / (evals + lam) ** 3))
        dphi = -0.5 * dn2 / n**3
        lam_newton = lam - (1.0 / n - 1.0) / dphi
        lam = lam_newton if lo < lam_newton < hi else 0.5 * (lo + hi)
    a = evecs @ (beta / (evals + lam))
    return a, lam, it


def lr_reconstruct(input: ReconstructionInput, opts: SolverOptions | None = None) -> ReconstructionResult:
    """Least-squares Bloch vector over the closed unit ball, in closed form.

    Solves the 3x3 normal equations; if the solution leaves the ball, the
    unit-norm minimizer is found from the secular equation.
    """
    _check_spanning(input.axes)
    axes, probs = input.axes, input.probabilities
    w = input.weights()
    G = (axes * w[:, None]).T @ axes
    b = axes.T @ (w * (2.0 * probs - 1.0))
    a = np.linalg.solve(G, b)
    lam = 0.0
    iters = 0
    norm = np.linalg.norm(a)
    if norm > 1.0 + _BALL_SLACK:
        a, lam, iters = _secular_boundary(G, b)
    elif norm > 1.0:
        a = a / norm
    resid = axes @ a - (2.0 * probs - 1.0)
    objective = float(np.sum(w * resid**2))
    kkt = float(np.linalg.norm(2.0 * (G @ a - b) + 2.0 * lam * a))
    return ReconstructionResult(
        estimate=BlochVector.from_sequence(a),
        estimator="lr",
        objective=objective,
        iterations=iters,
        converged=True,
        gradient_norm_final=kkt,
    )
