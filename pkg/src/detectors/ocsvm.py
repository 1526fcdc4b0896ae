"""
One-Class SVM
nu-one-class SVM on a precomputed kernel, dual solved by maximal-violating-pair SMO
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from core.errors import InfeasibleError, InputError, ParameterError
from detectors.score_vector import ScoreVector

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-9
MIN_CURVATURE = 1e-12


@dataclass
class OcsvmSolution:
    """Dual solution: alpha, offset rho and the final gradient K alpha"""
    alpha: np.ndarray
    rho: float
    gradient: np.ndarray
    bound: float
    iterations: int
    kkt_violation: float
    converged: bool
    objective_trace: List[float] = field(default_factory=list)

    @property
    def decision(self) -> np.ndarray:
        """g(x_i) = sum_j alpha_j K(i,j) - rho; negative means outside the region"""
        return self.gradient - self.rho

    def free_mask(self, eps: Optional[float] = None) -> np.ndarray:
        eps = self.bound * 1e-9 if eps is None else eps
        return (self.alpha > eps) & (self.alpha < self.bound - eps)


def _initial_alpha(n: int, bound: float) -> np.ndarray:
    """Fill the first points up to the box bound until the total is 1"""
    alpha = np.zeros(n, dtype=np.float64)
    full = min(int(np.floor(1.0 / bound)), n)
    alpha[:full] = bound
    if full < n:
        alpha[full] = 1.0 - bound * full
    return alpha


def _offset(solution: OcsvmSolution) -> float:
    alpha, gradient, bound = solution.alpha, solution.gradient, solution.bound
    free = solution.free_mask()
    if free.any():
        return float(np.median(gradient[free]))
    eps = bound * 1e-9
    # no free vector: midpoint of the KKT interval
    at_zero = alpha <= eps
    at_bound = alpha >= bound - eps
    upper = gradient[at_zero].min() if at_zero.any() else None
    lower = gradient[at_bound].max() if at_bound.any() else None
    if upper is None:
        return float(lower)
    if lower is None:
        return float(upper)
    return 0.5 * float(upper + lower)


def solve_ocsvm_dual(kernel: np.ndarray, nu: float, tol: float = 1e-4,
                     max_iter: int = 100_000) -> OcsvmSolution:
    """
    Minimize 1/2 a'Ka subject to 0 <= a_i <= 1/(nu N) and sum(a) = 1

    Each step moves mass between the pair (i, j) that violates the KKT
    conditions most, i = argmin G over a_i < bound, j = argmax G over a_j > 0,
    until G_j - G_i < tol.

    Args:
        kernel: Symmetric N x N kernel matrix
        nu: Upper bound on the outlier fraction, 0 < nu <= 1
        tol: KKT violation at which the solver stops
        max_iter: Cap on pair updates

    Returns:
        OcsvmSolution
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise InputError(f"kernel must be square, got shape {kernel.shape}")
    if not np.all(np.isfinite(kernel)):
        raise InputError("kernel contains non-finite values")
    if not np.allclose(kernel, kernel.T, atol=SYMMETRY_TOLERANCE, rtol=0.0):
        raise InputError("kernel matrix is not symmetric")
    if not 0 < nu <= 1:
        raise ParameterError(f"nu must be in (0, 1], got {nu}")
    n = kernel.shape[0]
    if nu * n < 1:
        raise InfeasibleError(f"nu * N = {nu * n:g} < 1: box bound 1/(nu N) exceeds 1")

    bound = 1.0 / (nu * n)
    alpha = _initial_alpha(n, bound)
    gradient = kernel @ alpha
    diag = np.diag(kernel)
    eps = bound * 1e-12
    trace = [0.5 * float(alpha @ gradient)]

    violation = np.inf
    iterations = 0
    while iterations < max_iter:
        up = np.flatnonzero(alpha < bound - eps)
        low = np.flatnonzero(alpha > eps)
        if len(up) == 0 or len(low) == 0:
            violation = 0.0
            break
        i = up[np.argmin(gradient[up])]
        j = low[np.argmax(gradient[low])]
        violation = float(gradient[j] - gradient[i])
        if violation < tol:
            break

        curvature = max(diag[i] + diag[j] - 2.0 * kernel[i, j], MIN_CURVATURE)
        step = min(violation / curvature, bound - alpha[i], alpha[j])
        alpha[i] += step
        alpha[j] -= step
        gradient += step * (kernel[:, i] - kernel[:, j])
        iterations += 1
        trace.append(0.5 * float(alpha @ gradient))

    converged = violation < tol
    if not converged:
        logger.warning("OCSVM stopped after %d updates with KKT violation %.3g", iterations, violation)
    np.clip(alpha, 0.0, bound, out=alpha)

    solution = OcsvmSolution(alpha=alpha, rho=float("nan"), gradient=gradient, bound=bound,
                             iterations=iterations, kkt_violation=max(violation, 0.0),
                             converged=converged, objective_trace=trace)
    solution.rho = _offset(solution)
    logger.debug("OCSVM: N=%d, nu=%g, %d updates, violation %.3g, rho %.6g",
                 n, nu, iterations, violation, solution.rho)
    return solution


def ocsvm(kernel: np.ndarray, nu: float = 0.1, truth: Optional[np.ndarray] = None,
          tol: float = 1e-4, max_iter: int = 100_000) -> ScoreVector:
    """Score = -g(x_i), so points outside the estimated support score highest"""
    solution = solve_ocsvm_dual(kernel, nu, tol=tol, max_iter=max_iter)
    return ScoreVector(scores=-solution.decision, truth=truth, method="ocsvm",
                       config={"nu": nu, "tol": tol, "rho": "median over free support vectors"})
