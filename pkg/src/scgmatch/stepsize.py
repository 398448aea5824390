"""
Exact line search for the constrained gradient update.

Along the segment ``(1 - alpha) M + alpha D`` the objective is a quadratic
``a alpha^2 + b alpha + c``. With ``E = D - M``,

    a = 1/2 <E, A E B>,      b = <E, A M B> + lam <E, K>,

which costs two matrix products per iteration instead of the O(n^4) of the
vectorized form ``1/2 (m - d)^T (A kron B) (m - d)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import feature_kernel

POSITIVE_A = "positive-a"
INTERIOR = "interior"
CLAMPED_TO_1 = "clamped-to-1"
CLAMPED_TO_0 = "clamped-to-0"


@dataclass(frozen=True)
class AlphaDecision:
    alpha: float
    a_coeff: float
    b_coeff: float
    branch: str

    @property
    def gain(self) -> float:
        """Predicted objective increase ``a alpha^2 + b alpha``."""
        return self.a_coeff * self.alpha**2 + self.b_coeff * self.alpha


def quadratic_coefficients(M, D, A, B, K=None, lam=0.0, AMB=None):
    """Return ``(a, b)`` for ``Z((1 - alpha) M + alpha D)``.

    ``AMB`` may pass in a precomputed ``A @ M @ B``.
    """
    P = A @ M @ B if AMB is None else AMB
    Q = A @ D @ B
    mp = np.vdot(M, P)
    mq = np.vdot(M, Q)
    dp = np.vdot(D, P)
    dq = np.vdot(D, Q)
    a = 0.5 * (mp - mq - dp + dq)
    b = -mp + mq
    if K is not None and lam:
        b += lam * (np.vdot(D, K) - np.vdot(M, K))
    return float(a), float(b)


def best_alpha(a: float, b: float) -> AlphaDecision:
    """Maximize ``a x^2 + b x`` over ``x`` in [0, 1].

    For ``a >= 0`` the answer is 1 whenever the step does not lose
    objective (always the case when ``b >= 0``); a losing step gives 0.
    For ``a < 0`` the vertex ``-b / 2a`` is clipped into [0, 1].
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError(f"non-finite step-size coefficients a={a}, b={b}")
    if a >= 0:
        if a + b >= 0:
            return AlphaDecision(1.0, a, b, POSITIVE_A)
        return AlphaDecision(0.0, a, b, CLAMPED_TO_0)
    x = -b / (2.0 * a)
    if x >= 1.0:
        return AlphaDecision(1.0, a, b, CLAMPED_TO_1)
    if x <= 0.0:
        return AlphaDecision(0.0, a, b, CLAMPED_TO_0)
    return AlphaDecision(float(x), a, b, INTERIOR)


def adaptive_alpha(M, D, A, B, lam=0.0, K=None, AMB=None) -> AlphaDecision:
    """Optimal step ``alpha*`` in [0, 1] for moving from ``M`` towards ``D``.

    ``A`` and ``B`` are the symmetric affinity matrices of the two graphs, or
    the graphs themselves (then ``K`` is built from their features).
    """
    if hasattr(A, "affinity"):
        if K is None:
            K = feature_kernel(A, B)
        A, B = A.affinity, B.affinity
    M = np.asarray(M, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if M.shape != D.shape or A.shape[1] != M.shape[0] or B.shape[0] != M.shape[1]:
        raise ValueError(f"shape mismatch: M {M.shape}, D {D.shape}, A {A.shape}, B {B.shape}")
    a, b = quadratic_coefficients(M, D, A, B, K, lam, AMB)
    return best_alpha(a, b)


def apply_step(M, D, alpha: float) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if M.shape != D.shape:
        raise ValueError(f"shape mismatch: {M.shape} vs {D.shape}")
    return (1.0 - alpha) * M + alpha * D
