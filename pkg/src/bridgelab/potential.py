"""Convex potentials with derivatives and convexity-class certificates.

A potential carries the data the rest of the package needs: F and its first
two derivatives, a lower Hessian bound ``rho``, a dimension parameter
``n_dim`` (``inf`` drops the rank-one term from the convexity certificate),
the domain, and the minimizer when one exists.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NoConvergence

_EPS = float(np.finfo(float).eps)
GRAD_STEP = np.sqrt(_EPS)          # central-difference gradient step scale
HESS_STEP = _EPS ** (1.0 / 3.0)    # central-difference Hessian-action step scale

ALL_SPACE = "all_space"
POSITIVE_ORTHANT = "positive_orthant"

QUADRATIC_ISOTROPIC = "quadratic_isotropic"
QUADRATIC_MATRIX = "quadratic_matrix"
NEG_LOG = "neg_log"
CUSTOM = "custom"


def as_point(x, dim: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dim,):
        raise ValueError(f"expected a point of dimension {dim}, got shape {x.shape}")
    return x


class Potential:
    """A twice differentiable convex function together with its certificates.

    Instances are immutable after construction and all evaluations are pure,
    so they are safe to share across threads.
    """

    def __init__(
        self,
        kind: str,
        dim: int,
        *,
        rho: Optional[float],
        n_dim: float,
        domain: str,
        value_fn: Callable[[np.ndarray], float],
        grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        hess_apply_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
        minimizer: Optional[np.ndarray] = None,
        matrix: Optional[np.ndarray] = None,
    ):
        if dim < 1:
            raise ValueError("dim must be a positive integer")
        self.kind = kind
        self.dim = int(dim)
        self.rho = None if rho is None else float(rho)
        self.n_dim = float(n_dim)
        self.domain = domain
        self.matrix = None if matrix is None else np.array(matrix, dtype=float)
        self._value_fn = value_fn
        self._grad_fn = grad_fn
        self._hess_apply_fn = hess_apply_fn
        self.minimizer = None if minimizer is None else np.array(minimizer, dtype=float)

    # -- constructors -------------------------------------------------------

    @classmethod
    def quadratic_isotropic(cls, dim: int = 1) -> "Potential":
        """F(x) = |x|^2 / 2, a (1, inf)-convex potential minimized at 0."""
        return cls(
            QUADRATIC_ISOTROPIC,
            dim,
            rho=1.0,
            n_dim=np.inf,
            domain=ALL_SPACE,
            value_fn=lambda x: 0.5 * float(np.dot(x, x)),
            grad_fn=lambda x: x.copy(),
            hess_apply_fn=lambda x, v: v.copy(),
            minimizer=np.zeros(dim),
        )

    @classmethod
    def quadratic_matrix(cls, matrix) -> "Potential":
        """F(x) = x . A x / 2 for symmetric A; rho is the smallest eigenvalue."""
        A = np.array(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(A).max())):
            raise ValueError("matrix must be symmetric")
        dim = A.shape[0]
        lam_min = float(np.linalg.eigvalsh(A)[0])
        minimizer = np.zeros(dim) if lam_min > 0 else None
        return cls(
            QUADRATIC_MATRIX,
            dim,
            rho=lam_min,
            n_dim=np.inf,
            domain=ALL_SPACE,
            value_fn=lambda x: 0.5 * float(x @ A @ x),
            grad_fn=lambda x: A @ x,
            hess_apply_fn=lambda x, v: A @ v,
            minimizer=minimizer,
            matrix=A,
        )

    @classmethod
    def neg_log(cls, dim: int = 1) -> "Potential":
        """F(x) = -sum(log x_i) on the positive orthant, (0, dim)-convex."""
        return cls(
            NEG_LOG,
            dim,
            rho=0.0,
            n_dim=float(dim),
            domain=POSITIVE_ORTHANT,
            value_fn=lambda x: float(-np.sum(np.log(x))),
            grad_fn=lambda x: -1.0 / x,
            hess_apply_fn=lambda x, v: v / (x * x),
        )

    @classmethod
    def custom(
        cls,
        dim: int,
        value_fn: Callable[[np.ndarray], float],
        grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        hess_apply_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
        *,
        rho: Optional[float] = None,
        n_dim: float = np.inf,
        domain: str = ALL_SPACE,
        minimizer=None,
    ) -> "Potential":
        """User-supplied potential; missing derivatives fall back to central
        differences (gradient step sqrt(eps)*(1+|x|), Hessian step
        cbrt(eps)*(1+|x|)).

        When ``rho`` is positive and no minimizer is given, the minimizer is
        located by descent until the gradient norm drops below 1e-10.
        """
        pot = cls(
            CUSTOM,
            dim,
            rho=rho,
            n_dim=n_dim,
            domain=domain,
            value_fn=value_fn,
            grad_fn=grad_fn,
            hess_apply_fn=hess_apply_fn,
            minimizer=minimizer,
        )
        if pot.minimizer is None and rho is not None and rho > 0:
            pot.minimizer = pot._locate_minimizer()
        return pot

    # -- domain --------------------------------------------------------------

    def in_domain(self, x: np.ndarray) -> bool:
        if not np.all(np.isfinite(x)):
            return False
        if self.domain == POSITIVE_ORTHANT:
            return bool(np.all(x > 0.0))
        return True

    def check_domain(self, x: np.ndarray) -> np.ndarray:
        x = as_point(x, self.dim)
        if not self.in_domain(x):
            raise DomainError(f"point {x} outside domain of {self.kind}")
        return x

    # -- pointwise evaluation --------------------------------------------------

    def value(self, x) -> float:
        x = self.check_domain(x)
        return float(self._value_fn(x))

    def grad(self, x) -> np.ndarray:
        x = self.check_domain(x)
        if self._grad_fn is not None:
            return np.asarray(self._grad_fn(x), dtype=float)
        return self._fd_grad(x)

    def hess_apply(self, x, v) -> np.ndarray:
        x = self.check_domain(x)
        v = as_point(v, self.dim)
        if not np.all(np.isfinite(v)):
            raise ValueError("direction must be finite")
        if self._hess_apply_fn is not None:
            return np.asarray(self._hess_apply_fn(x, v), dtype=float)
        return self._fd_hess_apply(x, v)

    def hess_grad(self, x) -> np.ndarray:
        """F''(x) F'(x), the force field of the Newton boundary-value problem."""
        if self.kind == QUADRATIC_ISOTROPIC:
            return self.check_domain(x).copy()
        if self.kind == QUADRATIC_MATRIX:
            x = self.check_domain(x)
            return self.matrix @ (self.matrix @ x)
        if self.kind == NEG_LOG:
            x = self.check_domain(x)
            return -1.0 / (x * x * x)
        return self.hess_apply(x, self.grad(x))

    # -- vectorized evaluation over a batch of points ---------------------------

    def value_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.kind == QUADRATIC_ISOTROPIC:
            return 0.5 * np.sum(X * X, axis=1)
        if self.kind == QUADRATIC_MATRIX:
            return 0.5 * np.sum((X @ self.matrix) * X, axis=1)
        if self.kind == NEG_LOG:
            return -np.sum(np.log(X), axis=1)
        return np.array([self.value(row) for row in X])

    def grad_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.kind == QUADRATIC_ISOTROPIC:
            return X.copy()
        if self.kind == QUADRATIC_MATRIX:
            return X @ self.matrix
        if self.kind == NEG_LOG:
            return -1.0 / X
        return np.array([self.grad(row) for row in X])

    def hess_grad_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.kind == QUADRATIC_ISOTROPIC:
            return X.copy()
        if self.kind == QUADRATIC_MATRIX:
            return (X @ self.matrix) @ self.matrix
        if self.kind == NEG_LOG:
            return -1.0 / (X * X * X)
        return np.array([self.hess_grad(row) for row in X])

    # -- convexity certificate ----------------------------------------------

    def convexity_defect(self, x, v) -> float:
        """v . (F''(x) - rho*Id - (1/n) F'(x) (x) F'(x)) v for a direction v.

        Nonnegative iff the (rho, n) certificate holds at x in direction v.
        With n_dim = inf the rank-one term is dropped.
        """
        if self.rho is None:
            raise ValueError("convexity_defect needs a resolved rho")
        x = self.check_domain(x)
        v = as_point(v, self.dim)
        quad = float(v @ self.hess_apply(x, v))
        out = quad - self.rho * float(v @ v)
        if np.isfinite(self.n_dim):
            out -= float(np.dot(self.grad(x), v)) ** 2 / self.n_dim
        return out

    # -- finite-difference fallbacks ------------------------------------------

    def _fd_grad(self, x: np.ndarray) -> np.ndarray:
        h = GRAD_STEP * (1.0 + float(np.linalg.norm(x)))
        g = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            g[i] = (self._value_fn(x + e) - self._value_fn(x - e)) / (2.0 * h)
        return g

    def _fd_hess_apply(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return np.zeros(self.dim)
        h = HESS_STEP * (1.0 + float(np.linalg.norm(x)))
        unit = v / nv
        return (self.grad(x + h * unit) - self.grad(x - h * unit)) * (nv / (2.0 * h))

    def _locate_minimizer(self) -> np.ndarray:
        x = np.zeros(self.dim)
        if not self.in_domain(x):
            x = np.ones(self.dim)
        f = self.value(x)
        step = 1.0 / max(self.rho, 1e-8)
        for _ in range(200000):
            g = self.grad(x)
            if float(np.max(np.abs(g))) < 1e-10:
                return x
            t = step
            for _ in range(60):
                cand = x - t * g
                if self.in_domain(cand):
                    fc = self.value(cand)
                    if fc <= f - 1e-4 * t * float(g @ g):
                        x, f = cand, fc
                        break
                t *= 0.5
            else:
                # no further progress possible at float precision
                if float(np.max(np.abs(g))) < 1e-8:
                    return x
                raise NoConvergence("minimizer search stalled")
        raise NoConvergence("minimizer search exceeded its iteration budget")

    def __repr__(self) -> str:  # pragma: no cover
        return f"Potential(kind={self.kind!r}, dim={self.dim}, rho={self.rho}, n_dim={self.n_dim})"


def potential_from_config(desc: dict) -> Potential:
    """Build a builtin potential from an experiment-config descriptor.

    Expected shape: {"kind": ..., "dim": d} with an extra "matrix" entry for
    the quadratic-matrix kind. Custom potentials cannot be described in JSON.
    """
    kind = desc.get("kind")
    if kind == QUADRATIC_ISOTROPIC:
        return Potential.quadratic_isotropic(int(desc.get("dim", 1)))
    if kind == QUADRATIC_MATRIX:
        if "matrix" not in desc:
            raise ValueError("quadratic_matrix potential needs a 'matrix' entry")
        return Potential.quadratic_matrix(desc["matrix"])
    if kind == NEG_LOG:
        return Potential.neg_log(int(desc.get("dim", 1)))
    raise ValueError(f"unknown potential kind {kind!r}")
