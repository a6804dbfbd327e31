"""Discrete steady-wave system and Newton iteration.

The unknowns are the N nodal values of w plus the wave-speed parameter mu.
The nonlinear residual couples the depth-parametrized multiplier operators
with exactly dealiased quadratic products; the closing row prescribes the
signed value of w at a frozen node (the amplitude constraint).  Jacobians
are assembled densely, either analytically (including the chain-rule terms
through the conformal-radius functional) or by central differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    CosineGrid,
    DomainError,
    SpectralField,
    as_depth,
    dlambda_dr,
    dmu_dr,
    inverse_transform_matrix,
    lambda_symbol,
    mu_symbol_total,
    transform_matrix,
)

__all__ = [
    "NewtonConfig",
    "ConstraintSpec",
    "ProjectionConstraint",
    "SolutionPoint",
    "SolveFailure",
    "NewtonDiverged",
    "NewtonMaxIter",
    "SingularJacobian",
    "InadmissibleIterate",
    "DiscreteSystem",
    "residual_modified",
    "residual_fixed_r",
    "assemble_jacobian",
    "newton_solve",
    "get_system",
]


class SolveFailure(RuntimeError):
    """Base class for structured Newton failures."""


class NewtonDiverged(SolveFailure):
    pass


class NewtonMaxIter(SolveFailure):
    pass


class SingularJacobian(SolveFailure):
    pass


class InadmissibleIterate(SolveFailure):
    """The iterate left the operator domain (mean too negative) and damping failed."""


@dataclass
class NewtonConfig:
    residual_tol: float = 1e-10
    max_iter: int = 50
    jacobian_mode: str = "analytic"  # or "finite-difference"
    fd_step: float = 1e-7

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.jacobian_mode not in ("analytic", "finite-difference"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


@dataclass
class ConstraintSpec:
    """Frozen amplitude constraint sign * w[node_index] = target_amplitude."""

    node_index: int
    sign: int
    target_amplitude: float

    def value(self, x: np.ndarray) -> float:
        return self.sign * x[self.node_index] - self.target_amplitude

    def row(self, x: np.ndarray) -> np.ndarray:
        r = np.zeros(x.size)
        r[self.node_index] = self.sign
        return r


@dataclass
class ProjectionConstraint:
    """Linear closing row vector . w = target (nodal space).

    Used transiently while stepping off a symmetric branch along a null
    vector; the amplitude constraint takes over once the new branch is
    established.
    """

    vector: np.ndarray
    target: float

    def value(self, x: np.ndarray) -> float:
        return float(self.vector @ x) - self.target

    def row(self, x: np.ndarray) -> np.ndarray:
        return self.vector


@dataclass
class SolutionPoint:
    """A converged (mu, w) pair with derived diagnostics."""

    mu: float
    w: SpectralField
    h: float
    r: float
    sup_norm: float
    mean: float
    residual_norm: float
    iterations: int = 0
    residual_history: list = field(default_factory=list, repr=False)

    @property
    def coeffs(self) -> np.ndarray:
        return self.w.coeffs

    @property
    def nodal(self) -> np.ndarray:
        return self.w.nodal

    @classmethod
    def from_solution(
        cls, w: SpectralField, mu: float, h: float,
        residual_norm: float = float("nan"), iterations: int = 0,
    ) -> "SolutionPoint":
        """Rebuild a point from stored (mu, w) data, recomputing diagnostics."""
        h = float(h)
        return cls(
            mu=float(mu), w=w, h=h, r=float(np.exp(-h - w.mean)),
            sup_norm=w.sup_norm, mean=w.mean,
            residual_norm=residual_norm, iterations=iterations,
        )


class DiscreteSystem:
    """Dense assembly of the collocation system at fixed N and depth h.

    Works on raw coefficient vectors; the public wrappers below convert
    from and to SpectralField values.  Instances cache the transform
    matrices and the refined product grid, so reuse one per (N, h).
    """

    # margin keeping exp(-h - mean) away from 1 during damped iterations
    MEAN_MARGIN = 1e-10

    def __init__(self, N: int, h: float):
        self.N = int(N)
        self.h = float(h)
        if self.h <= 0:
            raise ValueError("depth must be positive")
        self.grid = CosineGrid(self.N)
        self.S = inverse_transform_matrix(self.grid)  # coeffs -> nodal
        self.T = transform_matrix(self.grid)  # nodal -> coeffs
        fine = CosineGrid(2 * self.N)
        # evaluate N coefficients on the 2N grid / analyse 2N nodal down to N modes
        self.S2 = inverse_transform_matrix(fine)[:, : self.N]
        self.T2 = transform_matrix(fine)[: self.N, :]

    # -- products ----------------------------------------------------------

    def prod_coeffs(self, cu: np.ndarray, cv: np.ndarray) -> np.ndarray:
        """Dealiased coefficients of the pointwise product."""
        return self.T2 @ ((self.S2 @ cu) * (self.S2 @ cv))

    def prod_matrix(self, c: np.ndarray) -> np.ndarray:
        """Linear map u -> dealiased product with the field of coefficients c."""
        return (self.T2 * (self.S2 @ c)) @ self.S2

    # -- residuals ---------------------------------------------------------

    def _radius(self, mean: float) -> float:
        rho = np.exp(-self.h - mean)
        if rho >= 1.0 - self.MEAN_MARGIN:
            raise DomainError(
                f"operator undefined at this mean value: mean={mean} <= -h={-self.h}"
            )
        return rho

    def _sigma(self, g0: float) -> float:
        # the L-type symbol saturates for large radii; clamping the exponent
        # only guards wild transient iterates against overflow
        return float(np.exp(np.clip(-self.h - g0, -745.0, 46.0)))

    @staticmethod
    def _project_out_mean(c: np.ndarray) -> np.ndarray:
        out = c.copy()
        out[0] = 0.0
        return out

    def residual(self, c: np.ndarray, mu: float) -> np.ndarray:
        """Depth-parametrized residual in coefficient space."""
        rho = self._radius(c[0])
        lam = lambda_symbol(rho, self.N)
        muh = mu_symbol_total(rho, self.N)
        g = -self.prod_coeffs(c, lam * c)  # coefficients of -w * (J w)
        sigma = self._sigma(g[0])
        mus = mu_symbol_total(sigma, self.N)
        w2 = self.prod_coeffs(c, c)
        return (
            muh * c
            - mu * self._project_out_mean(c)
            - mus * g
            + 0.5 * self._project_out_mean(w2)
        )

    def residual_fixed_r(self, c: np.ndarray, mu: float, r: float) -> np.ndarray:
        """Fixed-radius residual in coefficient space."""
        lam = lambda_symbol(r, self.N)
        mur = mu_symbol_total(r, self.N)
        w2 = self.prod_coeffs(c, c)
        wJw = self.prod_coeffs(c, lam * c)
        return (
            mur * c
            + mur * wJw
            + 0.5 * self._project_out_mean(w2)
            - mu * self._project_out_mean(c)
        )

    # -- Jacobian ----------------------------------------------------------

    def jacobian(self, c: np.ndarray, mu: float):
        """Analytic d(residual)/dc and d(residual)/dmu in coefficient space."""
        N = self.N
        rho = self._radius(c[0])
        lam = lambda_symbol(rho, N)
        muh = mu_symbol_total(rho, N)
        dlam = dlambda_dr(rho, N)
        dmuh = dmu_dr(rho, N)

        Jw = lam * c
        Pw = self.prod_matrix(c)
        PJw = self.prod_matrix(Jw)
        g = -(Pw @ Jw)
        sigma = self._sigma(g[0])
        mus = mu_symbol_total(sigma, N)
        dmus = dmu_dr(sigma, N)

        # d(J w)/dc: diagonal symbol plus rank-one correction through rho
        dJw = np.diag(lam)
        dJw[:, 0] += -rho * dlam * c
        dg = -(PJw + Pw @ dJw)

        A = np.diag(muh)
        A[:, 0] += -rho * dmuh * c
        Qm = np.eye(N)
        Qm[0, 0] = 0.0
        A -= mu * Qm
        # middle term -mus(sigma(c)) * g(c)
        A -= mus[:, None] * dg
        A -= np.outer(dmus * g, -sigma * dg[0, :])
        A += Qm @ Pw

        dF_dmu = -self._project_out_mean(c)
        return A, dF_dmu

    # -- stacked system (nodal unknowns + mu) ------------------------------

    def stacked_residual(self, x: np.ndarray, mu: float, constraint) -> np.ndarray:
        Fc = self.residual(self.T @ x, mu)
        return np.concatenate([self.S @ Fc, [constraint.value(x)]])

    def stacked_jacobian(
        self,
        x: np.ndarray,
        mu: float,
        constraint,
        cfg: NewtonConfig,
    ) -> np.ndarray:
        N = self.N
        J = np.zeros((N + 1, N + 1))
        if cfg.jacobian_mode == "analytic":
            A, dmu = self.jacobian(self.T @ x, mu)
            J[:N, :N] = self.S @ A @ self.T
            J[:N, N] = self.S @ dmu
        else:
            step = cfg.fd_step
            for i in range(N + 1):
                xp, xm = x.copy(), x.copy()
                mup = mum = mu
                if i < N:
                    xp[i] += step
                    xm[i] -= step
                else:
                    mup, mum = mu + step, mu - step
                rp = self.S @ self.residual(self.T @ xp, mup)
                rm = self.S @ self.residual(self.T @ xm, mum)
                J[:N, i] = (rp - rm) / (2.0 * step)
        J[N, :N] = constraint.row(x)
        return J


_SYSTEM_CACHE: dict[tuple[int, float], DiscreteSystem] = {}


def get_system(N: int, h: float) -> DiscreteSystem:
    key = (int(N), float(h))
    if key not in _SYSTEM_CACHE:
        _SYSTEM_CACHE[key] = DiscreteSystem(*key)
    return _SYSTEM_CACHE[key]


def residual_modified(w: SpectralField, mu: float, depth) -> SpectralField:
    """Residual of the depth-parametrized equation at (w, mu)."""
    sys = get_system(w.grid.N, as_depth(depth).h)
    return SpectralField(w.grid, coeffs=sys.residual(w.coeffs, mu))


def residual_fixed_r(w: SpectralField, mu: float, r: float) -> SpectralField:
    """Residual of the fixed-radius equation at (w, mu)."""
    if not 0.0 < r < 1.0:
        raise DomainError(f"conformal radius must lie in (0, 1), got {r}")
    # depth value is irrelevant here; reuse a cached system keyed on 1.0
    sys = get_system(w.grid.N, 1.0)
    return SpectralField(w.grid, coeffs=sys.residual_fixed_r(w.coeffs, mu, r))


def assemble_jacobian(
    w: SpectralField,
    mu: float,
    depth,
    constraint: ConstraintSpec,
    cfg: NewtonConfig | None = None,
) -> np.ndarray:
    """(N+1) x (N+1) Jacobian of the stacked system at (w, mu)."""
    cfg = cfg or NewtonConfig()
    sys = get_system(w.grid.N, as_depth(depth).h)
    return sys.stacked_jacobian(w.nodal, mu, constraint, cfg)


def _make_point(sys: DiscreteSystem, x, mu, res_norm, iters, history) -> SolutionPoint:
    w = SpectralField(sys.grid, nodal=x.copy())
    return SolutionPoint(
        mu=float(mu),
        w=w,
        h=sys.h,
        r=float(np.exp(-sys.h - w.mean)),
        sup_norm=w.sup_norm,
        mean=w.mean,
        residual_norm=float(res_norm),
        iterations=iters,
        residual_history=list(history),
    )


def newton_solve(
    initial_w: SpectralField,
    initial_mu: float,
    depth,
    constraint: ConstraintSpec,
    cfg: NewtonConfig | None = None,
    system: DiscreteSystem | None = None,
) -> SolutionPoint:
    """Newton iteration on the stacked system from the given predictor.

    Raises a SolveFailure subclass on divergence, iteration exhaustion,
    singular linear algebra, or an iterate leaving the operator domain.
    """
    cfg = cfg or NewtonConfig()
    sys = system or get_system(initial_w.grid.N, as_depth(depth).h)
    x = initial_w.nodal.copy()
    mu = float(initial_mu)

    if x[0] != x[0]:  # NaN guard on the seed
        raise NewtonDiverged("seed contains NaN")

    def res(x, mu):
        return sys.stacked_residual(x, mu, constraint)

    R = res(x, mu)
    norm = np.max(np.abs(R))
    history = [norm]
    norm0 = max(norm, 1.0)

    for it in range(cfg.max_iter):
        if norm <= cfg.residual_tol:
            return _make_point(sys, x, mu, norm, it, history)
        J = sys.stacked_jacobian(x, mu, constraint, cfg)
        try:
            step = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("non-finite Newton step")

        # damp the step if the iterate leaves the operator domain or the
        # residual cannot be evaluated
        scale = 1.0
        for _ in range(9):
            x_new = x + scale * step[:-1]
            mu_new = mu + scale * step[-1]
            mean_new = (sys.T @ x_new)[0]
            if mean_new > -sys.h + sys.MEAN_MARGIN:
                break
            scale *= 0.5
        else:
            raise InadmissibleIterate(
                f"iterate mean {mean_new} stayed below -h after damping"
            )
        x, mu = x_new, mu_new
        R = res(x, mu)
        norm = np.max(np.abs(R))
        history.append(norm)
        if not np.isfinite(norm) or norm > 1e8 * norm0:
            raise NewtonDiverged(f"residual norm {norm} after {it + 1} iterations")

    if norm <= cfg.residual_tol:
        return _make_point(sys, x, mu, norm, cfg.max_iter, history)
    raise NewtonMaxIter(
        f"no convergence in {cfg.max_iter} iterations (residual {norm:.3e})"
    )
