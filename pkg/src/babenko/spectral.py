"""Cosine-collocation spectral core.

Even 2*pi-periodic functions are represented on (0, pi) either by their
values at the shifted collocation nodes x_n = pi*(2n-1)/(2N) or by the
coefficients of cos(k*t), k = 0..N-1.  The two representations are linked
by type-II/III discrete cosine transforms.  On top of the transforms this
module provides the diagonal Fourier-multiplier operators of the
finite-depth wave problem and their depth-parametrized (nonlinear)
variants, plus an exactly dealiased pointwise product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

__all__ = [
    "DomainError",
    "CosineGrid",
    "SpectralField",
    "MultiplierSpec",
    "DepthParams",
    "R_MAX",
    "transform_forward",
    "transform_inverse",
    "transform_matrix",
    "inverse_transform_matrix",
    "project_mean",
    "lambda_symbol",
    "mu_symbol",
    "mu_symbol_total",
    "hilbert_symbol",
    "dlambda_dr",
    "dmu_dr",
    "lambda_seq",
    "mu_seq",
    "r_of_w",
    "apply_multiplier",
    "apply_Jh",
    "apply_Lh",
    "dealiased_product",
    "as_depth",
]

# Conformal radii this close to 1 correspond to vanishing depth; the
# J-type symbols blow up there and are outside validated scope.
R_MAX = 1.0 - 1e-12


class DomainError(ValueError):
    """An operator was evaluated outside its domain of definition."""


class CosineGrid:
    """Collocation grid with nodes x_n = pi*(2n-1)/(2N), n = 1..N."""

    __slots__ = ("N", "nodes")

    def __init__(self, N: int):
        if N < 1:
            raise ValueError(f"grid size must be positive, got {N}")
        self.N = int(N)
        self.nodes = np.pi * (2.0 * np.arange(1, self.N + 1) - 1.0) / (2.0 * self.N)

    def __eq__(self, other):
        return isinstance(other, CosineGrid) and other.N == self.N

    def __hash__(self):
        return hash(("CosineGrid", self.N))

    def __repr__(self):
        return f"CosineGrid(N={self.N})"


def transform_forward(nodal: np.ndarray, grid: CosineGrid) -> np.ndarray:
    """Nodal values -> cosine coefficients (exact interpolation in span{cos kt})."""
    nodal = np.asarray(nodal, dtype=float)
    if nodal.shape != (grid.N,):
        raise ValueError(f"expected {grid.N} nodal values, got shape {nodal.shape}")
    # DCT-II on this grid: y_k = 2 * sum_n f_n cos(k x_n)
    y = dct(nodal, type=2)
    c = y / grid.N
    c[0] *= 0.5
    return c


def transform_inverse(coeffs: np.ndarray, grid: CosineGrid) -> np.ndarray:
    """Cosine coefficients -> nodal values, f_n = sum_k c_k cos(k x_n)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (grid.N,):
        raise ValueError(f"expected {grid.N} coefficients, got shape {coeffs.shape}")
    a = 0.5 * coeffs
    a[0] = coeffs[0]
    return dct(a, type=3)


def transform_matrix(grid: CosineGrid) -> np.ndarray:
    """Dense nodal->coefficient matrix (row k is the analysis weight of mode k)."""
    k = np.arange(grid.N)
    T = (2.0 / grid.N) * np.cos(np.outer(k, grid.nodes))
    T[0, :] *= 0.5
    return T


def inverse_transform_matrix(grid: CosineGrid) -> np.ndarray:
    """Dense coefficient->nodal matrix, S[n, k] = cos(k x_n)."""
    k = np.arange(grid.N)
    return np.cos(np.outer(grid.nodes, k))


class SpectralField:
    """An even periodic function held in nodal and/or coefficient form.

    Instances are value-like: treat them as immutable after construction.
    Each representation is computed lazily from the other on first access.
    """

    __slots__ = ("grid", "_coeffs", "_nodal")

    def __init__(self, grid: CosineGrid, coeffs=None, nodal=None):
        if coeffs is None and nodal is None:
            raise ValueError("need coefficients or nodal values")
        self.grid = grid
        self._coeffs = None if coeffs is None else np.asarray(coeffs, dtype=float)
        self._nodal = None if nodal is None else np.asarray(nodal, dtype=float)
        for arr in (self._coeffs, self._nodal):
            if arr is not None and arr.shape != (grid.N,):
                raise ValueError(
                    f"expected length {grid.N}, got shape {arr.shape}"
                )

    @classmethod
    def from_coeffs(cls, coeffs, grid: CosineGrid | None = None) -> "SpectralField":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(grid or CosineGrid(coeffs.size), coeffs=coeffs)

    @classmethod
    def from_nodal(cls, nodal, grid: CosineGrid | None = None) -> "SpectralField":
        nodal = np.asarray(nodal, dtype=float)
        return cls(grid or CosineGrid(nodal.size), nodal=nodal)

    @classmethod
    def zeros(cls, grid: CosineGrid) -> "SpectralField":
        return cls(grid, coeffs=np.zeros(grid.N))

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = transform_forward(self._nodal, self.grid)
        return self._coeffs

    @property
    def nodal(self) -> np.ndarray:
        if self._nodal is None:
            self._nodal = transform_inverse(self._coeffs, self.grid)
        return self._nodal

    @property
    def mean(self) -> float:
        """Projection onto the constant mode."""
        return float(self.coeffs[0])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.nodal)))

    def __repr__(self):
        return f"SpectralField(N={self.grid.N}, mean={self.mean:.3e})"


def project_mean(w: SpectralField) -> float:
    """Mean over a period of the reconstructed function (constant-mode coefficient)."""
    return w.mean


@dataclass(frozen=True)
class DepthParams:
    """Mean water depth in nondimensional (wavelength-scaled) units."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"depth must be positive, got {self.h}")


def as_depth(depth) -> DepthParams:
    return depth if isinstance(depth, DepthParams) else DepthParams(float(depth))


# ---------------------------------------------------------------------------
# Multiplier symbols.  With L = log r < 0 the sequences reduce to hyperbolic
# functions of n*L, which stay well conditioned for all n up to N ~ 1024:
#   lambda_n = n (1 + r^{2n}) / (1 - r^{2n}) = n / tanh(-n L)
#   mu_n     = 1 / lambda_n                  = tanh(-n L) / n
# ---------------------------------------------------------------------------


def _check_r(r: float) -> float:
    r = float(r)
    if not 0.0 < r < 1.0:
        raise DomainError(f"conformal radius must lie in (0, 1), got {r}")
    if r >= R_MAX:
        raise DomainError(f"conformal radius {r} too close to 1 (vanishing depth)")
    return r


def lambda_symbol(r: float, N: int) -> np.ndarray:
    """Eigenvalues of the J-type operator: 0, then n(1+r^2n)/(1-r^2n)."""
    r = _check_r(r)
    n = np.arange(1, N)
    m = np.zeros(N)
    m[1:] = n / np.tanh(-n * np.log(r))
    return m


def mu_symbol(r: float, N: int) -> np.ndarray:
    """Eigenvalues of the L-type operator: 1, then (1-r^2n)/(n(1+r^2n))."""
    r = _check_r(r)
    return mu_symbol_total(r, N)


def mu_symbol_total(r: float, N: int) -> np.ndarray:
    """L-type symbol evaluated directly; finite for every r > 0."""
    if not r > 0:
        raise DomainError(f"conformal radius must be positive, got {r}")
    n = np.arange(1, N)
    m = np.empty(N)
    m[0] = 1.0
    m[1:] = -np.tanh(n * np.log(r)) / n
    return m


def hilbert_symbol(r: float, N: int) -> np.ndarray:
    """Symbol of the conjugation operator on cosine modes: (1+r^2n)/(1-r^2n)."""
    r = _check_r(r)
    n = np.arange(1, N)
    m = np.zeros(N)
    m[1:] = 1.0 / np.tanh(-n * np.log(r))
    return m


def dlambda_dr(r: float, N: int) -> np.ndarray:
    """d lambda_n / dr = n^2 / (r sinh^2(n log r)); entry 0 is zero."""
    r = _check_r(r)
    n = np.arange(1, N)
    m = np.zeros(N)
    with np.errstate(over="ignore"):
        s = np.sinh(n * np.log(r))
        m[1:] = n * n / (r * s * s)
    return m


def dmu_dr(r: float, N: int) -> np.ndarray:
    """d mu_n / dr = -1 / (r cosh^2(n log r)); entry 0 is zero."""
    if not r > 0:
        raise DomainError(f"conformal radius must be positive, got {r}")
    n = np.arange(1, N)
    m = np.zeros(N)
    with np.errstate(over="ignore"):
        c = np.cosh(n * np.log(r))
        m[1:] = -1.0 / (r * c * c)
    return m


@dataclass(frozen=True)
class MultiplierSpec:
    """Diagonal operator given by a scalar sequence over cosine modes."""

    symbol: np.ndarray
    family: str  # "J", "L" or "hilbert"
    r: float

    def __post_init__(self):
        object.__setattr__(self, "symbol", np.asarray(self.symbol, dtype=float))


def lambda_seq(r: float, N: int) -> MultiplierSpec:
    return MultiplierSpec(lambda_symbol(r, N), "J", float(r))


def mu_seq(r: float, N: int) -> MultiplierSpec:
    return MultiplierSpec(mu_symbol(r, N), "L", float(r))


def r_of_w(w: SpectralField, depth) -> float:
    """Conformal radius functional exp(-h - mean(w)).

    Total; callers needing a radius in (0, 1) must check the result.
    """
    return float(np.exp(-as_depth(depth).h - w.mean))


def apply_multiplier(spec: MultiplierSpec, u: SpectralField) -> SpectralField:
    if spec.symbol.size != u.grid.N:
        raise ValueError(
            f"symbol length {spec.symbol.size} does not match grid size {u.grid.N}"
        )
    return SpectralField(u.grid, coeffs=spec.symbol * u.coeffs)


def apply_Jh(w: SpectralField, depth) -> SpectralField:
    """Depth-parametrized J-type operator; needs mean(w) > -h."""
    depth = as_depth(depth)
    r = r_of_w(w, depth)
    if r >= R_MAX:
        raise DomainError(
            f"operator undefined at this mean value: mean(w)={w.mean} <= -h={-depth.h}"
        )
    return SpectralField(w.grid, coeffs=lambda_symbol(r, w.grid.N) * w.coeffs)


def apply_Lh(u: SpectralField, depth) -> SpectralField:
    """Depth-parametrized L-type operator; defined for every operand."""
    r = r_of_w(u, as_depth(depth))
    return SpectralField(u.grid, coeffs=mu_symbol_total(r, u.grid.N) * u.coeffs)


def _padded_nodal(coeffs: np.ndarray, M: int) -> np.ndarray:
    """Evaluate an N-mode cosine series on the M-node grid, M >= N."""
    cp = np.zeros(M)
    cp[: coeffs.size] = coeffs
    return transform_inverse(cp, CosineGrid(M))


def dealiased_product(u: SpectralField, v: SpectralField) -> SpectralField:
    """Cosine coefficients of the pointwise product u*v.

    Both factors are evaluated on a 2N-node grid, multiplied there and the
    result truncated back to N modes.  A product of two N-mode series has
    at most 2N-1 modes, so the retained coefficients are exact.
    """
    if u.grid.N != v.grid.N:
        raise ValueError(f"grid mismatch: {u.grid.N} vs {v.grid.N}")
    N = u.grid.N
    fine = CosineGrid(2 * N)
    prod = _padded_nodal(u.coeffs, 2 * N) * _padded_nodal(v.coeffs, 2 * N)
    return SpectralField(u.grid, coeffs=transform_forward(prod, fine)[:N])
