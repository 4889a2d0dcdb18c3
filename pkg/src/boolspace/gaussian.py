"""Shared Gaussian machinery: factorization, sampling, orthants, quadrature.

Randomness policy: every stream in the package is a numpy ``Generator`` over
the PCG64 bit generator, seeded through ``SeedSequence``.  Sub-streams are
derived from (master seed, stream tags...) via `make_generator`, so worker
partitioning never changes results.  Normal variates use numpy's ziggurat
``standard_normal``; both algorithm choices are fixed per release.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, roots_legendre

__all__ = [
    "FactorPolicy",
    "CholeskyFactor",
    "factor_psd",
    "make_generator",
    "sample_gaussian",
    "bivariate_orthant",
    "sign_activation",
    "relu_activation",
    "gauss_hermite_expectation_2d",
    "AntiDiagonalMatrix",
    "AntiDiagResult",
    "anti_diag_identities",
]

# Relative eigenvalue floor below which a matrix is rejected as not PSD.
PSD_REJECT = -1e-6


class NotPositiveSemidefinite(ValueError):
    pass


@dataclass(frozen=True)
class FactorPolicy:
    """How `factor_psd` treats borderline matrices.

    ``jitter`` is added to the diagonal before factorization; ``clip`` allows
    tiny negative eigenvalues (within the rejection floor) to be clipped to
    zero instead of failing.
    """

    jitter: float = 0.0
    clip: bool = True


@dataclass(frozen=True)
class CholeskyFactor:
    """A square root L of a covariance, with L @ L.T reconstructing it.

    ``matrix`` is lower-triangular when the input was strictly positive
    definite; for semidefinite inputs it is the eigenvalue square root and
    ``rank`` drops below the dimension.
    """

    matrix: np.ndarray
    rank: int
    jitter: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def factor_psd(cov, policy: FactorPolicy = FactorPolicy()) -> CholeskyFactor:
    """Factor a symmetric PSD matrix, exactly when possible.

    Strictly positive definite input takes the plain Cholesky route.  A
    semidefinite matrix falls back to an eigendecomposition square root with
    negatives clipped at zero (policy permitting).  Eigenvalues below
    -1e-6 times the largest are rejected as genuinely indefinite.
    """
    c = np.asarray(cov, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(c, c.T, atol=1e-10):
        raise ValueError("covariance must be symmetric")
    c = (c + c.T) / 2
    if policy.jitter:
        c = c + policy.jitter * np.eye(c.shape[0])
    try:
        lower = np.linalg.cholesky(c)
        return CholeskyFactor(matrix=lower, rank=c.shape[0], jitter=policy.jitter)
    except np.linalg.LinAlgError:
        pass
    eigvals, eigvecs = np.linalg.eigh(c)
    scale = max(eigvals.max(), 0.0)
    if eigvals.min() < PSD_REJECT * max(scale, 1e-300):
        raise NotPositiveSemidefinite(
            f"matrix is not PSD: min eigenvalue {eigvals.min():.3e} "
            f"against scale {scale:.3e}"
        )
    if not policy.clip and eigvals.min() < 0:
        raise NotPositiveSemidefinite(
            "matrix is semidefinite within tolerance but clipping is disabled"
        )
    tol = 1e-12 * max(scale, 1e-300)
    clipped = np.clip(eigvals, 0.0, None)
    root = eigvecs * np.sqrt(clipped)
    return CholeskyFactor(
        matrix=root, rank=int((clipped > tol).sum()), jitter=policy.jitter
    )


def _stream_tag(tag) -> int:
    if isinstance(tag, str):
        # stable across processes and platforms, unlike built-in hash()
        return int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "big")
    return int(tag)


def make_generator(seed, *stream) -> np.random.Generator:
    """Deterministic PCG64 generator for (seed, stream tags...).

    The tags (ints, or strings hashed stably) extend the SeedSequence
    entropy, so distinct tag tuples give statistically independent streams
    and the mapping is reproducible across platforms and process/thread
    layouts.
    """
    entropy = [int(seed)] + [_stream_tag(t) for t in stream]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def sample_gaussian(factor: CholeskyFactor, count: int, seed) -> np.ndarray:
    """Draw ``count`` centered Gaussian vectors with covariance L @ L.T."""
    if count < 0:
        raise ValueError("sample count must be nonnegative")
    gen = seed if isinstance(seed, np.random.Generator) else make_generator(seed)
    z = gen.standard_normal((count, factor.dim))
    return z @ factor.matrix.T


def bivariate_orthant(rho: float) -> float:
    """P(h1 > 0, h2 > 0) for standard bivariate normals with correlation rho."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    return 0.25 + np.arcsin(rho) / (2 * np.pi)


def _tag_split(kind):
    def wrap(f):
        f.split_at_zero = kind
        return f

    return wrap


@_tag_split("sign")
def sign_activation(h):
    """Sign with ties broken to +1."""
    h = np.asarray(h)
    return np.where(h < 0, -1.0, 1.0)


@_tag_split("relu")
def relu_activation(h):
    h = np.asarray(h)
    return np.maximum(h, 0.0)


_SQRT2PI = np.sqrt(2 * np.pi)
_HALF_LINE_CUTOFF = 10.0  # residual Gaussian mass beyond is ~2e-23


def _half_line_nodes(order: int, break_at: float):
    """Gauss-Legendre nodes on [0, cutoff], split at a boundary-layer scale."""
    x, w = roots_legendre(order)
    panels = []
    edges = [0.0, min(break_at, _HALF_LINE_CUTOFF), _HALF_LINE_CUTOFF]
    if edges[1] <= edges[0] or edges[1] >= edges[2]:
        edges = [0.0, _HALF_LINE_CUTOFF]
    for a, b in zip(edges[:-1], edges[1:]):
        half = (b - a) / 2
        panels.append((a + half * (x + 1.0), half * w))
    z = np.concatenate([p[0] for p in panels])
    wz = np.concatenate([p[1] for p in panels])
    return z, wz


def _corr_of(cov):
    c = np.asarray(cov, dtype=float)
    if c.shape != (2, 2):
        raise ValueError("need a 2x2 covariance")
    s1, s2 = np.sqrt(c[0, 0]), np.sqrt(c[1, 1])
    if s1 <= 0 or s2 <= 0:
        raise ValueError("covariance diagonal must be positive")
    rho = c[0, 1] / (s1 * s2)
    if abs(rho) > 1 + 1e-12:
        raise ValueError("invalid covariance: |correlation| > 1")
    return s1, s2, float(np.clip(rho, -1.0, 1.0))


def _sign_expectation(cov, order: int) -> float:
    # E[sgn(h1) sgn(h2)] = 4 P(h1>0, h2>0) - 1, with the orthant probability
    # integrated as int_0^inf phi(z) Phi(a z) dz; no arcsine involved.
    _, _, rho = _corr_of(cov)
    if abs(rho) >= 1 - 1e-14:
        return 1.0 if rho > 0 else -1.0
    a = rho / np.sqrt(1 - rho * rho)
    z, wz = _half_line_nodes(order, break_at=3.0 / max(1.0, abs(a)))
    phi = np.exp(-z * z / 2) / _SQRT2PI
    p_plus_plus = float(np.sum(wz * phi * ndtr(a * z)))
    return 4 * p_plus_plus - 1


def _relu_expectation(cov, order: int) -> float:
    # Condition on h1 = s1 z > 0; the inner E[relu(h2) | z] is the truncated
    # normal mean, leaving one smooth half-line integral.
    s1, s2, rho = _corr_of(cov)
    sd = s2 * np.sqrt(max(0.0, 1 - rho * rho))
    a = abs(rho) / max(np.sqrt(max(0.0, 1 - rho * rho)), 1e-300)
    z, wz = _half_line_nodes(order, break_at=3.0 / max(1.0, a))
    phi = np.exp(-z * z / 2) / _SQRT2PI
    mu = s2 * rho * z
    if sd < 1e-14 * s2:
        inner = np.maximum(mu, 0.0)
    else:
        t = mu / sd
        inner = mu * ndtr(t) + sd * np.exp(-t * t / 2) / _SQRT2PI
    return float(np.sum(wz * phi * (s1 * z) * inner))


def gauss_hermite_expectation_2d(f, cov, order: int = 120) -> float:
    """Quadrature oracle for E[f(h1) f(h2)] under a 2x2 Gaussian.

    Smooth integrands go through a Cholesky change of variables and a
    tensor-product Hermite rule.  The package's piecewise activations (tagged
    with ``split_at_zero``) instead take an analytic subdivision at the kink:
    the integral is reduced to the positive half-line with the inner
    conditional expectation in closed form, which plain Hermite quadrature
    cannot push below ~1e-3 accuracy.
    """
    if order < 20:
        raise ValueError("quadrature order must be at least 20")
    kind = getattr(f, "split_at_zero", None)
    if kind == "sign":
        return _sign_expectation(cov, order)
    if kind == "relu":
        return _relu_expectation(cov, order)
    s1, s2, rho = _corr_of(cov)
    x, w = np.polynomial.hermite.hermgauss(min(order, 180))
    if abs(rho) >= 1 - 1e-14:
        h = np.sqrt(2.0) * x
        vals = f(s1 * h) * f(np.sign(rho) * s2 * h)
        return float(np.sum(w * vals) / np.sqrt(np.pi))
    c = np.asarray(cov, dtype=float)
    lower = np.linalg.cholesky((c + c.T) / 2)
    h1 = np.sqrt(2.0) * lower[0, 0] * x[:, None]
    h2 = np.sqrt(2.0) * (lower[1, 0] * x[:, None] + lower[1, 1] * x[None, :])
    vals = f(h1) * f(h2)
    return float(np.sum(np.outer(w, w) * vals) / np.pi)


@dataclass(frozen=True)
class AntiDiagonalMatrix:
    """I plus kappa times the anti-diagonal exchange matrix, size M x M."""

    size: int
    coupling: float

    def __post_init__(self):
        if self.size < 2 or self.size % 2:
            raise ValueError("size must be even and at least 2")

    def dense(self) -> np.ndarray:
        a = np.eye(self.size)
        a += self.coupling * np.fliplr(np.eye(self.size))
        return a


@dataclass(frozen=True)
class AntiDiagResult:
    determinant: float
    inverse: np.ndarray | None
    eigenvalues: np.ndarray  # sorted ascending, multiplicity included


def anti_diag_identities(
    matrix: AntiDiagonalMatrix, want_inverse: bool = True
) -> AntiDiagResult:
    """Closed-form determinant, inverse and spectrum of I + kappa * J_flip.

    det = (1 - kappa^2)^(M/2); the inverse is the same shape with coupling
    -kappa, scaled by 1/(1 - kappa^2); eigenvalues are 1 +- kappa, each half
    the dimension.  Requesting the inverse at |kappa| = 1 raises, since the
    matrix is singular there.
    """
    m, kappa = matrix.size, matrix.coupling
    det = float((1 - kappa ** 2) ** (m // 2))
    eigenvalues = np.sort(np.r_[np.full(m // 2, 1 - kappa), np.full(m // 2, 1 + kappa)])
    inverse = None
    if want_inverse:
        if abs(abs(kappa) - 1.0) < 1e-15:
            raise np.linalg.LinAlgError(
                f"anti-diagonal matrix singular at coupling {kappa}"
            )
        inverse = AntiDiagonalMatrix(m, -kappa).dense() / (1 - kappa ** 2)
    return AntiDiagResult(determinant=det, inverse=inverse, eigenvalues=eigenvalues)
