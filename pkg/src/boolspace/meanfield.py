"""Wide-network layer recursions for pattern overlaps.

In the infinite-width limit the joint preactivation statistics of a random
layered network close on the matrix of pattern overlaps, which evolves layer
by layer under a scalar map determined by the activation.  This module
implements those maps in closed form (sign and ReLU), the layer-dependent and
cross-layer recursions, fixed-point analysis, and the covariance that feeds
the function-space sampling.

Overlaps here are correlation coefficients: the layer-0 matrix is normalized
to unit diagonal (see core.initial_overlap_matrix) and both activations are
positively homogeneous, so scale drops out of every recursion.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    InputScheme,
    initial_overlap_matrix,
    input_mean,
)
from .gaussian import relu_activation, sign_activation

__all__ = [
    "Activation",
    "KernelSpec",
    "kernel_map",
    "OverlapMatrix",
    "propagate_overlaps",
    "CrossLayerOverlaps",
    "propagate_cross_layer",
    "FixedPoint",
    "find_fixed_point",
    "covariance_at_layer",
    "overlap_value_spectrum",
    "fixed_point_scan",
    "write_overlap_trajectory_csv",
    "write_fixed_point_scan_csv",
]

_CROSS_LAYER_MAX_ARITY = 3


class Activation(Enum):
    SIGN = "sign"
    RELU = "relu"


@dataclass(frozen=True)
class KernelSpec:
    """Activation plus weight/bias scales (variances sigma_w^2, sigma_b^2).

    ReLU layers keep unit state variance only on the sigma_w^2 + sigma_b^2 = 2
    shell, so that combination is enforced; construct via `KernelSpec.relu`,
    which derives sigma_w from the requested bias scale.
    """

    activation: Activation
    sigma_w: float
    sigma_b: float = 0.0

    def __post_init__(self):
        if self.sigma_w <= 0 or self.sigma_b < 0:
            raise ValueError("need sigma_w > 0 and sigma_b >= 0")
        if self.activation is Activation.RELU:
            total = self.sigma_w ** 2 + self.sigma_b ** 2
            if abs(total - 2.0) > 1e-9:
                raise ValueError(
                    "ReLU layers require sigma_w^2 + sigma_b^2 = 2 "
                    f"(got {total:.6f}); use KernelSpec.relu(sigma_b)"
                )

    @staticmethod
    def sign(sigma_w: float = 1.0, sigma_b: float = 0.0) -> "KernelSpec":
        return KernelSpec(Activation.SIGN, sigma_w, sigma_b)

    @staticmethod
    def relu(sigma_b: float = 0.0) -> "KernelSpec":
        if not 0 <= sigma_b < math.sqrt(2):
            raise ValueError("ReLU bias scale must satisfy 0 <= sigma_b < sqrt(2)")
        return KernelSpec(Activation.RELU, math.sqrt(2.0 - sigma_b ** 2), sigma_b)

    @property
    def total_variance(self) -> float:
        return self.sigma_w ** 2 + self.sigma_b ** 2

    @property
    def activation_fn(self):
        return sign_activation if self.activation is Activation.SIGN else relu_activation

    def mean_activation(self) -> float:
        """E[activation(h)] for h ~ N(0, total preactivation variance)."""
        if self.activation is Activation.SIGN:
            return 0.0
        return math.sqrt(self.total_variance) / math.sqrt(2 * math.pi)


def kernel_map(spec: KernelSpec, q):
    """One-layer overlap update, elementwise over ``q``.

    Sign: q' = (2/pi) asin(rho) with rho the preactivation correlation
    (sigma_w^2 q + sigma_b^2) / (sigma_w^2 + sigma_b^2).  ReLU (on the
    variance-preserving shell): q' = (1/pi) [sqrt(1-u^2) + u (pi/2 + asin u)]
    with u = (sigma_w^2 q + sigma_b^2) / 2.

    Exactly-correlated entries map to exactly +-1: the arcsine fixed points at
    the boundary repel with infinite slope, so a single ulp of rounding there
    would otherwise grow to ~1e-5 within thirty layers and break the exact
    negation-pair structure.

    Raises ValueError when any |q| exceeds 1 by more than 1e-12; smaller
    excursions are rounding noise and are clipped.
    """
    q = np.asarray(q, dtype=float)
    worst = float(np.max(np.abs(q))) if q.size else 0.0
    if worst > 1.0 + 1e-12:
        raise ValueError(f"overlap out of range: |q| = {worst!r} exceeds 1")
    q = np.clip(q, -1.0, 1.0)
    sw2, sb2 = spec.sigma_w ** 2, spec.sigma_b ** 2
    if spec.activation is Activation.SIGN:
        rho = np.clip((sw2 * q + sb2) / (sw2 + sb2), -1.0, 1.0)
        out = (2 / np.pi) * np.arcsin(rho)
        out = np.where(rho == 1.0, 1.0, out)
        out = np.where(rho == -1.0, -1.0, out)
    else:
        u = np.clip((sw2 * q + sb2) / 2.0, -1.0, 1.0)
        out = (1 / np.pi) * (np.sqrt(1 - u * u) + u * (np.pi / 2 + np.arcsin(u)))
        out = np.where(u == 1.0, 1.0, out)
        out = np.where(u == -1.0, 0.0, out)
    out = np.clip(out, -1.0, 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class OverlapMatrix:
    arity: int
    layer: int
    values: np.ndarray  # (2^n, 2^n)

    def q(self, gamma: int, gamma_prime: int) -> float:
        return float(self.values[gamma - 1, gamma_prime - 1])


def propagate_overlaps(
    spec: KernelSpec, scheme: InputScheme, n: int, depth: int
) -> list[OverlapMatrix]:
    """Overlap matrices for layers 0 .. depth-1.

    Layer 0 comes from the input scheme; each later matrix applies the kernel
    entrywise with the diagonal pinned at 1.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    q = initial_overlap_matrix(scheme, n)
    out = [OverlapMatrix(n, 0, q)]
    for layer in range(1, depth):
        q = kernel_map(spec, q)
        np.fill_diagonal(q, 1.0)
        out.append(OverlapMatrix(n, layer, q))
    return out


@dataclass(frozen=True)
class CrossLayerOverlaps:
    """All overlaps q[l, l'] between states at two layers, per pattern pair.

    values[g, g', l, l'] holds the overlap between pattern gamma = g+1 at
    layer l and pattern g'+1 at layer l'; layers run 0..depth inclusive.
    """

    arity: int
    depth: int
    values: np.ndarray  # (M, M, depth+1, depth+1)

    def q(self, gamma: int, gamma_prime: int, layer: int, layer_prime: int) -> float:
        return float(self.values[gamma - 1, gamma_prime - 1, layer, layer_prime])

    def equal_layer_slice(self, layer: int) -> np.ndarray:
        return self.values[:, :, layer, layer]


def propagate_cross_layer(
    spec: KernelSpec, scheme: InputScheme, n: int, depth: int
) -> CrossLayerOverlaps:
    """Joint two-layer overlap recursion for a weight-shared network.

    The interior update reuses the scalar kernel on the shifted pair
    (l-1, l'-1) because equal-layer diagonals stay at 1.  The boundary row
    against layer 0 factorizes into (mean input) * E[activation(h)] with h a
    centered Gaussian at the full preactivation variance sigma_w^2 +
    sigma_b^2; with zero bias both conventions for that variance coincide,
    and that is the regime the equal-layer checks validate.  For the odd sign
    activation the boundary vanishes and every off-diagonal layer pair is
    exactly zero at sigma_b = 0.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if n > _CROSS_LAYER_MAX_ARITY:
        raise ValueError(f"cross-layer recursion capped at n <= {_CROSS_LAYER_MAX_ARITY}")
    m = 1 << n
    values = np.zeros((m, m, depth + 1, depth + 1))
    values[:, :, 0, 0] = initial_overlap_matrix(scheme, n)
    mean = input_mean(scheme, n)
    ephi = spec.mean_activation()
    for layer in range(1, depth + 1):
        values[:, :, layer, 0] = mean[None, :] * ephi
        values[:, :, 0, layer] = mean[:, None] * ephi
    for layer in range(1, depth + 1):
        for layer_prime in range(1, depth + 1):
            values[:, :, layer, layer_prime] = kernel_map(
                spec, values[:, :, layer - 1, layer_prime - 1]
            )
    return CrossLayerOverlaps(arity=n, depth=depth, values=values)


@dataclass(frozen=True)
class FixedPoint:
    value: float
    stable: bool
    derivative: float
    residual: float
    iterations: int


class FixedPointNotFound(RuntimeError):
    pass


def _map_derivative(spec: KernelSpec, q: float, step: float = 1e-6) -> float:
    lo, hi = q - step, q + step
    if hi > 1.0:
        lo, hi = q - step, q
    elif lo < -1.0:
        lo, hi = q, q + step
    return (float(kernel_map(spec, hi)) - float(kernel_map(spec, lo))) / (hi - lo)


def find_fixed_point(
    spec: KernelSpec,
    start: float = 0.0,
    max_iter: int = 10_000,
) -> FixedPoint:
    """Locate the overlap fixed point reached from ``start``.

    Runs the (monotone) fixed-point iteration, snaps to a boundary that is an
    exact fixed point when the iterate approaches it, and otherwise polishes
    the interior root of kernel(q) - q with bisection.  Stability is judged by
    a finite-difference map derivative (step 1e-6, one-sided at the
    boundaries).
    """
    g = lambda x: float(kernel_map(spec, x))
    q = float(start)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        q_next = g(q)
        if abs(q_next - q) < 1e-15:
            q = q_next
            break
        q = q_next
    for boundary in (1.0, -1.0):
        if abs(q - boundary) < 1e-3 and g(boundary) == boundary:
            q = boundary
            break
    else:
        residual = abs(g(q) - q)
        if residual > 1e-13:
            q = _polish_interior(g, q)
        residual = abs(g(q) - q)
        if residual > 1e-12:
            raise FixedPointNotFound(
                f"no fixed point within tolerance after {iterations} iterations "
                f"(residual {residual:.2e})"
            )
    derivative = _map_derivative(spec, q)
    return FixedPoint(
        value=q,
        stable=abs(derivative) < 1.0,
        derivative=derivative,
        residual=abs(g(q) - q),
        iterations=iterations,
    )


def _polish_interior(g, q0: float, width: float = 1e-6) -> float:
    r = lambda x: g(x) - x
    lo, hi = q0 - width, q0 + width
    for _ in range(60):
        lo = max(lo, -1.0)
        hi = min(hi, 1.0)
        if r(lo) * r(hi) <= 0:
            break
        lo, hi = q0 - (q0 - lo) * 4, q0 + (hi - q0) * 4
    else:
        return q0
    for _ in range(200):
        mid = (lo + hi) / 2
        if r(lo) * r(mid) <= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 5e-17:
            break
    return (lo + hi) / 2


def covariance_at_layer(
    spec: KernelSpec, scheme: InputScheme, n: int, depth: int
) -> np.ndarray:
    """Preactivation covariance feeding the sign readout at ``depth``.

    c = sigma_w^2 * q^(depth-1) + sigma_b^2 * (all-ones); the diagonal is the
    total preactivation variance.
    """
    overlaps = propagate_overlaps(spec, scheme, n, depth)
    q_last = overlaps[-1].values
    return spec.sigma_w ** 2 * q_last + spec.sigma_b ** 2 * np.ones_like(q_last)


def overlap_value_spectrum(
    spec: KernelSpec, scheme: InputScheme, n: int, depth: int
) -> dict[float, float]:
    """Distinct overlap values at layer depth-1 with their frequencies.

    Raw inputs only: there the layer-0 overlap depends on the pattern pair
    through the Hamming distance d alone, q0 = 1 - 2 d / n, and a row of the
    overlap matrix holds binom(n, d) / 2^n entries at that distance.
    """
    if scheme.kind.value != "raw":
        raise ValueError("overlap value spectrum is defined for the Raw scheme")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    spectrum: dict[float, float] = {}
    denom = float(1 << n)
    for d in range(n + 1):
        q = 1.0 - 2.0 * d / n
        for _ in range(depth - 1):
            q = float(kernel_map(spec, q))
        freq = math.comb(n, d) / denom
        spectrum[q] = spectrum.get(q, 0.0) + freq
    return spectrum


def fixed_point_scan(
    activation: Activation, sigma_bs, sigma_w: float = 1.0
) -> list[tuple[float, float, bool]]:
    """Fixed point per bias scale; rows (sigma_b, q_star, stable)."""
    rows = []
    for sb in sigma_bs:
        if activation is Activation.SIGN:
            spec = KernelSpec.sign(sigma_w=sigma_w, sigma_b=sb)
        else:
            spec = KernelSpec.relu(sigma_b=sb)
        fp = find_fixed_point(spec)
        rows.append((float(sb), fp.value, fp.stable))
    return rows


def write_overlap_trajectory_csv(path, matrices: list[OverlapMatrix]) -> None:
    """Emit (layer, gamma, gamma_prime, q) rows for pattern pairs gamma <= gamma'."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layer", "gamma", "gamma_prime", "q"])
        for mat in matrices:
            m = 1 << mat.arity
            for g in range(1, m + 1):
                for gp in range(g, m + 1):
                    writer.writerow([mat.layer, g, gp, repr(mat.q(g, gp))])


def write_fixed_point_scan_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sigma_b", "q_star", "stable"])
        for sigma_b, q_star, stable in rows:
            writer.writerow([sigma_b, repr(q_star), int(stable)])
