"""Distributions over Boolean functions and their information measures.

A network evaluated on every input pattern realizes one Boolean function per
draw of its parameters; this module represents the induced distribution over
packed truth tables, samples it from the wide-network Gaussian picture,
provides the known deep-limit laws, and measures entropy and divergences.

Probabilities are keyed by the packed table integer (core.BooleanFunction
encoding).  Entropies are in nats unless a caller converts.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import BooleanFunction, all_functions, is_odd_function, odd_functions
from .gaussian import bivariate_orthant, factor_psd, make_generator, sample_gaussian

__all__ = [
    "FunctionDistribution",
    "MonteCarlo",
    "ExactBivariate",
    "dnn_function_distribution",
    "LimitKind",
    "limit_distribution",
    "entropy",
    "entropy_curve",
    "kl_divergence",
    "tv_distance",
    "support_is_odd",
    "write_distribution_json",
    "write_entropy_curve_csv",
]

_MC_MAX_ARITY = 4  # bincount over 2^(2^n) codes
_MC_BLOCK = 250_000

_PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class FunctionDistribution:
    """Probabilities over packed truth tables for one arity.

    kind records how the numbers were produced ("exact" or "monte_carlo");
    Monte Carlo distributions carry their sample count and seed so results
    can be regenerated.
    """

    arity: int
    probs: dict[int, float]
    kind: str = "exact"
    samples: int | None = None
    seed: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        total = 0.0
        limit = 1 << (1 << self.arity) if self.arity <= 4 else None
        for bits, p in self.probs.items():
            if p < 0:
                raise ValueError(f"negative probability for table {bits:#x}")
            if limit is not None and not 0 <= bits < limit:
                raise ValueError(f"table {bits:#x} out of range for arity {self.arity}")
            total += p
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def prob(self, f: BooleanFunction | int) -> float:
        bits = f.bits if isinstance(f, BooleanFunction) else f
        return self.probs.get(bits, 0.0)

    def support(self) -> list[int]:
        return sorted(b for b, p in self.probs.items() if p > 0)

    def items_by_mass(self) -> list[tuple[int, float]]:
        return sorted(self.probs.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True)
class MonteCarlo:
    samples: int
    seed: int


@dataclass(frozen=True)
class ExactBivariate:
    pass


def _mc_distribution(cov: np.ndarray, method: MonteCarlo) -> FunctionDistribution:
    m = cov.shape[0]
    n = m.bit_length() - 1
    if (1 << n) != m or n > _MC_MAX_ARITY:
        raise ValueError(f"covariance must be 2^n x 2^n with n <= {_MC_MAX_ARITY}")
    factor = factor_psd(cov)
    rng = make_generator(method.seed, "function-space")
    weights = (1 << np.arange(m)).astype(np.int64)
    counts = np.zeros(1 << m, dtype=np.int64)
    remaining = method.samples
    while remaining > 0:
        block = min(remaining, _MC_BLOCK)
        h = sample_gaussian(factor, block, rng)
        codes = (h < 0) @ weights  # output spin sign(h), ties to +1 (bit 0)
        counts += np.bincount(codes, minlength=1 << m)
        remaining -= block
    probs = {
        int(bits): float(c / method.samples) for bits, c in enumerate(counts) if c > 0
    }
    return FunctionDistribution(
        arity=n,
        probs=probs,
        kind="monte_carlo",
        samples=method.samples,
        seed=method.seed,
    )


def _bivariate_distribution(cov: np.ndarray) -> FunctionDistribution:
    rho = cov[0, 1] / math.sqrt(cov[0, 0] * cov[1, 1])
    same = bivariate_orthant(rho)  # P(both preactivations positive)
    diff = bivariate_orthant(-rho)
    probs = {0b00: same, 0b11: same, 0b01: diff, 0b10: diff}
    return FunctionDistribution(arity=1, probs=probs, kind="exact")


def dnn_function_distribution(cov: np.ndarray, method) -> FunctionDistribution:
    """Distribution of the sign-readout function for a Gaussian preactivation.

    cov is the joint covariance of the readout preactivation across the 2^n
    input patterns.  ExactBivariate handles n = 1 through closed-form orthant
    masses; MonteCarlo draws correlated Gaussians in blocks and bin-counts the
    packed sign patterns (bit gamma set when the preactivation is negative,
    matching the True -> -1 convention with ties resolved to +1).
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if isinstance(method, ExactBivariate):
        if cov.shape[0] != 2:
            raise ValueError("exact route is restricted to single-input functions")
        return _bivariate_distribution(cov)
    if isinstance(method, MonteCarlo):
        if method.samples < 1:
            raise ValueError("need at least one sample")
        return _mc_distribution(cov, method)
    raise TypeError(f"unknown sampling method {method!r}")


class LimitKind(Enum):
    RELU_CONSTANT = "relu_constant"
    SIGN_ODD_UNIFORM = "sign_odd_uniform"
    SIGN_ALL_UNIFORM = "sign_all_uniform"


def limit_distribution(kind: LimitKind, n: int) -> FunctionDistribution:
    """Known deep-network limits of the function distribution.

    ReLU hidden layers collapse onto the two constants (equal mass); sign
    hidden layers with zero bias spread uniformly over the odd functions, and
    with a bias over every function.
    """
    if kind is LimitKind.RELU_CONSTANT:
        probs = {
            BooleanFunction.constant(n, 1).bits: 0.5,
            BooleanFunction.constant(n, -1).bits: 0.5,
        }
    elif kind is LimitKind.SIGN_ODD_UNIFORM:
        members = [f.bits for f in odd_functions(n)]
        probs = {bits: 1.0 / len(members) for bits in members}
    elif kind is LimitKind.SIGN_ALL_UNIFORM:
        count = 1 << (1 << n)
        probs = {f.bits: 1.0 / count for f in all_functions(n)}
    else:
        raise ValueError(f"unknown limit kind {kind!r}")
    return FunctionDistribution(arity=n, probs=probs, kind="exact")


def entropy(dist: FunctionDistribution, miller_madow: bool = False) -> float:
    """Shannon entropy in nats; optional Miller-Madow bias correction.

    The correction adds (K - 1) / (2 S) for K observed tables and S samples,
    so it applies only to Monte Carlo distributions.
    """
    h = -sum(p * math.log(p) for p in dist.probs.values() if p > 0)
    if miller_madow:
        if dist.samples is None:
            raise ValueError("Miller-Madow correction needs a sample count")
        k = sum(1 for p in dist.probs.values() if p > 0)
        h += (k - 1) / (2 * dist.samples)
    return h


def entropy_curve(
    spec,
    scheme,
    n: int,
    depths,
    samples: int,
    seed: int,
    miller_madow: bool = False,
) -> list[tuple[int, float, float, int, int]]:
    """Entropy of the depth-L function distribution for each L in depths.

    Every depth reuses the same seed, so the underlying Gaussian draws are
    common random numbers across depths: comparisons along the curve see the
    true depth dependence rather than independent sampling noise.  Rows are
    (L, entropy_nats, entropy_normalized, samples, seed) with the normalizer
    log of the number of functions, 2^n * log 2.
    """
    from .meanfield import covariance_at_layer

    bound = (1 << n) * math.log(2.0)
    rows = []
    for depth in depths:
        cov = covariance_at_layer(spec, scheme, n, depth)
        dist = dnn_function_distribution(cov, MonteCarlo(samples, seed))
        h = entropy(dist, miller_madow=miller_madow)
        rows.append((int(depth), h, h / bound, samples, seed))
    return rows


def _check_same_arity(p: FunctionDistribution, q: FunctionDistribution) -> None:
    if p.arity != q.arity:
        raise ValueError("distributions have different arities")


def kl_divergence(
    p: FunctionDistribution, q: FunctionDistribution, smoothing: float = 0.0
) -> float:
    """KL(p || q) in nats.

    A table with p-mass but no q-mass makes the divergence infinite; that is
    reported as an error unless a smoothing floor is requested, in which case
    q is mixed with the uniform distribution at weight smoothing * 2^(2^n).
    """
    _check_same_arity(p, q)
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    table_count = 1 << (1 << p.arity)
    total = 0.0
    for bits, pp in p.probs.items():
        if pp <= 0:
            continue
        qq = q.prob(bits)
        if smoothing > 0:
            qq = (qq + smoothing) / (1 + smoothing * table_count)
        if qq <= 0:
            raise ValueError(
                f"table {bits:#x} has mass {pp!r} under p but none under q; "
                "pass smoothing > 0 to regularize"
            )
        total += pp * math.log(pp / qq)
    return total


def tv_distance(p: FunctionDistribution, q: FunctionDistribution) -> float:
    """Total variation distance, half the L1 difference over all tables."""
    _check_same_arity(p, q)
    keys = set(p.probs) | set(q.probs)
    return 0.5 * sum(abs(p.prob(b) - q.prob(b)) for b in keys)


def support_is_odd(dist: FunctionDistribution, atol: float = 0.0) -> bool:
    """True when all mass above atol sits on odd functions."""
    return all(
        is_odd_function(BooleanFunction(dist.arity, bits))
        for bits, p in dist.probs.items()
        if p > atol
    )


def _atomic_write_text(path, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_distribution_json(path, dist: FunctionDistribution) -> None:
    """Serialize as {"n", "kind", "entries": [{"f": "0x..", "p": ...}]}."""
    entries = [
        {"f": f"{bits:#x}", "p": p} for bits, p in dist.items_by_mass() if p > 0
    ]
    payload = {"n": dist.arity, "kind": dist.kind, "entries": entries}
    _atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_distribution_json(path) -> FunctionDistribution:
    with open(path) as fh:
        payload = json.load(fh)
    probs = {int(e["f"], 16): float(e["p"]) for e in payload["entries"]}
    return FunctionDistribution(
        arity=int(payload["n"]), probs=probs, kind=str(payload["kind"])
    )


def write_entropy_curve_csv(path, rows, x_column: str = "L") -> None:
    """Emit (L, entropy_nats, entropy_normalized, samples, seed) rows.

    x_column lets bias-scan callers relabel the sweep variable (sigma_b) while
    keeping the measurement columns identical.
    """
    import csv

    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([x_column, "entropy_nats", "entropy_normalized", "samples", "seed"])
        for x, h, h_norm, samples, seed in rows:
            writer.writerow([x, repr(float(h)), repr(float(h_norm)), samples, seed])
    os.replace(tmp, path)
