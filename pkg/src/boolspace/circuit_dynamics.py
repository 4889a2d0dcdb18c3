"""Layerwise dynamics of the function content of random Boolean circuits.

Wide random circuits admit a mean-field description in which each layer is a
"gas" of node functions: a distribution over packed truth tables that evolves
by drawing gate inputs independently from the previous layer's distribution.
This module evolves that distribution exactly (with optional quenched node
negations and an annealed output-flip channel), by pool sampling, and through
the closed per-pattern magnetization map that governs convergence.

Supports stay on packed tables for arities small enough to enumerate
(2^(2^n) states), which covers every regime the recursions are used in.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import BooleanFunction, Gate, InputScheme, scheme_component_functions
from .function_space import FunctionDistribution
from .gaussian import make_generator

__all__ = [
    "initial_function_distribution",
    "evolve_exact",
    "evolve_noisy",
    "evolve_sampled",
    "magnetization_map",
    "magnetization_trajectory",
    "ConvergenceKind",
    "ConvergenceReport",
    "classify_convergence",
    "write_distribution_trajectory_csv",
    "write_magnetization_csv",
]

_TUPLE_BUDGET = 100_000_000
_TUPLE_CHUNK = 2_000_000


def initial_function_distribution(scheme: InputScheme, n: int) -> FunctionDistribution:
    """Layer-0 node distribution: uniform over the scheme's component functions.

    Components that coincide as functions pool their mass, so the Balanced
    scheme on two inputs yields six distinct tables (four literals, two
    constants) at weight 1/6 each.
    """
    comps = scheme_component_functions(scheme, n)
    probs: dict[int, float] = {}
    w = 1.0 / len(comps)
    for f in comps:
        probs[f.bits] = probs.get(f.bits, 0.0) + w
    return FunctionDistribution(arity=n, probs=probs, kind="exact")


def _compose_packed(gate: Gate, parts: list[np.ndarray], full_mask: int) -> np.ndarray:
    """Gate applied bit-parallel to packed truth tables.

    Each set bit of the gate table contributes the AND of its selected
    literal masks; combination bit k-j selects input j direct vs complemented,
    matching Gate.combination_spins.
    """
    k = gate.fan_in
    out = np.zeros_like(parts[0])
    for c in range(1 << k):
        if not (gate.table >> c) & 1:
            continue
        m = np.full_like(parts[0], full_mask)
        for j in range(1, k + 1):
            xj = parts[j - 1]
            m &= xj if (c >> (k - j)) & 1 else (xj ^ full_mask)
        out |= m
    return out


def _as_arrays(dist: FunctionDistribution) -> tuple[np.ndarray, np.ndarray]:
    items = sorted(dist.probs.items())
    bits = np.array([b for b, _ in items], dtype=np.int64)
    probs = np.array([p for _, p in items], dtype=float)
    return bits, probs


def _one_exact_step(
    bits: np.ndarray, probs: np.ndarray, gate: Gate, table_bits: int, negation_p: float
) -> np.ndarray:
    """Counts vector over all 2^(2^n) tables after one gate layer."""
    k = gate.fan_in
    s = len(bits)
    total = s ** k
    if total > _TUPLE_BUDGET:
        raise ValueError(
            f"support {s} with fan-in {k} needs {total} tuples, over the exact budget"
        )
    full_mask = (1 << table_bits) - 1
    counts = np.zeros(1 << table_bits)
    for start in range(0, total, _TUPLE_CHUNK):
        idx = np.arange(start, min(start + _TUPLE_CHUNK, total), dtype=np.int64)
        parts, weight = [], np.ones(len(idx))
        rem = idx
        for _ in range(k):
            rem, low = np.divmod(rem, s)
            parts.append(bits[low])
            weight = weight * probs[low]
        out = _compose_packed(gate, parts, full_mask)
        counts += np.bincount(out, weights=weight, minlength=1 << table_bits)
    if negation_p > 0:
        # complement is index reversal: x ^ full_mask == full_mask - x
        counts = (1 - negation_p) * counts + negation_p * counts[::-1]
    return counts / counts.sum()


def _from_counts(n: int, counts: np.ndarray, **kw) -> FunctionDistribution:
    probs = {int(i): float(p) for i, p in enumerate(counts) if p > 0}
    return FunctionDistribution(arity=n, probs=probs, **kw)


def evolve_exact(
    dist: FunctionDistribution,
    gate: Gate,
    layers: int,
    negation_p: float = 0.0,
) -> list[FunctionDistribution]:
    """Noiseless gas recursion; returns distributions for layers 0..layers.

    Each step sums over all fan-in tuples of supported tables, composing the
    gate bit-parallel and accumulating product weights.  A quenched negation
    probability mixes in the complemented distribution after composition.
    """
    if not 0 <= negation_p <= 1:
        raise ValueError("negation probability must lie in [0, 1]")
    n = dist.arity
    table_bits = 1 << n
    out = [dist]
    bits, probs = _as_arrays(dist)
    for _ in range(layers):
        counts = _one_exact_step(bits, probs, gate, table_bits, negation_p)
        nxt = _from_counts(n, counts, kind="exact")
        out.append(nxt)
        bits, probs = _as_arrays(nxt)
    return out


def _flip_kernel(table_bits: int, epsilon: float) -> np.ndarray:
    states = np.arange(1 << table_bits)
    xor = states[:, None] ^ states[None, :]
    pop = np.array([bin(x).count("1") for x in range(1 << table_bits)])
    d = pop[xor]
    return epsilon ** d * (1 - epsilon) ** (table_bits - d)


def evolve_noisy(
    dist: FunctionDistribution,
    gate: Gate,
    layers: int,
    epsilon: float,
    negation_p: float = 0.0,
    prune: float = 0.0,
) -> list[FunctionDistribution]:
    """Gas recursion with an annealed output-flip channel of rate epsilon.

    After each composition every table bit flips independently, a dense
    convolution over Hamming distance.  An optional prune floor drops tables
    below it and renormalizes; the discarded mass is recorded per layer in
    the result metadata, so truncation stays visible.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError("flip rate must lie in [0, 1]")
    n = dist.arity
    table_bits = 1 << n
    kernel = _flip_kernel(table_bits, epsilon) if epsilon > 0 else None
    out = [dist]
    bits, probs = _as_arrays(dist)
    for _ in range(layers):
        counts = _one_exact_step(bits, probs, gate, table_bits, negation_p)
        if kernel is not None:
            counts = counts @ kernel
        pruned = 0.0
        if prune > 0:
            keep = counts >= prune
            pruned = float(counts[~keep].sum())
            counts = np.where(keep, counts, 0.0)
            counts = counts / counts.sum()
        nxt = _from_counts(n, counts, kind="exact", metadata={"pruned_mass": pruned})
        out.append(nxt)
        bits, probs = _as_arrays(nxt)
    return out


def evolve_sampled(
    dist: FunctionDistribution,
    gate: Gate,
    layers: int,
    pool_size: int,
    seed: int,
    epsilon: float = 0.0,
    negation_p: float = 0.0,
) -> list[FunctionDistribution]:
    """Monte Carlo pool version of the gas recursion.

    Keeps pool_size packed tables, resamples fan-in parents uniformly from
    the previous pool, and applies negation and flip channels by bit masking.
    Useful as an independent check of the exact recursion and for supports
    too large to enumerate tuples over.
    """
    if pool_size < 1000:
        raise ValueError("pool must hold at least 1000 functions")
    n = dist.arity
    table_bits = 1 << n
    full_mask = (1 << table_bits) - 1
    rng = make_generator(seed, "circuit-pool")
    bits, probs = _as_arrays(dist)
    pool = rng.choice(bits, size=pool_size, p=probs)
    weights = (1 << np.arange(table_bits)).astype(np.int64)

    def empirical(p: np.ndarray) -> FunctionDistribution:
        counts = np.bincount(p, minlength=1 << table_bits)
        return _from_counts(
            n, counts / pool_size, kind="monte_carlo", samples=pool_size, seed=seed
        )

    out = [empirical(pool)]
    for _ in range(layers):
        parents = rng.integers(0, pool_size, size=(pool_size, gate.fan_in))
        parts = [pool[parents[:, j]] for j in range(gate.fan_in)]
        new = _compose_packed(gate, parts, full_mask)
        if negation_p > 0:
            negate = rng.random(pool_size) < negation_p
            new = np.where(negate, new ^ full_mask, new)
        if epsilon > 0:
            flips = (rng.random((pool_size, table_bits)) < epsilon) @ weights
            new = new ^ flips
        pool = new
        out.append(empirical(pool))
    return out


def magnetization_map(gate: Gate, m):
    """Per-pattern update of the mean node spin under one gate layer.

    With inputs drawn independently at magnetization m, the output mean is
    sum over input spin combinations of (gate output spin) times
    prod_j (1 + S_j m) / 2; patterns decouple, so this is elementwise.
    """
    m = np.asarray(m, dtype=float)
    out = np.zeros_like(m)
    k = gate.fan_in
    for c in range(1 << k):
        weight = np.ones_like(m)
        for j in range(1, k + 1):
            s = 1 - 2 * ((c >> (k - j)) & 1)
            weight = weight * (1 + s * m) / 2
        out = out + (1 - 2 * ((gate.table >> c) & 1)) * weight
    return out if out.ndim else float(out)


def _initial_magnetization(scheme: InputScheme, n: int) -> np.ndarray:
    dist = initial_function_distribution(scheme, n)
    m = np.zeros(1 << n)
    for bits, p in dist.probs.items():
        m += p * BooleanFunction(n, bits).spin_table()
    return m


def magnetization_trajectory(
    gate: Gate, scheme: InputScheme, n: int, layers: int
) -> np.ndarray:
    """(layers+1, 2^n) array of per-pattern magnetizations, layer 0 first."""
    traj = np.empty((layers + 1, 1 << n))
    traj[0] = _initial_magnetization(scheme, n)
    for layer in range(1, layers + 1):
        traj[layer] = magnetization_map(gate, traj[layer - 1])
    return traj


class ConvergenceKind(Enum):
    SINGLE_FUNCTION = "single_function"
    UNIFORM_CANDIDATE = "uniform_candidate"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ConvergenceReport:
    kind: ConvergenceKind
    limit: BooleanFunction | None
    layers_run: int
    trajectory: np.ndarray


def classify_convergence(
    gate: Gate,
    scheme: InputScheme,
    n: int,
    max_layers: int = 1000,
    tol: float = 1e-9,
) -> ConvergenceReport:
    """Coarse fate of the gas from the magnetization flow.

    Saturation of every pattern magnetization at +-1 pins a single limit
    function (sign of the limit, True at -1).  A balanced gate that is not
    linear over GF(2) mixes symmetric inputs toward the uniform law, so a
    zero initial magnetization under such a gate is reported as a uniform
    candidate; anything else, including parity gates whose magnetization is
    uninformative, stays undetermined.
    """
    traj = magnetization_trajectory(gate, scheme, n, max_layers)
    m = traj[-1]
    if np.all(np.abs(np.abs(m) - 1.0) < tol):
        spins = np.where(m > 0, 1, -1)
        limit = BooleanFunction.from_spins(n, spins)
        return ConvergenceReport(ConvergenceKind.SINGLE_FUNCTION, limit, max_layers, traj)
    if gate.balanced and not gate.gf2_linear and np.all(np.abs(traj[0]) < tol):
        return ConvergenceReport(ConvergenceKind.UNIFORM_CANDIDATE, None, max_layers, traj)
    return ConvergenceReport(ConvergenceKind.UNDETERMINED, None, max_layers, traj)


def write_distribution_trajectory_csv(path, dists: list[FunctionDistribution]) -> None:
    """Emit (layer, f_hex, p) rows, mass-ordered within each layer."""
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layer", "f_hex", "p"])
        for layer, dist in enumerate(dists):
            for bits, p in dist.items_by_mass():
                if p > 0:
                    writer.writerow([layer, f"{bits:#x}", repr(p)])
    os.replace(tmp, path)


def write_magnetization_csv(path, trajectory: np.ndarray) -> None:
    """Emit (layer, gamma, m) rows from a magnetization trajectory."""
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layer", "gamma", "m"])
        for layer, row in enumerate(trajectory):
            for g, value in enumerate(row, start=1):
                writer.writerow([layer, g, repr(float(value))])
    os.replace(tmp, path)
