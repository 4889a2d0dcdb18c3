"""Finite-width ensembles: explicit machines and exact-in-law fast sampling.

Two engines produce the same ensembles.  The explicit engine materializes
weights or wiring for one realization at a time and propagates every input
pattern; it is the reference the tests pin down bitwise.  The fast engine
never materializes parameters: conditioned on the states of earlier layers,
the preactivation rows of a random layer are independent Gaussians whose
covariance is a deterministic function of empirical state overlaps, so it
draws those Gaussians directly, batched over realizations.  For weight-shared
networks the shared matrix couples layers, handled by conditioning each new
layer's preactivations on all previous ones (Gaussian regression on the
running block Gram).  Both engines agree in distribution; the fast one is
what the acceptance-scale runs use.

Stream discipline: all randomness flows through make_generator(seed, tags...)
with batch-start tags, so the set of drawn numbers depends only on the
configuration, never on thread partitioning.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .circuit_dynamics import _compose_packed
from .core import Gate, InputScheme, input_component_matrix, scheme_component_functions
from .function_space import (
    ExactBivariate,
    FunctionDistribution,
    MonteCarlo,
    dnn_function_distribution,
    kl_divergence,
    tv_distance,
)
from .gaussian import make_generator
from .meanfield import Activation, KernelSpec, covariance_at_layer

__all__ = [
    "Architecture",
    "DnnMachine",
    "CircuitMachine",
    "EnsembleConfig",
    "OneNode",
    "AllNodes",
    "DnnRealization",
    "CircuitRealization",
    "sample_realization",
    "propagate_all_patterns",
    "estimate_function_distribution",
    "OverlapMeasurement",
    "measure_overlaps",
    "ArchitectureComparison",
    "compare_architectures",
    "write_overlap_measurement_csv",
    "write_comparison_json",
]

_SIM_MAX_ARITY = 4
_LD_BATCH = 500
_CIRCUIT_BATCH_WORDS = 2_000_000
_CIRCUIT_BATCH_WORDS_NOISY = 500_000
_REC_MEMORY_BUDGET = 2.5e8  # bytes of stored preactivations per batch


class Architecture(Enum):
    LAYER_DEPENDENT = "layer_dependent"
    RECURRENT = "recurrent"


@dataclass(frozen=True)
class DnnMachine:
    activation: Activation
    sigma_w: float = 1.0
    sigma_b: float = 0.0

    def __post_init__(self):
        self.kernel_spec  # validation lives in KernelSpec

    @property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.activation, self.sigma_w, self.sigma_b)


@dataclass(frozen=True)
class CircuitMachine:
    gate: Gate
    epsilon: float = 0.0
    negation_p: float = 0.0

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("flip rate must lie in [0, 1]")
        if not 0 <= self.negation_p <= 1:
            raise ValueError("negation probability must lie in [0, 1]")


@dataclass(frozen=True)
class EnsembleConfig:
    machine: DnnMachine | CircuitMachine
    width: int
    depth: int
    arity: int
    scheme: InputScheme
    architecture: Architecture = Architecture.LAYER_DEPENDENT
    seed: int = 0

    def __post_init__(self):
        if self.width < 2:
            raise ValueError("width must be at least 2")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        if not 1 <= self.arity <= _SIM_MAX_ARITY:
            raise ValueError(f"arity must lie in 1..{_SIM_MAX_ARITY}")

    @property
    def components(self) -> int:
        return self.scheme.component_count(self.arity)

    @property
    def patterns(self) -> int:
        return 1 << self.arity


@dataclass(frozen=True)
class OneNode:
    """Read one function per realization (node 0): independent samples."""


@dataclass(frozen=True)
class AllNodes:
    """Read every node's function: N samples per realization, correlated
    through the shared hidden layers."""


@dataclass(frozen=True)
class DnnRealization:
    index: int
    assignment: np.ndarray  # (N,) component index per layer-0 node
    weights: tuple  # depth matrices (N, N), or one when shared
    biases: tuple
    shared: bool


@dataclass(frozen=True)
class CircuitRealization:
    index: int
    assignment: np.ndarray  # (N,) component index per layer-0 node
    predecessors: np.ndarray  # (depth or 1, N, k)
    negations: np.ndarray  # (depth or 1, N) bool
    shared: bool


def sample_realization(cfg: EnsembleConfig, index: int = 0):
    """Draw one machine from the ensemble (stream: seed, "realization", index).

    Layer 0 is the same for every machine kind: each of the width nodes
    carries one input component, its index drawn uniformly.
    """
    rng = make_generator(cfg.seed, "realization", index)
    n, width, depth = cfg.arity, cfg.width, cfg.depth
    assignment = rng.integers(0, cfg.components, width)
    if isinstance(cfg.machine, DnnMachine):
        sw, sb = cfg.machine.sigma_w, cfg.machine.sigma_b
        layers = 1 if cfg.architecture is Architecture.RECURRENT else depth
        weights = tuple(
            rng.standard_normal((width, width)) * sw for _ in range(layers)
        )
        biases = tuple(rng.standard_normal(width) * sb for _ in range(layers))
        return DnnRealization(
            index,
            assignment,
            weights,
            biases,
            shared=cfg.architecture is Architecture.RECURRENT,
        )
    gate = cfg.machine.gate
    layers = 1 if cfg.architecture is Architecture.RECURRENT else depth
    preds = np.empty((layers, width, gate.fan_in), dtype=np.int64)
    negs = np.zeros((layers, width), dtype=bool)
    for layer in range(layers):
        preds[layer] = rng.integers(0, width, (width, gate.fan_in))
        if cfg.machine.negation_p > 0:
            negs[layer] = rng.random(width) < cfg.machine.negation_p
    return CircuitRealization(
        index, assignment, preds, negs, shared=cfg.architecture is Architecture.RECURRENT
    )


def _activation_array(activation: Activation, h: np.ndarray) -> np.ndarray:
    if activation is Activation.SIGN:
        return np.where(h < 0, -1.0, 1.0)
    return np.maximum(h, 0.0)


def _sign_spins(h: np.ndarray) -> np.ndarray:
    return np.where(h < 0, -1, 1).astype(np.int8)


def _input_spins_from_counts(x: np.ndarray, counts: np.ndarray, width: int) -> np.ndarray:
    """Layer-0 spin states (B, N, M) consistent with drawn component counts.

    Later layers see layer 0 only through its Gram and their rows are
    conditionally iid, so any node order realizing the counts yields the
    correct joint law; components are laid out contiguously.
    """
    out = np.empty((counts.shape[0], width, x.shape[1]), dtype=np.int8)
    for b in range(counts.shape[0]):
        out[b] = np.repeat(x, counts[b], axis=0)
    return out


def _component_words(scheme: InputScheme, n: int) -> np.ndarray:
    return np.array(
        [f.bits for f in scheme_component_functions(scheme, n)], dtype=np.int64
    )




def propagate_all_patterns(
    cfg: EnsembleConfig, realization, return_states: bool = False
):
    """Evaluate one realization on every input pattern.

    Returns the (width, 2^n) matrix of readout spins; with return_states also
    the list of states per layer (post-activation for hidden layers, readout
    spins last).  Annealed circuit noise is drawn from the stream
    (seed, "annealed", realization index) as one (depth, width, 2^n) block,
    so reruns of the same realization see the same flips.
    """
    if isinstance(realization, DnnRealization):
        return _propagate_dnn(cfg, realization, return_states)
    return _propagate_circuit(cfg, realization, return_states)


def _propagate_dnn(cfg, r: DnnRealization, return_states: bool):
    act = cfg.machine.activation
    states = []
    x = input_component_matrix(cfg.scheme, cfg.arity)
    s = x[r.assignment].astype(float)  # (N, M)
    h = None
    for layer in range(cfg.depth):
        w = r.weights[0 if r.shared else layer]
        b = r.biases[0 if r.shared else layer]
        h = w @ s / math.sqrt(cfg.width) + b[:, None]
        s = _activation_array(act, h)
        if return_states:
            states.append(s)
    spins = _sign_spins(h)
    if return_states:
        states[-1] = spins
        return spins, states
    return spins


def _propagate_circuit(cfg, r: CircuitRealization, return_states: bool):
    gate: Gate = cfg.machine.gate
    table_bits = cfg.patterns
    mask = (1 << table_bits) - 1
    words = _component_words(cfg.scheme, cfg.arity)[r.assignment]
    eps = cfg.machine.epsilon
    flip_words = None
    if eps > 0:
        rng = make_generator(cfg.seed, "annealed", r.index)
        weights = (1 << np.arange(table_bits)).astype(np.int64)
        flips = rng.random((cfg.depth, cfg.width, table_bits)) < eps
        flip_words = flips @ weights
    states = []
    for layer in range(cfg.depth):
        row = 0 if r.shared else layer
        pred = r.predecessors[row]
        parts = [words[pred[:, j]] for j in range(gate.fan_in)]
        new = _compose_packed(gate, parts, mask)
        new = np.where(r.negations[row], new ^ mask, new)
        if flip_words is not None:
            new = new ^ flip_words[layer]
        words = new
        if return_states:
            states.append(_words_to_spins(words, table_bits))
    spins = _words_to_spins(words, table_bits)
    if return_states:
        return spins, states
    return spins


def _words_to_spins(words: np.ndarray, table_bits: int) -> np.ndarray:
    bits = (words[:, None] >> np.arange(table_bits)) & 1
    return (1 - 2 * bits).astype(np.int8)


def _pack_codes(h: np.ndarray) -> np.ndarray:
    """Sign-readout function codes: bit gamma-1 set when h(gamma) < 0."""
    m = h.shape[-1]
    weights = (1 << np.arange(m)).astype(np.int64)
    return (h < 0) @ weights


def _dnn_batch_size(cfg: EnsembleConfig) -> int:
    if cfg.architecture is Architecture.LAYER_DEPENDENT:
        return _LD_BATCH
    per_real = cfg.depth * cfg.width * cfg.patterns * 8
    return max(1, min(250, int(_REC_MEMORY_BUDGET / per_real)))


def _circuit_batch_size(cfg: EnsembleConfig) -> int:
    words = (
        _CIRCUIT_BATCH_WORDS_NOISY if cfg.machine.epsilon > 0 else _CIRCUIT_BATCH_WORDS
    )
    return max(1, words // cfg.width)


def _batched_psd_factor(k: np.ndarray) -> np.ndarray:
    """Symmetric square roots for a (B, M, M) stack, eigenvalue clipping."""
    k = (k + k.transpose(0, 2, 1)) / 2
    vals, vecs = np.linalg.eigh(k)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))[:, None, :]


def _fast_dnn_ld_batch(cfg, start: int, count: int, collect_states: bool):
    ks = cfg.machine.kernel_spec
    sw2, sb2 = ks.sigma_w ** 2, ks.sigma_b ** 2
    rng = make_generator(cfg.seed, "fast", start)
    n_nodes, m = cfg.width, cfg.patterns
    x = input_component_matrix(cfg.scheme, cfg.arity)
    # the random layer-0 component counts per realization; conditioned on
    # them the first preactivation rows are iid with the empirical input Gram
    counts = rng.multinomial(n_nodes, np.full(cfg.components, 1.0 / cfg.components), size=count)
    gram0 = np.einsum("bc,cm,ck->bmk", counts / n_nodes, x, x)
    states = [_input_spins_from_counts(x, counts, n_nodes)] if collect_states else None
    f0 = _batched_psd_factor(sw2 * gram0 + sb2)
    h = np.einsum("bnj,bmj->bnm", rng.standard_normal((count, n_nodes, m)), f0)
    if collect_states:
        states.append(_sign_spins(h))
    for _ in range(1, cfg.depth):
        s = _activation_array(cfg.machine.activation, h)
        gram = np.einsum("bnm,bnk->bmk", s, s) / n_nodes
        f = _batched_psd_factor(sw2 * gram + sb2)
        z = rng.standard_normal((count, n_nodes, m))
        h = np.einsum("bnj,bmj->bnm", z, f)
        if collect_states:
            states.append(_sign_spins(h))
    return _pack_codes(h), states


def _fast_dnn_rec_batch(cfg, start: int, count: int, collect_states: bool):
    """Weight sharing: condition layer l preactivations on layers 1..l-1.

    The running Gram has one (B, M, M) block per layer pair, built from state
    overlaps; the conditional mean is a regression of the new block row on
    the stacked earlier preactivations.
    """
    ks = cfg.machine.kernel_spec
    sw2, sb2 = ks.sigma_w ** 2, ks.sigma_b ** 2
    rng = make_generator(cfg.seed, "fast", start)
    n_nodes, m = cfg.width, cfg.patterns
    x = input_component_matrix(cfg.scheme, cfg.arity)
    assignment = rng.integers(0, cfg.components, (count, n_nodes))
    s0 = x[assignment].astype(float)  # (B, N, M)
    state_list = [s0]  # index l holds S^l
    hs = []  # preactivations (B, N, M) per layer
    blocks: dict[tuple[int, int], np.ndarray] = {}
    spins_out = [s0.astype(np.int8)] if collect_states else None

    def overlap(a: int, b: int) -> np.ndarray:
        g = np.einsum("bnm,bnk->bmk", state_list[a], state_list[b]) / n_nodes
        return sw2 * g + sb2

    for layer in range(1, cfg.depth + 1):
        for j in range(1, layer + 1):
            blocks[(layer, j)] = overlap(layer - 1, j - 1)
            blocks[(j, layer)] = blocks[(layer, j)].transpose(0, 2, 1)
        z = rng.standard_normal((count, n_nodes, m))
        if layer == 1:
            h = np.einsum("bnj,bmj->bnm", z, _batched_psd_factor(blocks[(1, 1)]))
        else:
            p = (layer - 1) * m
            koo = np.empty((count, p, p))
            kno = np.empty((count, m, p))
            for a in range(1, layer):
                kno[:, :, (a - 1) * m : a * m] = blocks[(layer, a)]
                for b in range(1, layer):
                    koo[:, (a - 1) * m : a * m, (b - 1) * m : b * m] = blocks[(a, b)]
            koo += 1e-10 * np.eye(p)
            a_mat = np.linalg.solve(koo, kno.transpose(0, 2, 1))  # (B, P, M)
            hcat = np.concatenate(hs, axis=2)  # (B, N, P)
            mu = hcat @ a_mat
            cond = blocks[(layer, layer)] - kno @ a_mat
            h = mu + np.einsum("bnj,bmj->bnm", z, _batched_psd_factor(cond))
        hs.append(h)
        state_list.append(_activation_array(cfg.machine.activation, h))
        if collect_states:
            spins_out.append(_sign_spins(h))
    return _pack_codes(hs[-1]), spins_out


def _fast_circuit_batch(cfg, start: int, count: int, collect_states: bool):
    gate: Gate = cfg.machine.gate
    table_bits = cfg.patterns
    mask = (1 << table_bits) - 1
    rng = make_generator(cfg.seed, "fast", start)
    n_nodes = cfg.width
    # words fit a byte for n <= 3, an 8x cut in memory traffic at the
    # acceptance widths; composition and xor are dtype-preserving
    word_dtype = np.uint8 if table_bits <= 8 else np.int64
    comp = _component_words(cfg.scheme, cfg.arity).astype(word_dtype)
    words = comp[rng.integers(0, cfg.components, (count, n_nodes))]
    shared = cfg.architecture is Architecture.RECURRENT
    p_neg, eps = cfg.machine.negation_p, cfg.machine.epsilon
    weights = (1 << np.arange(table_bits)).astype(np.int64)
    pred = neg = None
    if shared:
        pred = rng.integers(0, n_nodes, (count, n_nodes, gate.fan_in), dtype=np.int32)
        neg = rng.random((count, n_nodes)) < p_neg if p_neg > 0 else None
    states = [] if collect_states else None
    for _ in range(cfg.depth):
        if not shared:
            pred = rng.integers(0, n_nodes, (count, n_nodes, gate.fan_in), dtype=np.int32)
            neg = rng.random((count, n_nodes)) < p_neg if p_neg > 0 else None
        parts = [
            np.take_along_axis(words, pred[:, :, j].astype(np.int64), axis=1)
            for j in range(gate.fan_in)
        ]
        new = _compose_packed(gate, parts, mask)
        if neg is not None:
            new = np.where(neg, new ^ mask, new)
        if eps > 0:
            flips = (rng.random((count, n_nodes, table_bits)) < eps) @ weights
            new = new ^ flips.astype(word_dtype)
        words = new
        if collect_states:
            states.append(words.copy())
    return words, states


def _fast_batch(cfg, start: int, count: int, collect_states: bool = False):
    if isinstance(cfg.machine, CircuitMachine):
        return _fast_circuit_batch(cfg, start, count, collect_states)
    if cfg.architecture is Architecture.RECURRENT:
        return _fast_dnn_rec_batch(cfg, start, count, collect_states)
    return _fast_dnn_ld_batch(cfg, start, count, collect_states)


def _batch_starts(total: int, batch: int) -> list[tuple[int, int]]:
    return [(s, min(batch, total - s)) for s in range(0, total, batch)]


def _map_batches(worker, spans, threads: int):
    if threads <= 1:
        return [worker(span) for span in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, spans))


def estimate_function_distribution(
    cfg: EnsembleConfig,
    realizations: int,
    policy=OneNode(),
    engine: str = "fast",
    threads: int = 1,
) -> FunctionDistribution:
    """Empirical distribution of computed functions over the ensemble.

    OneNode reads a single node per realization (independent draws); AllNodes
    reads the whole layer, which multiplies the sample count by the width but
    correlates samples within a realization (flagged in the metadata).  The
    fast engine batches realizations with a fixed internal batch size, and
    threads only distribute whole batches, so results are identical for any
    thread count.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    table_count = 1 << cfg.patterns
    counts = np.zeros(table_count, dtype=np.int64)
    if engine == "explicit":
        for index in range(realizations):
            spins = propagate_all_patterns(cfg, sample_realization(cfg, index))
            codes = _pack_codes(spins.astype(float))  # spin -1 (True) sets the bit
            if isinstance(policy, OneNode):
                counts[codes[0]] += 1
            else:
                counts += np.bincount(codes, minlength=table_count)
    elif engine == "fast":
        batch = (
            _circuit_batch_size(cfg)
            if isinstance(cfg.machine, CircuitMachine)
            else _dnn_batch_size(cfg)
        )
        spans = _batch_starts(realizations, batch)

        def worker(span):
            start, count = span
            codes, _ = _fast_batch(cfg, start, count)
            if isinstance(policy, OneNode):
                codes = codes[:, 0]
            return np.bincount(codes.ravel(), minlength=table_count)

        for c in _map_batches(worker, spans, threads):
            counts += c
    else:
        raise ValueError(f"unknown engine {engine!r}")
    per_real = 1 if isinstance(policy, OneNode) else cfg.width
    samples = realizations * per_real
    probs = {int(i): c / samples for i, c in enumerate(counts) if c > 0}
    return FunctionDistribution(
        arity=cfg.arity,
        probs=probs,
        kind="monte_carlo",
        samples=samples,
        seed=cfg.seed,
        metadata={
            "engine": engine,
            "policy": type(policy).__name__,
            "architecture": cfg.architecture.value,
            "width": cfg.width,
            "depth": cfg.depth,
            "correlated": isinstance(policy, AllNodes),
        },
    )


@dataclass(frozen=True)
class OverlapMeasurement:
    """Mean and standard error of state overlaps across realizations.

    Layer 0 is the input layer (the drawn component states); layers 1..depth
    are the network layers.  Entry (l, l', gamma, gamma') estimates the
    overlap between the layer-l state on pattern gamma and the layer-l' state
    on pattern gamma'.
    """

    arity: int
    depth: int
    realizations: int
    mean: np.ndarray  # (depth+1, depth+1, M, M)
    stderr: np.ndarray

    def q(self, layer: int, layer_prime: int, gamma: int, gamma_prime: int) -> float:
        return float(self.mean[layer, layer_prime, gamma - 1, gamma_prime - 1])


def measure_overlaps(
    cfg: EnsembleConfig, realizations: int, threads: int = 1
) -> OverlapMeasurement:
    """Monte Carlo layer-pair overlaps for sign networks.

    Uses the fast engine with collected states; each realization contributes
    S^l . S^l' / width for every layer pair (input layer included) and
    pattern pair.
    """
    if not (
        isinstance(cfg.machine, DnnMachine)
        and cfg.machine.activation is Activation.SIGN
    ):
        raise ValueError("overlap measurement is defined for sign networks")
    m, layers = cfg.patterns, cfg.depth + 1
    total = np.zeros((layers, layers, m, m))
    total_sq = np.zeros_like(total)
    batch = _dnn_batch_size(cfg)

    def worker(span):
        start, count = span
        _, states = _fast_batch(cfg, start, count, collect_states=True)
        acc = np.empty((count, layers, layers, m, m))
        spins = [s.astype(float) for s in states]
        for a in range(layers):
            for b in range(layers):
                acc[:, a, b] = np.einsum("bnm,bnk->bmk", spins[a], spins[b]) / cfg.width
        return acc.sum(axis=0), (acc ** 2).sum(axis=0)

    for s1, s2 in _map_batches(worker, _batch_starts(realizations, batch), threads):
        total += s1
        total_sq += s2
    mean = total / realizations
    if realizations > 1:
        var = (total_sq - realizations * mean ** 2) / (realizations - 1)
        stderr = np.sqrt(np.clip(var, 0.0, None) / realizations)
    else:
        stderr = np.full_like(mean, np.nan)
    return OverlapMeasurement(cfg.arity, cfg.depth, realizations, mean, stderr)


@dataclass(frozen=True)
class ArchitectureComparison:
    tv_observed: float
    tv_bootstrap_interval: tuple[float, float]
    tv_null_mean: float
    tv_null_interval: tuple[float, float]
    within_null: bool
    kl_layer_dependent: float
    kl_recurrent: float
    realizations: int
    seed: int
    arm_seeds: tuple[int, int]
    # carried for in-process reuse; not serialized
    dist_layer_dependent: FunctionDistribution | None = None
    dist_recurrent: FunctionDistribution | None = None
    reference: FunctionDistribution | None = None

    def to_dict(self) -> dict:
        return {
            "tv_observed": self.tv_observed,
            "tv_bootstrap_interval": list(self.tv_bootstrap_interval),
            "tv_null_mean": self.tv_null_mean,
            "tv_null_interval": list(self.tv_null_interval),
            "within_null": self.within_null,
            "kl_layer_dependent": self.kl_layer_dependent,
            "kl_recurrent": self.kl_recurrent,
            "realizations": self.realizations,
            "seed": self.seed,
            "arm_seeds": list(self.arm_seeds),
        }


def _tv_counts(c1: np.ndarray, c2: np.ndarray, total: int) -> float:
    return 0.5 * np.abs(c1 - c2).sum() / total


def _resample_tv(rng, p1, p2, total: int, draws: int) -> np.ndarray:
    out = np.empty(draws)
    for i in range(draws):
        out[i] = _tv_counts(
            rng.multinomial(total, p1), rng.multinomial(total, p2), total
        )
    return out


def _dist_prob_vector(dist: FunctionDistribution) -> np.ndarray:
    vec = np.zeros(1 << (1 << dist.arity))
    for bits, p in dist.probs.items():
        vec[bits] = p
    return vec / vec.sum()


def _mean_field_reference(
    machine: DnnMachine | CircuitMachine,
    depth: int,
    arity: int,
    scheme: InputScheme,
    mc_seed: int,
) -> FunctionDistribution:
    """Wide-limit law the empirical distributions are judged against."""
    if isinstance(machine, DnnMachine):
        cov = covariance_at_layer(machine.kernel_spec, scheme, arity, depth)
        if arity == 1:
            return dnn_function_distribution(cov, ExactBivariate())
        return dnn_function_distribution(cov, MonteCarlo(samples=1_000_000, seed=mc_seed))
    from .circuit_dynamics import evolve_exact, evolve_noisy, initial_function_distribution

    start = initial_function_distribution(scheme, arity)
    if machine.epsilon > 0:
        traj = evolve_noisy(
            start, machine.gate, depth, machine.epsilon, machine.negation_p
        )
    else:
        traj = evolve_exact(start, machine.gate, depth, machine.negation_p)
    return traj[-1]


def compare_architectures(
    machine: DnnMachine | CircuitMachine,
    width: int,
    depth: int,
    arity: int,
    scheme: InputScheme,
    seed: int,
    realizations: int,
    reference: FunctionDistribution | None = None,
    null_draws: int = 1000,
    threads: int = 1,
) -> ArchitectureComparison:
    """Do layer-dependent and weight-shared ensembles compute alike?

    Each architecture gets its own derived seed and an independent one-node
    function sample of the requested size.  The observed total variation
    between the two empirical distributions is compared against a null
    calibration: the TV between two independent same-size samples from the
    reference law (the wide-limit prediction by default: the Gaussian-field
    covariance for networks, the collision recursion for circuits).  A
    bootstrap interval on the observed TV is reported alongside.
    """
    if realizations < 1000:
        raise ValueError("architecture comparison needs at least 1000 realizations")
    arm_rng = make_generator(seed, "compare")
    arm_seeds = tuple(int(v) for v in arm_rng.integers(0, 2 ** 62, size=2))
    dists = []
    for arch, arm_seed in zip(
        (Architecture.LAYER_DEPENDENT, Architecture.RECURRENT), arm_seeds
    ):
        cfg = EnsembleConfig(
            machine=machine,
            width=width,
            depth=depth,
            arity=arity,
            scheme=scheme,
            architecture=arch,
            seed=arm_seed,
        )
        dists.append(
            estimate_function_distribution(cfg, realizations, OneNode(), "fast", threads)
        )
    d_ld, d_rec = dists
    if reference is None:
        reference = _mean_field_reference(
            machine, depth, arity, scheme, int(arm_rng.integers(2 ** 62))
        )
    tv_obs = tv_distance(d_ld, d_rec)
    rng = make_generator(seed, "compare-null")
    ref_vec = _dist_prob_vector(reference)
    null = _resample_tv(rng, ref_vec, ref_vec, realizations, null_draws)
    boot = _resample_tv(
        rng, _dist_prob_vector(d_ld), _dist_prob_vector(d_rec), realizations, null_draws
    )
    null_lo, null_hi = np.quantile(null, [0.025, 0.975])

    def _kl(d):
        try:
            return kl_divergence(d, reference)
        except ValueError:
            return math.inf

    return ArchitectureComparison(
        tv_observed=float(tv_obs),
        tv_bootstrap_interval=tuple(np.quantile(boot, [0.025, 0.975])),
        tv_null_mean=float(null.mean()),
        tv_null_interval=(float(null_lo), float(null_hi)),
        within_null=bool(tv_obs <= null_hi),
        kl_layer_dependent=_kl(d_ld),
        kl_recurrent=_kl(d_rec),
        realizations=realizations,
        seed=seed,
        arm_seeds=arm_seeds,
        dist_layer_dependent=d_ld,
        dist_recurrent=d_rec,
        reference=reference,
    )


def write_overlap_measurement_csv(path, meas: OverlapMeasurement) -> None:
    """Emit (l, l_prime, gamma, gamma_prime, q_hat, stderr) rows; l=0 is the
    input layer."""
    import csv

    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l", "l_prime", "gamma", "gamma_prime", "q_hat", "stderr"])
        m = 1 << meas.arity
        for a in range(meas.depth + 1):
            for b in range(meas.depth + 1):
                for g in range(1, m + 1):
                    for gp in range(1, m + 1):
                        writer.writerow(
                            [
                                a,
                                b,
                                g,
                                gp,
                                repr(meas.q(a, b, g, gp)),
                                repr(float(meas.stderr[a, b, g - 1, gp - 1])),
                            ]
                        )
    os.replace(tmp, path)


def write_comparison_json(path, comp: ArchitectureComparison) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(comp.to_dict(), fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)
