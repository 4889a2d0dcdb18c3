import json
import math

import numpy as np
import pytest
from scipy import stats

from boolspace.circuit_dynamics import evolve_exact, initial_function_distribution
from boolspace.core import BooleanFunction, InputScheme, parse_gate
from boolspace.function_space import (
    ExactBivariate,
    MonteCarlo,
    dnn_function_distribution,
    kl_divergence,
    limit_distribution,
    LimitKind,
    support_is_odd,
    tv_distance,
)
from boolspace.meanfield import Activation, covariance_at_layer
from boolspace.simulator import (
    AllNodes,
    Architecture,
    ArchitectureComparison,
    CircuitMachine,
    DnnMachine,
    EnsembleConfig,
    OneNode,
    compare_architectures,
    estimate_function_distribution,
    measure_overlaps,
    propagate_all_patterns,
    sample_realization,
    write_comparison_json,
    write_overlap_measurement_csv,
)

SIGN = DnnMachine(Activation.SIGN)
MAJ3 = parse_gate("MAJ3")


def dnn_cfg(**kw):
    base = dict(
        machine=SIGN,
        width=64,
        depth=3,
        arity=2,
        scheme=InputScheme.biased(1.0),
        seed=0,
    )
    base.update(kw)
    return EnsembleConfig(**base)


def circuit_cfg(**kw):
    base = dict(
        machine=CircuitMachine(MAJ3),
        width=64,
        depth=3,
        arity=2,
        scheme=InputScheme.balanced(),
        seed=0,
    )
    base.update(kw)
    return EnsembleConfig(**base)


class TestConfig:
    def test_bounds(self):
        with pytest.raises(ValueError):
            dnn_cfg(width=1)
        with pytest.raises(ValueError):
            dnn_cfg(depth=0)
        with pytest.raises(ValueError):
            dnn_cfg(arity=5)

    def test_machine_validation(self):
        with pytest.raises(ValueError):
            CircuitMachine(MAJ3, epsilon=1.5)
        with pytest.raises(ValueError):
            CircuitMachine(MAJ3, negation_p=-0.1)
        with pytest.raises(ValueError):
            DnnMachine(Activation.RELU, sigma_w=1.0, sigma_b=0.2)

    def test_derived_counts(self):
        cfg = dnn_cfg(arity=3)
        assert cfg.patterns == 8
        assert cfg.components == 4


class TestSampleRealization:
    def test_deterministic_per_index(self):
        cfg = dnn_cfg()
        a = sample_realization(cfg, 5)
        b = sample_realization(cfg, 5)
        assert np.array_equal(a.weights[0], b.weights[0])
        assert np.array_equal(a.assignment, b.assignment)
        c = sample_realization(cfg, 6)
        assert not np.array_equal(a.weights[0], c.weights[0])

    def test_recurrent_stores_single_copy(self):
        r = sample_realization(dnn_cfg(architecture=Architecture.RECURRENT, depth=5))
        assert r.shared and len(r.weights) == 1 and len(r.biases) == 1
        rc = sample_realization(
            circuit_cfg(architecture=Architecture.RECURRENT, depth=5)
        )
        assert rc.shared and rc.predecessors.shape[0] == 1

    def test_layer_dependent_matrices_uncorrelated(self):
        cfg = dnn_cfg(width=20, depth=2)
        corr = []
        for index in range(100):
            r = sample_realization(cfg, index)
            w1, w2 = r.weights[0].ravel(), r.weights[1].ravel()
            corr.append(np.corrcoef(w1, w2)[0, 1])
        assert abs(np.mean(corr)) < 0.02

    def test_weight_scale(self):
        cfg = dnn_cfg(machine=DnnMachine(Activation.SIGN, sigma_w=1.0, sigma_b=0.5), width=400)
        r = sample_realization(cfg, 0)
        assert np.std(r.weights[0]) == pytest.approx(1.0, abs=0.02)
        assert np.std(r.biases[0]) == pytest.approx(0.5, abs=0.05)

    def test_circuit_out_degrees_poisson(self):
        # each of N*k predecessor slots picks uniformly: out-degree is
        # Binomial(N k, 1/N), Poisson(k) at this width
        cfg = circuit_cfg(width=10_000, depth=1, seed=3)
        r = sample_realization(cfg, 0)
        degrees = np.bincount(r.predecessors[0].ravel(), minlength=cfg.width)
        k = MAJ3.fan_in
        top = degrees.max()
        observed = np.bincount(degrees, minlength=top + 1)
        expected = stats.poisson.pmf(np.arange(top + 1), k) * cfg.width
        # pool the sparse tail so every cell has expected count >= 5
        cut = int(np.argmax(np.cumsum(expected[::-1])[::-1] < 5))
        observed = np.r_[observed[:cut], observed[cut:].sum()]
        expected = np.r_[expected[:cut], expected[cut:].sum()]
        result = stats.chisquare(observed, expected * observed.sum() / expected.sum())
        assert result.pvalue > 0.01

    def test_assignment_covers_components(self):
        cfg = dnn_cfg(width=3000, scheme=InputScheme.balanced())
        r = sample_realization(cfg, 0)
        counts = np.bincount(r.assignment, minlength=cfg.components)
        assert counts.min() > 0
        assert stats.chisquare(counts).pvalue > 0.01


def scalar_dnn_oracle(cfg, r):
    """Per-pattern reference propagation with plain Python loops."""
    from boolspace.core import input_component_matrix

    x = input_component_matrix(cfg.scheme, cfg.arity)
    n_nodes = cfg.width
    out = np.empty((n_nodes, cfg.patterns), dtype=np.int8)
    for g in range(cfg.patterns):
        s = [float(x[r.assignment[i], g]) for i in range(n_nodes)]
        h = None
        for layer in range(cfg.depth):
            w = r.weights[0 if r.shared else layer]
            b = r.biases[0 if r.shared else layer]
            h = [
                sum(w[i, j] * s[j] for j in range(n_nodes)) / math.sqrt(n_nodes)
                + b[i]
                for i in range(n_nodes)
            ]
            if cfg.machine.activation is Activation.SIGN:
                s = [-1.0 if v < 0 else 1.0 for v in h]
            else:
                s = [max(v, 0.0) for v in h]
        out[:, g] = [-1 if v < 0 else 1 for v in h]
    return out


def scalar_circuit_oracle(cfg, r):
    from boolspace.core import scheme_component_functions

    comps = scheme_component_functions(cfg.scheme, cfg.arity)
    gate = cfg.machine.gate
    out = np.empty((cfg.width, cfg.patterns), dtype=np.int8)
    for g in range(1, cfg.patterns + 1):
        spins = [comps[r.assignment[i]].spin(g) for i in range(cfg.width)]
        for layer in range(cfg.depth):
            row = 0 if r.shared else layer
            new = []
            for i in range(cfg.width):
                v = gate.output_spin([spins[p] for p in r.predecessors[row][i]])
                new.append(-v if r.negations[row][i] else v)
            spins = new
        out[:, g - 1] = spins
    return out


class TestPropagation:
    def test_dnn_matches_scalar_oracle(self):
        for arch in Architecture:
            for machine in (SIGN, DnnMachine(Activation.RELU, sigma_w=1.0, sigma_b=1.0)):
                cfg = dnn_cfg(machine=machine, width=4, depth=3, architecture=arch, seed=11)
                r = sample_realization(cfg, 2)
                assert np.array_equal(
                    propagate_all_patterns(cfg, r), scalar_dnn_oracle(cfg, r)
                )

    def test_circuit_matches_scalar_oracle_over_seeds(self):
        for seed in range(100):
            cfg = circuit_cfg(width=16, depth=4, seed=seed)
            r = sample_realization(cfg, 0)
            assert np.array_equal(
                propagate_all_patterns(cfg, r), scalar_circuit_oracle(cfg, r)
            )

    def test_circuit_negations_applied(self):
        cfg = circuit_cfg(
            machine=CircuitMachine(MAJ3, negation_p=0.4), width=16, depth=4, seed=7
        )
        r = sample_realization(cfg, 0)
        assert r.negations.any()
        assert np.array_equal(
            propagate_all_patterns(cfg, r), scalar_circuit_oracle(cfg, r)
        )

    def test_layer_zero_functions_are_components(self):
        # with depth 1 the only layer applies one gate to component words;
        # a dictator-only pool keeps outputs inside the component span
        cfg = circuit_cfg(
            machine=CircuitMachine(parse_gate("table:0x8")),
            scheme=InputScheme.biased(1.0),
            width=8,
            depth=1,
            seed=1,
        )
        r = sample_realization(cfg, 0)
        spins, states = propagate_all_patterns(cfg, r, return_states=True)
        assert len(states) == 1
        assert np.array_equal(states[0], spins)

    def test_annealed_noise_reproducible(self):
        cfg = circuit_cfg(machine=CircuitMachine(MAJ3, epsilon=0.2), width=32, depth=3)
        r = sample_realization(cfg, 4)
        a = propagate_all_patterns(cfg, r)
        b = propagate_all_patterns(cfg, r)
        assert np.array_equal(a, b)


class TestEstimate:
    def test_fast_matches_explicit_dnn(self):
        for arch in Architecture:
            cfg = dnn_cfg(width=16, depth=2, architecture=arch, seed=5)
            fast = estimate_function_distribution(cfg, 5000, engine="fast")
            explicit = estimate_function_distribution(cfg, 5000, engine="explicit")
            # engines draw different random streams; compare laws
            assert tv_distance(fast, explicit) < 0.08

    def test_fast_matches_explicit_circuit(self):
        cfg = circuit_cfg(width=32, depth=3, seed=5)
        fast = estimate_function_distribution(cfg, 5000, engine="fast")
        explicit = estimate_function_distribution(cfg, 5000, engine="explicit")
        assert tv_distance(fast, explicit) < 0.08

    def test_noisy_circuit_engines_agree(self):
        cfg = circuit_cfg(
            machine=CircuitMachine(MAJ3, epsilon=0.1, negation_p=0.2),
            width=32,
            depth=3,
            seed=2,
        )
        fast = estimate_function_distribution(cfg, 5000, engine="fast")
        explicit = estimate_function_distribution(cfg, 5000, engine="explicit")
        assert tv_distance(fast, explicit) < 0.08

    def test_deterministic_and_thread_invariant(self):
        cfg = dnn_cfg(width=32, depth=2)
        a = estimate_function_distribution(cfg, 1200, threads=1)
        b = estimate_function_distribution(cfg, 1200, threads=3)
        c = estimate_function_distribution(cfg, 1200, threads=1)
        assert a.probs == b.probs == c.probs

    def test_policy_metadata_and_sample_counts(self):
        cfg = dnn_cfg(width=16, depth=2)
        one = estimate_function_distribution(cfg, 300, policy=OneNode())
        every = estimate_function_distribution(cfg, 300, policy=AllNodes())
        assert one.samples == 300
        assert every.samples == 300 * 16
        assert not one.metadata["correlated"]
        assert every.metadata["correlated"]

    def test_unknown_engine(self):
        with pytest.raises(ValueError):
            estimate_function_distribution(dnn_cfg(), 10, engine="gpu")
        with pytest.raises(ValueError):
            estimate_function_distribution(dnn_cfg(), 0)

    def test_odd_support_sign_raw(self):
        # zero bias + odd activation + raw inputs force odd functions
        cfg = dnn_cfg(scheme=InputScheme.raw(), width=100, depth=3)
        fast = estimate_function_distribution(cfg, 1000, policy=AllNodes())
        assert fast.samples == 100_000
        assert support_is_odd(fast)
        explicit = estimate_function_distribution(
            dnn_cfg(scheme=InputScheme.raw(), width=16, depth=3),
            100,
            policy=AllNodes(),
            engine="explicit",
        )
        assert support_is_odd(explicit)

    def test_relu_deep_collapse_to_constants(self):
        cfg = dnn_cfg(
            machine=DnnMachine(Activation.RELU, sigma_w=1.0, sigma_b=1.0),
            width=200,
            depth=30,
        )
        dist = estimate_function_distribution(cfg, 2000)
        assert dist.prob(0x0) + dist.prob(0xF) >= 0.99

    def test_half_noise_circuit_uniform(self):
        cfg = circuit_cfg(
            machine=CircuitMachine(MAJ3, epsilon=0.5), width=50, depth=2
        )
        dist = estimate_function_distribution(cfg, 4000, policy=AllNodes())
        uniform = limit_distribution(LimitKind.SIGN_ALL_UNIFORM, 2)
        assert tv_distance(dist, uniform) < 0.02


class TestMeasureOverlaps:
    def test_restricted_to_sign_networks(self):
        with pytest.raises(ValueError):
            measure_overlaps(
                dnn_cfg(machine=DnnMachine(Activation.RELU, sigma_w=1.0, sigma_b=1.0)),
                20,
            )
        with pytest.raises(ValueError):
            measure_overlaps(circuit_cfg(), 20)

    def test_layer_zero_matches_scheme_overlap(self):
        from boolspace.core import initial_overlap_matrix

        cfg = dnn_cfg(width=500, depth=2, seed=8)
        meas = measure_overlaps(cfg, 200)
        q0 = initial_overlap_matrix(cfg.scheme, cfg.arity)
        dev = np.abs(meas.mean[0, 0] - q0)
        band = 4 * meas.stderr[0, 0] + 1e-12  # diagonal entries are exact
        assert np.all(dev <= band)

    def test_equal_layer_matches_recursion(self):
        from boolspace.meanfield import KernelSpec, propagate_overlaps

        machine = DnnMachine(Activation.SIGN, sigma_w=1.0, sigma_b=0.5)
        cfg = dnn_cfg(machine=machine, width=500, depth=3, seed=8)
        meas = measure_overlaps(cfg, 200)
        theory = propagate_overlaps(machine.kernel_spec, cfg.scheme, cfg.arity, 4)
        for layer in range(4):
            dev = np.abs(meas.mean[layer, layer] - theory[layer].values)
            band = 4 * meas.stderr[layer, layer] + 1e-12
            assert np.all(dev <= band)

    def test_cross_layer_vanishes_without_bias(self):
        cfg = dnn_cfg(width=500, depth=3, seed=8)
        meas = measure_overlaps(cfg, 200)
        for a in range(4):
            for b in range(4):
                if a != b:
                    assert np.all(
                        np.abs(meas.mean[a, b]) <= 4 * meas.stderr[a, b] + 1e-12
                    )

    def test_accessor_is_one_based_in_patterns(self):
        cfg = dnn_cfg(width=64, depth=2)
        meas = measure_overlaps(cfg, 50)
        assert meas.q(1, 1, 2, 3) == meas.mean[1, 1, 1, 2]

    def test_single_realization_has_no_stderr(self):
        meas = measure_overlaps(dnn_cfg(width=32, depth=2), 1)
        assert np.all(np.isnan(meas.stderr))

    def test_self_averaging_variance_slope(self):
        # per-realization overlap fluctuations shrink like 1/width
        variances = []
        widths = [100, 1000, 10_000]
        for width in widths:
            cfg = dnn_cfg(width=width, depth=2, seed=13)
            meas = measure_overlaps(cfg, 80)
            var = meas.stderr[1, 1, 0, 1] ** 2 * meas.realizations
            variances.append(var)
        slope = np.polyfit(np.log(widths), np.log(variances), 1)[0]
        assert -1.2 < slope < -0.8

    def test_csv_schema(self, tmp_path):
        cfg = dnn_cfg(width=32, depth=2)
        meas = measure_overlaps(cfg, 20)
        path = tmp_path / "overlap.csv"
        write_overlap_measurement_csv(path, meas)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "l,l_prime,gamma,gamma_prime,q_hat,stderr"
        first = lines[1].split(",")
        assert first[0] == "0" and first[2] == "1"
        # layers 0..depth inclusive, all ordered pattern pairs
        assert len(lines) == 1 + 3 * 3 * 16


class TestCompare:
    def test_report_structure_and_serialization(self, tmp_path):
        comp = compare_architectures(
            SIGN, 64, 2, 2, InputScheme.biased(1.0), seed=21, realizations=1000
        )
        assert isinstance(comp, ArchitectureComparison)
        assert comp.arm_seeds[0] != comp.arm_seeds[1]
        assert comp.realizations == 1000
        assert 0 <= comp.tv_observed <= 1
        # resampling adds noise on top of the realized difference, so the
        # interval brackets its own draws, not necessarily the point value
        assert comp.tv_bootstrap_interval[0] <= comp.tv_bootstrap_interval[1]
        assert comp.tv_null_interval[0] <= comp.tv_null_mean <= comp.tv_null_interval[1]
        assert comp.dist_layer_dependent is not None
        assert comp.dist_recurrent is not None
        assert comp.reference is not None
        path = tmp_path / "comp.json"
        write_comparison_json(path, comp)
        payload = json.loads(path.read_text())
        assert set(payload) == {
            "tv_observed",
            "tv_bootstrap_interval",
            "tv_null_mean",
            "tv_null_interval",
            "within_null",
            "kl_layer_dependent",
            "kl_recurrent",
            "realizations",
            "seed",
            "arm_seeds",
        }
        json.dumps(payload)

    def test_circuit_reference_is_gas_recursion(self):
        comp = compare_architectures(
            CircuitMachine(MAJ3),
            64,
            3,
            2,
            InputScheme.balanced(),
            seed=21,
            realizations=1000,
        )
        start = initial_function_distribution(InputScheme.balanced(), 2)
        expect = evolve_exact(start, MAJ3, 3)[-1]
        assert tv_distance(comp.reference, expect) < 1e-12

    def test_kl_to_theory_decreases_with_width(self):
        cov = covariance_at_layer(SIGN.kernel_spec, InputScheme.biased(1.0), 2, 4)
        theory = dnn_function_distribution(cov, MonteCarlo(200_000, 77))
        kls = []
        for width in (8, 256):
            cfg = dnn_cfg(width=width, depth=4, seed=31)
            dist = estimate_function_distribution(cfg, 4000)
            kls.append(kl_divergence(dist, theory))
        assert kls[1] < kls[0]

    def test_realization_floor(self):
        with pytest.raises(ValueError):
            compare_architectures(
                SIGN, 64, 2, 2, InputScheme.biased(1.0), seed=0, realizations=500
            )
