import numpy as np
import pytest

from poisonlab import kde
from poisonlab.attack import (
    AttackConfig,
    PoisonBatch,
    clip,
    default_prototype_count,
    generate_poison_batch,
    psi,
    run_beta_poisoning,
    sample_prototypes,
)
from poisonlab.data import make_gaussian_2d


@pytest.fixture(scope="module")
def gauss_val():
    return make_gaussian_2d(100, (0.0, 0.0), (5.0, 5.0), 0.5, seed=0)


class TestPsi:
    def test_unit_vector_returns_prototype(self):
        protos = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(psi(np.array([0.0, 1.0]), protos), protos[1])

    def test_midpoint(self):
        protos = np.array([[0.0, 2.0], [2.0, 0.0]])
        assert np.array_equal(psi(np.array([0.5, 0.5]), protos), [1.0, 1.0])

    def test_zero_coefficients(self):
        assert np.array_equal(psi(np.zeros(3), np.ones((3, 4))), np.zeros(4))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="match"):
            psi(np.zeros(2), np.ones((3, 4)))


class TestClip:
    def test_inside_unchanged(self):
        x = np.array([0.5, 0.25])
        assert np.array_equal(clip(x, np.zeros(2), np.ones(2)), x)

    def test_clamps_both_sides(self):
        out = clip(np.array([-0.3, 1.7]), np.zeros(2), np.ones(2))
        assert np.array_equal(out, [0.0, 1.0])

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        x = rng.normal(scale=3.0, size=10)
        lb, ub = -np.ones(10), np.ones(10)
        once = clip(x, lb, ub)
        assert np.array_equal(clip(once, lb, ub), once)


class TestSamplePrototypes:
    def test_rows_carry_target_class(self, gauss_val):
        rng = np.random.default_rng(1)
        protos = sample_prototypes(gauss_val, 1, 5, rng)
        assert protos.prototypes.shape == (5, 2)
        assert (gauss_val.labels[protos.source_indices] == 1).all()
        assert len(set(protos.source_indices.tolist())) == 5

    def test_too_few_samples(self, gauss_val):
        rng = np.random.default_rng(1)
        with pytest.raises(ValueError, match="prototypes"):
            sample_prototypes(gauss_val, 1, 101, rng)


class TestDefaults:
    def test_prototype_count_by_dimension(self):
        assert default_prototype_count(784) == 15
        assert default_prototype_count(1000) == 15
        assert default_prototype_count(1001) == 30

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AttackConfig(alpha=0.0)
        with pytest.raises(ValueError):
            AttackConfig(stop_threshold=-1.0)
        with pytest.raises(ValueError):
            AttackConfig(k=0)
        with pytest.raises(ValueError):
            AttackConfig(lower_bound=np.ones(2), upper_bound=np.zeros(2))


class TestRunBetaPoisoning:
    def test_feasible_and_deterministic(self, gauss_val):
        cfg = AttackConfig(k=5, seed=42)
        p1, t1 = run_beta_poisoning(gauss_val, 0, cfg)
        p2, t2 = run_beta_poisoning(gauss_val, 0, cfg)
        assert np.array_equal(p1, p2)
        assert t1.iterations == t2.iterations
        assert (p1 >= gauss_val.lower_bound).all()
        assert (p1 <= gauss_val.upper_bound).all()

    def test_final_likelihood_beats_every_prototype(self, gauss_val):
        cfg = AttackConfig(k=5, seed=7)
        point, tele = run_beta_poisoning(gauss_val, 0, cfg)
        est = kde.fit(gauss_val, 0)
        proto_likelihoods = [
            kde.likelihood(est, gauss_val.features[i])
            for i in tele.prototype_indices
        ]
        assert tele.final_likelihood >= max(proto_likelihoods)

    def test_telemetry_matches_reported_point(self, gauss_val):
        cfg = AttackConfig(k=5, seed=3)
        point, tele = run_beta_poisoning(gauss_val, 0, cfg)
        est = kde.fit(gauss_val, 0)
        assert kde.likelihood(est, point) == tele.final_likelihood

    def test_stop_condition_before_cap(self, gauss_val):
        cfg = AttackConfig(k=5, seed=11)
        _, tele = run_beta_poisoning(gauss_val, 0, cfg)
        assert not tele.hit_iter_cap
        assert tele.iterations < cfg.max_iters

    def test_final_at_least_initial_minus_threshold(self, gauss_val):
        for seed in range(10):
            cfg = AttackConfig(k=5, seed=seed)
            _, tele = run_beta_poisoning(gauss_val, 0, cfg)
            assert tele.final_likelihood >= tele.initial_likelihood - cfg.stop_threshold

    def test_too_few_class_samples(self):
        ds = make_gaussian_2d(3, (0, 0), (5, 5), 0.5, seed=1)
        with pytest.raises(ValueError, match="need"):
            run_beta_poisoning(ds, 0, AttackConfig(k=5))

    def test_chain_rule_gradient_matches_finite_differences(self):
        # with no active clipping, d p / d beta_i = <grad_x P, prototype_i>
        rng = np.random.default_rng(13)
        for _ in range(20):
            k, d = 4, 3
            protos = rng.normal(size=(k, d))
            bank = rng.normal(size=(10, d))
            h = kde.compute_bandwidth(bank)
            est = kde.KdeEstimate(bank, h, 0)
            beta = rng.uniform(0.2, 0.8, size=k)

            def p_of(b):
                return kde.likelihood(est, b @ protos)

            grad_x = kde.likelihood_grad(est, beta @ protos)
            analytic = protos @ grad_x
            step = 1e-6
            for i in range(k):
                hi, lo = beta.copy(), beta.copy()
                hi[i] += step
                lo[i] -= step
                fd = (p_of(hi) - p_of(lo)) / (2 * step)
                assert abs(fd - analytic[i]) < 1e-5


class TestGeneratePoisonBatch:
    def test_zero_points_rejected(self, gauss_val):
        with pytest.raises(ValueError, match="at least 1"):
            generate_poison_batch(gauss_val, 0, AttackConfig(k=5))

    def test_binary_labels_are_complements(self, gauss_val):
        batch = generate_poison_batch(gauss_val, 8, AttackConfig(k=5, seed=2))
        assert batch.m == 8
        assert np.array_equal(batch.labels, 1 - batch.target_classes)

    def test_batch_feasible_and_deterministic(self, gauss_val):
        cfg = AttackConfig(k=5, seed=9)
        a = generate_poison_batch(gauss_val, 5, cfg)
        b = generate_poison_batch(gauss_val, 5, cfg)
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.labels, b.labels)
        assert (a.points >= gauss_val.lower_bound).all()
        assert (a.points <= gauss_val.upper_bound).all()

    def test_explicit_label_policy(self, gauss_val):
        batch = generate_poison_batch(gauss_val, 3, AttackConfig(k=5, seed=4),
                                      label_policy=(1, 0))
        assert (batch.target_classes == 1).all()
        assert (batch.labels == 0).all()

    def test_label_policy_rejects_equal_pair(self, gauss_val):
        with pytest.raises(ValueError, match="differ"):
            generate_poison_batch(gauss_val, 1, AttackConfig(k=5),
                                  label_policy=(1, 1))

    def test_csv_export(self, gauss_val, tmp_path):
        batch = generate_poison_batch(gauss_val, 2, AttackConfig(k=5, seed=6))
        path = tmp_path / "poison.csv"
        batch.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "y_t,y_p,iters,final_p,f0,f1"
        assert len(lines) == 3


class TestPoisonBatchType:
    def test_m_property(self):
        batch = PoisonBatch(np.zeros((4, 2)), np.zeros(4, dtype=int),
                            np.ones(4, dtype=int))
        assert batch.m == 4
