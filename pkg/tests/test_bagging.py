import numpy as np
import pytest

from random_machines import (
    KernelFamily,
    KernelSpec,
    SimSpec,
    SvrParams,
    bootstrap_sample,
    generate,
    member_predictions,
    predict_bagged,
    predict_svr,
    train_bagged_svr,
    train_svr,
)

GAU = KernelSpec(KernelFamily.GAUSSIAN, 1.0)


class TestBootstrap:
    def test_single_row(self):
        draw = bootstrap_sample(1, np.random.default_rng(0))
        np.testing.assert_array_equal(draw.in_bag, [0])
        assert draw.oob.size == 0

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            bootstrap_sample(0, np.random.default_rng(0))

    def test_complement_invariant(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(1, 60))
            draw = bootstrap_sample(n, rng)
            assert draw.in_bag.shape == (n,)
            in_set = set(draw.in_bag.tolist())
            oob_set = set(draw.oob.tolist())
            assert in_set.isdisjoint(oob_set)
            assert in_set | oob_set == set(range(n))
            assert np.all(np.diff(draw.oob) > 0)  # sorted

    def test_fixed_seed_reproduces_draw(self):
        a = bootstrap_sample(50, np.random.default_rng(123))
        b = bootstrap_sample(50, np.random.default_rng(123))
        np.testing.assert_array_equal(a.in_bag, b.in_bag)
        np.testing.assert_array_equal(a.oob, b.oob)

    def test_oob_fraction_monte_carlo(self):
        # smaller sibling of the acceptance check: (1 - 1/n)^n -> 1/e
        rng = np.random.default_rng(7)
        n = 500
        fracs = [bootstrap_sample(n, rng).oob.size / n for _ in range(2000)]
        assert 0.355 <= np.mean(fracs) <= 0.38


@pytest.fixture(scope="module")
def small_data():
    return generate(SimSpec(1, 60, 5))


class TestBaggedSvr:
    def test_single_member_equals_one_svr(self, small_data):
        model = train_bagged_svr(small_data, GAU, 1, SvrParams(), np.random.default_rng(3))
        idx = model.draws[0].in_bag
        lone = train_svr(small_data.features[idx], small_data.target[idx], GAU, SvrParams())
        Xq = np.random.default_rng(0).uniform(size=(10, 2))
        np.testing.assert_allclose(predict_bagged(model, Xq), predict_svr(lone, Xq), atol=1e-12)

    def test_constant_target_propagates(self):
        ds = generate(SimSpec(1, 30, 2), include_noise=False)
        ds.target[:] = 4.0
        model = train_bagged_svr(ds, GAU, 5, SvrParams(), np.random.default_rng(0))
        Xq = np.random.default_rng(1).uniform(size=(6, 2))
        for m in model.members:
            np.testing.assert_allclose(predict_svr(m, Xq), 4.0)
        np.testing.assert_allclose(predict_bagged(model, Xq), 4.0)

    def test_prediction_is_exact_member_mean(self, small_data):
        model = train_bagged_svr(small_data, GAU, 3, SvrParams(), np.random.default_rng(9))
        Xq = np.random.default_rng(2).uniform(size=(5, 2))
        preds = np.vstack([predict_svr(m, Xq) for m in model.members])
        np.testing.assert_allclose(predict_bagged(model, Xq), preds.mean(axis=0), atol=1e-14)

    def test_member_order_does_not_change_prediction(self, small_data):
        model = train_bagged_svr(small_data, GAU, 4, SvrParams(), np.random.default_rng(11))
        Xq = np.random.default_rng(3).uniform(size=(7, 2))
        shuffled = type(model)(
            members=model.members[::-1], kernel=model.kernel, draws=model.draws[::-1]
        )
        np.testing.assert_allclose(
            predict_bagged(model, Xq), predict_bagged(shuffled, Xq), atol=1e-14
        )

    def test_two_synthetic_members_average(self):
        from random_machines.svr import SvrModel

        def const_member(c):
            return SvrModel(
                support_vectors=np.empty((0, 2)),
                coeffs=np.empty(0),
                bias=c,
                kernel=GAU,
                params=SvrParams(),
                support_indices=np.empty(0, dtype=np.int64),
            )

        preds = member_predictions((const_member(1.0), const_member(3.0)), np.zeros((4, 2)))
        np.testing.assert_allclose(preds.mean(axis=0), 2.0)

    def test_deterministic_given_seed(self, small_data):
        a = train_bagged_svr(small_data, GAU, 6, SvrParams(), np.random.default_rng(21))
        b = train_bagged_svr(small_data, GAU, 6, SvrParams(), np.random.default_rng(21))
        for ma, mb in zip(a.members, b.members):
            np.testing.assert_array_equal(ma.coeffs, mb.coeffs)
            assert ma.bias == mb.bias
        for da, db in zip(a.draws, b.draws):
            np.testing.assert_array_equal(da.in_bag, db.in_bag)

    def test_tiny_dataset_redraws_until_two_distinct_rows(self):
        ds = generate(SimSpec(1, 2, 8))
        model = train_bagged_svr(ds, GAU, 20, SvrParams(), np.random.default_rng(5))
        for draw in model.draws:
            assert np.unique(draw.in_bag).size >= 2

    def test_validation(self, small_data):
        with pytest.raises(ValueError):
            train_bagged_svr(small_data, GAU, 0, SvrParams(), np.random.default_rng(0))
        one_row = generate(SimSpec(1, 1, 0))
        with pytest.raises(ValueError):
            train_bagged_svr(one_row, GAU, 2, SvrParams(), np.random.default_rng(0))

    def test_member_failure_annotated(self, small_data):
        bad = SvrParams(C=100.0, epsilon=0.0, tol=1e-12, max_iter=3)
        with pytest.raises(RuntimeError, match="member 0"):
            train_bagged_svr(small_data, GAU, 2, bad, np.random.default_rng(0))
