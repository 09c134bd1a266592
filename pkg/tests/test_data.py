import numpy as np
import pytest

from random_machines import SimSpec, generate, load_csv, write_csv
from random_machines.data import apply_schema, fit_standardizer, apply_standardizer


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoadCsv:
    def test_standardizes_to_sample_sd(self, tmp_path):
        path = _write(tmp_path, "a,y\n1,10\n2,20\n3,30\n")
        ds = load_csv(path, "y")
        np.testing.assert_allclose(ds.features[:, 0], [-1.0, 0.0, 1.0])
        np.testing.assert_array_equal(ds.target, [10.0, 20.0, 30.0])
        assert ds.scaling.columns == ("a",)
        assert ds.scaling.means[0] == 2.0

    def test_standardization_invariant(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = ["a,b,y"] + [f"{rng.normal():.6f},{rng.uniform(5, 9):.6f},{rng.normal():.6f}" for _ in range(40)]
        ds = load_csv(_write(tmp_path, "\n".join(rows) + "\n"), "y")
        assert np.all(np.abs(ds.features.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(ds.features.std(axis=0, ddof=1) - 1.0) < 1e-9)

    def test_one_hot_levels_sum_to_one(self, tmp_path):
        path = _write(tmp_path, "kind,y\na,1\nb,2\na,3\n")
        ds = load_csv(path, "y", categorical_columns=("kind",))
        assert [c.name for c in ds.columns] == ["kind=a", "kind=b"]
        np.testing.assert_array_equal(ds.features.sum(axis=1), 1.0)
        assert all(c.kind == "categorical" for c in ds.columns)

    def test_constant_column_dropped_with_warning(self, tmp_path):
        path = _write(tmp_path, "a,b,y\n5,1,1\n5,2,2\n5,3,3\n")
        with pytest.warns(UserWarning, match="constant column 'a'"):
            ds = load_csv(path, "y")
        assert [c.name for c in ds.columns] == ["b"]

    def test_bad_rows_dropped_with_count(self, tmp_path):
        path = _write(tmp_path, "a,y\n1,1\noops,2\n3,3\n4,\n5,5\n")
        with pytest.warns(UserWarning, match="dropped 2 rows"):
            ds = load_csv(path, "y", scale=False)
        np.testing.assert_array_equal(ds.features[:, 0], [1.0, 3.0, 5.0])

    def test_missing_file_and_target(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(str(tmp_path / "nope.csv"), "y")
        path = _write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(ValueError, match="target column"):
            load_csv(path, "y")

    def test_no_usable_rows(self, tmp_path):
        path = _write(tmp_path, "a,y\nx,1\nz,2\n")
        with pytest.warns(UserWarning):
            with pytest.raises(ValueError, match="no usable rows"):
                load_csv(path, "y")


class TestRoundTrip:
    def test_generated_dataset_round_trips_bit_exactly(self, tmp_path):
        ds = generate(SimSpec(3, 50, 9))
        path = str(tmp_path / "gen.csv")
        write_csv(ds, path)
        back = load_csv(path, "y", scale=False)
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.target, ds.target)
        write_csv(back, str(tmp_path / "gen2.csv"))
        assert (tmp_path / "gen.csv").read_bytes() == (tmp_path / "gen2.csv").read_bytes()

    def test_load_write_load_identical(self, tmp_path):
        rng = np.random.default_rng(1)
        rows = ["a,b,y"] + [f"{rng.normal()!r},{rng.normal()!r},{rng.normal()!r}" for _ in range(25)]
        first = load_csv(_write(tmp_path, "\n".join(rows) + "\n"), "y")
        out = str(tmp_path / "second.csv")
        write_csv(first, out)
        second = load_csv(out, "y")
        np.testing.assert_allclose(second.features, first.features, atol=1e-9)
        np.testing.assert_array_equal(second.target, first.target)
        assert [c.name for c in second.columns] == [c.name for c in first.columns]


class TestSchema:
    def test_schema_reapplies_training_transform(self, tmp_path):
        train = _write(tmp_path, "a,kind,y\n1,u,1\n2,v,2\n3,u,3\n", "train.csv")
        ds = load_csv(train, "y", categorical_columns=("kind",))
        new = _write(tmp_path, "a,kind,y\n2,v,5\n", "new.csv")
        X, y = apply_schema(ds.schema, "y", new)
        # a=2 standardizes with the training mean/sd (2, 1) -> 0
        np.testing.assert_allclose(X, [[0.0, 0.0, 1.0]])
        np.testing.assert_array_equal(y, [5.0])

    def test_unseen_level_maps_to_zero_indicators(self, tmp_path):
        train = _write(tmp_path, "kind,y\nu,1\nv,2\n", "t.csv")
        ds = load_csv(train, "y", categorical_columns=("kind",))
        new = _write(tmp_path, "kind\nw\n", "n.csv")
        X, y = apply_schema(ds.schema, "y", new)
        np.testing.assert_array_equal(X, [[0.0, 0.0]])
        assert y is None

    def test_missing_column_rejected(self, tmp_path):
        train = _write(tmp_path, "a,y\n1,1\n2,2\n", "t.csv")
        ds = load_csv(train, "y")
        new = _write(tmp_path, "b\n1\n", "n.csv")
        with pytest.raises(ValueError, match="missing required columns"):
            apply_schema(ds.schema, "y", new)


class TestStandardizer:
    def test_fit_apply_on_training_rows_only(self):
        X = np.array([[1.0, 0.0], [2.0, 1.0], [3.0, 0.0]])
        cont = np.array([True, False])
        means, sds, keep = fit_standardizer(X, cont)
        out = apply_standardizer(X, means, sds, keep)
        np.testing.assert_allclose(out[:, 0], [-1.0, 0.0, 1.0])
        np.testing.assert_array_equal(out[:, 1], X[:, 1])  # indicator untouched

    def test_constant_continuous_column_dropped(self):
        X = np.array([[1.0, 7.0], [2.0, 7.0]])
        cont = np.array([True, True])
        means, sds, keep = fit_standardizer(X, cont)
        assert keep.tolist() == [True, False]
        assert apply_standardizer(X, means, sds, keep).shape == (2, 1)
