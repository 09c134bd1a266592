import numpy as np
import pytest

from random_machines.harness import (
    CsvSource,
    ExperimentConfig,
    MethodSpec,
    ResultRecord,
    ResultsTable,
    SimSource,
    beta_sweep,
    gamma_sweep,
    paper_methods,
    run_repeated_holdout,
    summarize_beta_sweep,
    summarize_gamma_sweep,
    summarize_results,
    win_proportions,
    _split_indices,
)
from random_machines.kernels import KernelFamily, KernelSpec, default_kernels
from random_machines.svr import SvrParams

GAU = KernelSpec(KernelFamily.GAUSSIAN, 1.0)


def small_config(**kw):
    defaults = dict(
        source=SimSource(1, 60, noise_sd_override=0.1),
        methods=(MethodSpec("svr", "SVR.Gau", kernel=GAU),),
        repetitions=1,
        master_seed=5,
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestRunRepeatedHoldout:
    def test_single_rep_single_method_one_rmse_record(self):
        table = run_repeated_holdout(small_config())
        rmse_records = [r for r in table.records if r.metric == "rmse"]
        assert len(rmse_records) == 1
        assert rmse_records[0].method == "SVR.Gau"
        assert np.isfinite(rmse_records[0].value)

    def test_deterministic_given_master_seed(self):
        methods = (
            MethodSpec("svr", "SVR.Gau", kernel=GAU),
            MethodSpec("bsvr", "BSVR.Gau", kernel=GAU, n_members=4),
            MethodSpec("rrm", "RRM", kernels=tuple(default_kernels()), n_members=4),
        )
        a = run_repeated_holdout(small_config(methods=methods, repetitions=3))
        b = run_repeated_holdout(small_config(methods=methods, repetitions=3))
        assert a.records == b.records

    def test_threads_do_not_change_results(self):
        methods = (
            MethodSpec("svr", "SVR.Gau", kernel=GAU),
            MethodSpec("bsvr", "BSVR.Lap", kernel=KernelSpec(KernelFamily.LAPLACIAN, 1.0), n_members=3),
        )
        serial = run_repeated_holdout(small_config(methods=methods, repetitions=4, threads=1))
        threaded = run_repeated_holdout(small_config(methods=methods, repetitions=4, threads=4))
        assert serial.records == threaded.records

    def test_error_score_recorded_across_methods(self):
        methods = (
            MethodSpec("svr", "SVR.Gau", kernel=GAU),
            MethodSpec("svr", "SVR.Lin", kernel=KernelSpec(KernelFamily.LINEAR, 1.0)),
        )
        table = run_repeated_holdout(small_config(methods=methods, repetitions=2))
        es = [r for r in table.records if r.metric == "error_score"]
        assert len(es) == 4  # 2 methods x 2 repetitions
        per_rep = {}
        for r in es:
            per_rep.setdefault(r.repetition, []).append(r.value)
        for values in per_rep.values():
            assert sorted(values) == [0.0, 1.0]  # two methods -> best 0, worst 1

    def test_agreement_only_for_ensembles(self):
        methods = (
            MethodSpec("svr", "SVR.Gau", kernel=GAU),
            MethodSpec("bsvr", "BSVR.Gau", kernel=GAU, n_members=3),
        )
        table = run_repeated_holdout(small_config(methods=methods))
        agr = {r.method for r in table.records if r.metric == "agreement"}
        assert agr == {"BSVR.Gau"}

    def test_split_disjoint_exhaustive_and_rounded_down(self):
        rng = np.random.default_rng(0)
        for n in (10, 30, 101):
            tr, te = _split_indices(n, 0.7, rng)
            assert len(tr) == max(2, int(np.floor(0.7 * n)))
            assert len(tr) + len(te) == n
            assert set(tr.tolist()).isdisjoint(te.tolist())
            assert set(tr.tolist()) | set(te.tolist()) == set(range(n))

    def test_all_methods_see_identical_split(self):
        # two copies of the same method spec must produce identical rmse
        methods = (
            MethodSpec("svr", "first", kernel=GAU),
            MethodSpec("svr", "second", kernel=GAU),
        )
        table = run_repeated_holdout(small_config(methods=methods, repetitions=3))
        a = table.values("rmse", "first")
        b = table.values("rmse", "second")
        np.testing.assert_array_equal(a, b)

    def test_method_failure_recorded_as_missing(self):
        methods = (
            MethodSpec("svr", "SVR.Gau", kernel=GAU),
            MethodSpec("svr", "Broken", kernel=GAU,
                       params=SvrParams(C=100.0, epsilon=0.0, tol=1e-13, max_iter=2)),
        )
        table = run_repeated_holdout(small_config(methods=methods, repetitions=2))
        broken_rmse = table.values("rmse", "Broken")
        assert np.all(np.isnan(broken_rmse))
        assert len([r for r in table.records if r.metric == "failure"]) == 2
        # error score degenerates to a single method -> none recorded
        assert len([r for r in table.records if r.metric == "error_score"]) == 0
        assert np.isfinite(table.values("rmse", "SVR.Gau")).all()

    def test_csv_source_standardizes_per_repetition(self, tmp_path):
        from random_machines import SimSpec, generate, write_csv

        ds = generate(SimSpec(1, 50, 3))
        ds.features[:, 0] = ds.features[:, 0] * 100 + 17  # far from unit scale
        path = str(tmp_path / "wide.csv")
        write_csv(ds, path)
        cfg = small_config(source=CsvSource(path=path, target="y"), repetitions=2)
        table = run_repeated_holdout(cfg)
        assert np.isfinite(table.values("rmse", "SVR.Gau")).all()

    def test_inner_pilot_split_runs_and_differs_from_test_wiring(self):
        methods = (MethodSpec("rrm", "RRM", kernels=tuple(default_kernels()), n_members=5),)
        on_test = run_repeated_holdout(small_config(methods=methods, repetitions=2))
        inner = run_repeated_holdout(
            small_config(methods=methods, repetitions=2, pilot_split="inner")
        )
        assert np.isfinite(inner.values("rmse", "RRM")).all()
        # pilots see different data, so the fitted ensembles diverge
        assert not np.array_equal(on_test.values("rmse", "RRM"), inner.values("rmse", "RRM"))
        again = run_repeated_holdout(
            small_config(methods=methods, repetitions=2, pilot_split="inner")
        )
        assert inner.records == again.records


class TestPaperMethods:
    def test_nine_methods_with_standard_names(self):
        methods = paper_methods()
        assert [m.name for m in methods] == [
            "SVR.Lin", "SVR.Pol", "SVR.Gau", "SVR.Lap",
            "BSVR.Lin", "BSVR.Pol", "BSVR.Gau", "BSVR.Lap", "RRM",
        ]
        assert methods[-1].kind == "rrm"
        assert len(methods[-1].kernels) == 4


class TestWinProportions:
    def _table(self, rows):
        t = ResultsTable()
        for method, rep, value in rows:
            t.append(ResultRecord("d", method, rep, "rmse", value, ""))
        return t

    def test_always_better_method(self):
        t = self._table([("a", r, 1.0) for r in range(3)] + [("b", r, 2.0) for r in range(3)])
        methods, m = win_proportions(t)
        ia, ib = methods.index("a"), methods.index("b")
        assert m[ia, ib] == 1.0 and m[ib, ia] == 0.0

    def test_ties_split_evenly(self):
        t = self._table([("a", 0, 1.0), ("b", 0, 1.0)])
        methods, m = win_proportions(t)
        assert m[0, 1] == 0.5 and m[1, 0] == 0.5

    def test_two_of_three_wins(self):
        t = self._table([
            ("a", 0, 1.0), ("b", 0, 2.0),
            ("a", 1, 1.0), ("b", 1, 2.0),
            ("a", 2, 3.0), ("b", 2, 2.0),
        ])
        methods, m = win_proportions(t)
        ia, ib = methods.index("a"), methods.index("b")
        assert m[ia, ib] == pytest.approx(2 / 3)
        assert m[ia, ib] + m[ib, ia] == pytest.approx(1.0)

    def test_nan_records_ignored(self):
        t = self._table([("a", 0, 1.0), ("b", 0, float("nan")), ("a", 1, 1.0), ("b", 1, 2.0)])
        _, m = win_proportions(t)
        assert m[0, 1] == 1.0

    def test_no_overlap_raises(self):
        t = self._table([("a", 0, 1.0)])
        with pytest.raises(ValueError):
            win_proportions(t)


class TestSweeps:
    def _rrm_config(self, reps=1):
        return small_config(
            methods=(
                MethodSpec("svr", "SVR.Gau", kernel=GAU),
                MethodSpec("rrm", "RRM", kernels=tuple(default_kernels()), n_members=4),
            ),
            repetitions=reps,
        )

    def test_default_beta_grid_spacing(self):
        grid = np.linspace(0.0, 5.0, 21)
        assert grid.size == 21
        np.testing.assert_allclose(np.diff(grid), 0.25)

    def test_beta_sweep_runs_only_rrm_and_tags_records(self):
        table = beta_sweep(self._rrm_config(), grid=np.array([0.0, 1.0]))
        assert set(r.method for r in table.records) == {"RRM"}
        betas = {r.params.split(" ")[0] for r in table.records}
        assert betas == {"beta=0.0", "beta=1.0"}
        rows = summarize_beta_sweep(table)
        assert [r["beta"] for r in rows] == [0.0, 1.0]
        assert all(np.isfinite(r["mean_rmse"]) for r in rows)

    def test_beta_sweep_requires_rrm(self):
        with pytest.raises(ValueError):
            beta_sweep(small_config(), grid=np.array([0.0]))

    def test_beta_zero_point_has_uniform_member_weights(self):
        from random_machines import RrmConfig, SimSpec, generate, train_rrm

        ds = generate(SimSpec(1, 60, 5), noise_sd_override=0.1)
        train, hold = ds.subset(np.arange(40)), ds.subset(np.arange(40, 60))
        model = train_rrm(train, hold, RrmConfig(tuple(default_kernels()), n_members=6, beta=0.0),
                          np.random.default_rng(0))
        np.testing.assert_allclose(model.member_weights, 1 / 6, atol=1e-15)

    def test_gamma_sweep_default_grid_and_summary(self):
        table = gamma_sweep(self._rrm_config())
        gammas = sorted({float(r.params.split(" ")[0].split("=")[1]) for r in table.records})
        assert gammas == [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
        rows = summarize_gamma_sweep(table)
        assert len(rows) == 7 * 2  # 7 gammas x 2 methods

    def test_gamma_one_column_matches_plain_run(self):
        cfg = self._rrm_config()
        sweep_table = gamma_sweep(cfg, grid=np.array([1.0]))
        plain = run_repeated_holdout(cfg)
        sweep_rmse = sorted(
            (r.method, r.repetition, r.value) for r in sweep_table.records if r.metric == "rmse"
        )
        plain_rmse = sorted(
            (r.method, r.repetition, r.value) for r in plain.records if r.metric == "rmse"
        )
        assert sweep_rmse == plain_rmse  # same seeds, same parameters

    def test_gamma_sweep_rrm_beats_single_kernel_bagging(self):
        # grid-averaged error score, desk scale; the slowest test outside the
        # acceptance module (about two minutes)
        scales = {1: (150, 4, 20), 2: (200, 6, 30), 3: (150, 4, 20)}
        for model_id, (n, reps, members) in scales.items():
            if model_id == 1:
                src = SimSource(1, n, noise_sd_override=0.1)
            else:
                src = SimSource(model_id, n, noise_arg="sd")
            cfg = ExperimentConfig(
                source=src,
                methods=tuple(paper_methods(n_members=members)),
                repetitions=reps,
                master_seed=5150 + model_id,
            )
            rows = summarize_gamma_sweep(gamma_sweep(cfg))
            per_method: dict[str, list[float]] = {}
            for r in rows:
                per_method.setdefault(r["method"], []).append(r["mean_error_score"])
            means = {m: float(np.nanmean(v)) for m, v in per_method.items()}
            for name in ("BSVR.Lin", "BSVR.Pol", "BSVR.Gau", "BSVR.Lap"):
                assert means["RRM"] < means[name], (model_id, name, means)


class TestResultsTable:
    def test_csv_round_trip(self, tmp_path):
        table = run_repeated_holdout(small_config(repetitions=2))
        path = str(tmp_path / "results.csv")
        table.to_csv(path)
        back = ResultsTable.from_csv(path)
        assert back.records == table.records

    def test_append_preserves_prior_records(self):
        t = ResultsTable()
        r1 = ResultRecord("d", "m", 0, "rmse", 1.0, "")
        r2 = ResultRecord("d", "m", 1, "rmse", 2.0, "")
        t.append(r1)
        t.append(r2)
        assert t.records == [r1, r2]

    def test_summary_rows(self):
        table = run_repeated_holdout(small_config(repetitions=3))
        rows = summarize_results(table)
        assert len(rows) == 1
        assert rows[0]["n_rmse"] == 3
        assert np.isfinite(rows[0]["mean_rmse"])
