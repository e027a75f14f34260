import pytest

import ctximp


def test_problem1_oracle_matches_exact_values():
    dist = ctximp.distribution_from_dataset(ctximp.generate("problem1"))
    assert dist.n_inputs == 3
    assert ctximp.asymptotic_mdi(dist, 0) == pytest.approx(1.0, abs=1e-12)
    s = ctximp.asymptotic_contextual(dist, 1, 0)
    assert s["abs"] == pytest.approx(0.375, abs=1e-12)
    assert s["signed"] == pytest.approx(-0.375, abs=1e-12)
    assert s["baseline"] == pytest.approx(0.5, abs=1e-12)
    total = sum(ctximp.asymptotic_mdi(dist, m) for m in range(3))
    assert total == pytest.approx(ctximp.joint_mutual_information(dist), abs=1e-10)


def test_example1_definitions():
    dist = ctximp.distribution_from_dataset(ctximp.generate("example1"))
    assert ctximp.cond_mi(dist, 0, [(1, 0)], 0) == pytest.approx(1.0, abs=1e-12)
    assert ctximp.cond_mi(dist, 0, [(1, 0)]) == pytest.approx(0.5, abs=1e-12)
    assert ctximp.is_context_dependent(dist, 0, 1)
    assert not ctximp.is_context_dependent(dist, 0, 4)
    assert all(v for k, v in ctximp.verify_theorems(dist).items() if k != "witnesses")


def test_forest_scores_are_deterministic():
    ds = ctximp.generate("problem1")
    a = ctximp.forest_scores(ds, n_trees=200, seed=3)
    b = ctximp.forest_scores(ds, n_trees=200, seed=3, jobs=2)
    assert a == b
    assert len(a["imp"]) == 3 and len(a["abs"]) == 2
    for c in range(2):
        for s, ab in zip(a["signed"][c], a["abs"][c]):
            assert abs(s) <= ab + 1e-12


def test_permutation_and_report():
    ds = ctximp.generate("problem1")
    r = ctximp.permutation_pvalues(ds, n_trees=50, n_permutations=9, null_trees=20)
    assert r["n_permutations"] == 9
    assert all(0.0 < p <= 1.0 for row in r["p_abs"] for p in row)
    tsv = ctximp.importance_report(ds, n_trees=100)
    assert "X_1" in tsv and "label[0]" in tsv


def test_pairwise_and_csv(tmp_path):
    path = tmp_path / "d.csv"
    rows = ["ctx,a,b,c"] + [f"{i % 2},{i % 3},{(i * 7) % 5},{i % 4}" for i in range(40)]
    path.write_text("\n".join(rows) + "\n")
    table = ctximp.read_table(path)
    assert table.names == ["ctx", "a", "b", "c"]
    out = ctximp.pairwise(table, "ctx", n_trees=10, n_permutations=3, q_bins=2)
    assert len(out) == 2
    assert out[0]["abs"][0][0] is None
    ds = ctximp.load_csv(path, "c", "ctx")
    assert ds.n_samples == 40


def test_errors_and_cli():
    with pytest.raises(ctximp.ConfigError):
        ctximp.generate("nope")
    with pytest.raises(ctximp.DataError):
        ctximp.Dataset(ctximp.generate("problem1").table, "Y", "missing")
    code, out, _ = ctximp.run_cli(["oracle", "--generate", "problem1"])
    assert code == 0 and "imp_Xc" in out
    code, _, _ = ctximp.run_cli(["importance", "--bogus"])
    assert code == 2
    assert ctximp.__version__ == "0.1.0"
