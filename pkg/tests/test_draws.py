import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefmix.draws import DrawBlock, mlhs, to_std_normal
from prefmix.errors import WrongKind, ZeroCount

# frozen from a 30-digit mpmath erfinv oracle
INV_CDF_ORACLE = {
    0.5: 0.0,
    0.975: 1.9599639845400542,
    0.025: -1.9599639845400542,
    0.84: 0.99445788320975317,
}


def test_mlhs_values_strictly_inside_unit_interval():
    block = mlhs(3, 50, 2, seed=11)
    assert block.kind == "uniform01"
    assert block.values.shape == (3, 50, 2)
    assert block.values.min() > 0.0
    assert block.values.max() < 1.0


def test_mlhs_stratification():
    n_draws = 40
    block = mlhs(4, n_draws, 3, seed=5)
    for p in range(4):
        for d in range(3):
            strata = np.floor(np.sort(block.values[p, :, d]) * n_draws).astype(int)
            assert (strata == np.arange(n_draws)).all()


def test_mlhs_single_draw_degenerates_to_one_offset():
    block = mlhs(6, 1, 2, seed=9)
    assert block.values.shape == (6, 1, 2)
    assert (block.values > 0).all() and (block.values < 1).all()


def test_mlhs_mean_within_half_stratum_of_center():
    block = mlhs(1, 100, 1, seed=2)
    assert abs(block.values.mean() - 0.5) < 0.005


def test_mlhs_deterministic():
    a = mlhs(5, 20, 3, seed=123)
    b = mlhs(5, 20, 3, seed=123)
    np.testing.assert_array_equal(a.values, b.values)


def test_mlhs_rejects_zero_counts():
    with pytest.raises(ZeroCount):
        mlhs(0, 10, 1, seed=1)
    with pytest.raises(ZeroCount):
        mlhs(1, 0, 1, seed=1)
    with pytest.raises(ZeroCount):
        mlhs(1, 10, 0, seed=1)


def test_draw_block_immutable():
    block = mlhs(2, 5, 1, seed=1)
    with pytest.raises(ValueError):
        block.values[0, 0, 0] = 0.5


@pytest.mark.parametrize("u,expected", sorted(INV_CDF_ORACLE.items()))
def test_inverse_normal_oracle_values(u, expected):
    block = DrawBlock(values=np.full((1, 1, 1), u), kind="uniform01", seed=0, n_draws=1)
    out = to_std_normal(block)
    assert out.kind == "std_normal"
    assert out.values[0, 0, 0] == pytest.approx(expected, abs=1e-9)


def test_to_std_normal_rejects_normal_input():
    block = to_std_normal(mlhs(1, 4, 1, seed=3))
    with pytest.raises(WrongKind):
        to_std_normal(block)


def test_to_std_normal_clamps_extreme_inputs():
    block = DrawBlock(values=np.array([[[1e-18], [1.0 - 1e-18]]]).reshape(1, 2, 1),
                      kind="uniform01", seed=0, n_draws=2)
    out = to_std_normal(block)
    assert np.isfinite(out.values).all()


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_inverse_normal_antisymmetry(u):
    def phi_inv(x):
        block = DrawBlock(values=np.full((1, 1, 1), x), kind="uniform01",
                          seed=0, n_draws=1)
        return to_std_normal(block).values[0, 0, 0]

    assert phi_inv(u) == pytest.approx(-phi_inv(1.0 - u), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.98))
def test_inverse_normal_monotone(u):
    block = DrawBlock(values=np.array([u, u + 0.01]).reshape(1, 2, 1),
                      kind="uniform01", seed=0, n_draws=2)
    out = to_std_normal(block).values[0, :, 0]
    assert out[0] < out[1]


def test_export_csv_round_readable(tmp_path):
    import csv

    block = mlhs(2, 3, 2, seed=7)
    path = tmp_path / "draws.csv"
    from prefmix.draws import export_csv

    export_csv(block, path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 3 * 2
    got = float(rows[0]["value"])
    assert got == block.values[0, 0, 0]
