import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefmix.data import RP_PAIR, ChoiceDataset, PanelPerson, Task
from prefmix.draws import DrawBlock, mlhs, to_std_normal
from prefmix.errors import DrawDimensionMismatch, MissingCoefficient, MissingIndicator
from prefmix.mixing import MixingSpec
from prefmix.models import (
    AscTerm,
    ModelSpec,
    RPBlock,
    RPOutcome,
    UtilityTerm,
    build_utility,
    mixed_panel_ll,
    mnl_prob,
    rp_pair_ll,
)


def panel(n_persons=1, n_tasks=1, n_alts=2, attrs=("x",), values=None, chosen=0):
    """Tiny synthetic panel; values[p][t][alt] is an attribute tuple."""
    persons = []
    for p in range(n_persons):
        tasks = []
        for t in range(n_tasks):
            alts = tuple(
                (f"alt{k}",
                 values[p][t][k] if values is not None else (float(k),))
                for k in range(n_alts))
            tasks.append(Task(alts, chosen_index=chosen))
        persons.append(PanelPerson(str(p + 1), tuple(tasks)))
    return ChoiceDataset(tuple(persons), tuple(attrs),
                         tuple(f"alt{k}" for k in range(n_alts)))


# -- mnl_prob ---------------------------------------------------------------

def test_mnl_prob_symmetry():
    np.testing.assert_allclose(mnl_prob([0.0, 0.0, 0.0]), [1 / 3] * 3)


def test_mnl_prob_closed_form():
    np.testing.assert_allclose(mnl_prob([math.log(2.0), 0.0]), [2 / 3, 1 / 3])


def test_mnl_prob_no_overflow():
    p = mnl_prob([1000.0, 0.0])
    assert np.isfinite(p).all()
    assert p[0] == pytest.approx(1.0)
    assert p[1] == pytest.approx(0.0, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=6))
def test_mnl_prob_simplex_and_translation(v):
    p = mnl_prob(v)
    assert abs(p.sum() - 1.0) < 1e-12
    shifted = mnl_prob(np.asarray(v) + 17.3)
    np.testing.assert_allclose(p, shifted, atol=1e-12)


# -- build_utility ----------------------------------------------------------

def test_build_utility_zero_coefficients():
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "fixed"),),
                     terms=(UtilityTerm("b_x", "x"),))
    task = Task((("alt0", (1.0,)), ("alt1", (0.0,))), 0)
    np.testing.assert_allclose(build_utility(spec, task, {"b_x": 0.0}, ("x",)),
                               [0.0, 0.0])


def test_build_utility_preference_direct_product():
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "fixed"),),
                     terms=(UtilityTerm("b_x", "x"),))
    task = Task((("alt0", (1.0,)), ("alt1", (0.0,))), 0)
    np.testing.assert_allclose(build_utility(spec, task, {"b_x": 2.0}, ("x",)),
                               [2.0, 0.0])


def test_build_utility_wtp_space_hand_value():
    # money-metric bracket: V = beta_p * (price + w * menthol)
    spec = ModelSpec(
        coefficients=(MixingSpec("b_price", "lognormal"),
                      MixingSpec("w_menthol", "normal")),
        terms=(UtilityTerm("w_menthol", "menthol"),),
        space="wtp", price_coefficient="b_price", price_attribute="price")
    task = Task((("alt0", (10.0, 1.0)), ("alt1", (10.0, 0.0))), 0)
    got = build_utility(spec, task, {"b_price": -0.5, "w_menthol": -5.90},
                        ("price", "menthol"))
    np.testing.assert_allclose(got, [-0.5 * (10.0 - 5.90), -0.5 * 10.0])
    np.testing.assert_allclose(got, [-2.05, -5.0])


def test_build_utility_missing_coefficient():
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "fixed"),),
                     terms=(UtilityTerm("b_x", "x"),))
    task = Task((("alt0", (1.0,)), ("alt1", (0.0,))), 0)
    with pytest.raises(MissingCoefficient):
        build_utility(spec, task, {}, ("x",))


def test_asc_attaches_by_label_not_position():
    spec = ModelSpec(coefficients=(MixingSpec("asc_a", "fixed"),),
                     ascs=(AscTerm("asc_a", "alt0"),))
    task_fwd = Task((("alt0", ()), ("alt1", ())), 0)
    task_rev = Task((("alt1", ()), ("alt0", ())), 0)
    np.testing.assert_allclose(build_utility(spec, task_fwd, {"asc_a": 1.5}, ()),
                               [1.5, 0.0])
    np.testing.assert_allclose(build_utility(spec, task_rev, {"asc_a": 1.5}, ()),
                               [0.0, 1.5])


# -- mixed_panel_ll ----------------------------------------------------------

def test_uniform_choice_identity():
    n, t, j = 7, 3, 4
    values = [[[(float(k),) for k in range(j)] for _ in range(t)] for _ in range(n)]
    ds = panel(n, t, j, values=values)
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "fixed"),),
                     terms=(UtilityTerm("b_x", "x"),))
    ll, people = mixed_panel_ll(spec, ds, None, [0.0])
    assert ll == pytest.approx(-n * t * math.log(j), abs=1e-9)
    assert len(people) == n
    for person in people:
        assert person.p == pytest.approx((1 / j) ** t, rel=1e-12)


def brute_force_panel_ll(spec, ds, uniform_block, theta, attr_names):
    """Enumeration oracle: loop persons, draws, tasks with scalar softmax."""
    from prefmix import mixing
    from prefmix.models import ParamLayout

    layout = ParamLayout.build(spec)
    normal_block = to_std_normal(uniform_block) if uniform_block else None
    total = 0.0
    per_person = []
    for p, person in enumerate(ds.individuals):
        acc = 0.0
        n_draws = uniform_block.n_draws if uniform_block else 1
        for r in range(n_draws):
            coeffs = {}
            for coef in spec.coefficients:
                params = coef.full_params(theta[layout.slices[coef.name]])
                dims = mixing.draw_dims(coef.family)
                if dims == 0:
                    coeffs[coef.name] = float(mixing.realize(
                        coef, params, np.zeros((1, 0)), "uniform01")[0])
                else:
                    kind = mixing.draw_kind(coef.family)
                    block = normal_block if kind == "std_normal" else uniform_block
                    offset = layout.dim_offsets[coef.name]
                    vals = block.values[p, r, offset:offset + dims][None, :]
                    coeffs[coef.name] = float(mixing.realize(coef, params, vals, kind)[0])
            prod = 1.0
            for task in person.tasks:
                v = build_utility(spec, task, coeffs, attr_names)
                prod *= mnl_prob(v)[task.chosen_index]
            acc += prod
        p_n = acc / n_draws
        per_person.append(p_n)
        total += math.log(p_n)
    return total, per_person


def test_two_draw_hand_oracle():
    ds = panel(1, 1, 2)
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "normal"),),
                     terms=(UtilityTerm("b_x", "x"),))
    block = mlhs(1, 2, 1, seed=4)
    theta = np.array([0.3, 0.8])
    ll, people = mixed_panel_ll(spec, ds, block, theta)

    z = to_std_normal(block).values[0, :, 0]
    betas = 0.3 + 0.8 * z
    probs = [math.exp(b * 0.0) / (math.exp(b * 0.0) + math.exp(b * 1.0))
             for b in betas]
    expected = math.log(sum(probs) / 2.0)
    assert ll == pytest.approx(expected, abs=1e-12)
    assert people[0].p == pytest.approx(sum(probs) / 2.0, rel=1e-12)


def test_enumeration_oracle_small_mixed_panel():
    values = [
        [[(0.5,), (1.5,)], [(2.0,), (0.0,)]],
        [[(1.0,), (-1.0,)], [(0.3,), (0.4,)]],
    ]
    ds = panel(2, 2, 2, values=values, chosen=1)
    spec = ModelSpec(
        coefficients=(MixingSpec("b_x", "triangular"),),
        terms=(UtilityTerm("b_x", "x"),))
    block = mlhs(2, 3, 2, seed=10)
    theta = np.array([-0.4, 0.9])
    ll, people = mixed_panel_ll(spec, ds, block, theta)
    expected_ll, expected_people = brute_force_panel_ll(spec, ds, block, theta, ("x",))
    assert ll == pytest.approx(expected_ll, abs=1e-12)
    for person, expected in zip(people, expected_people):
        assert person.p == pytest.approx(expected, rel=1e-12)


def test_mnl_special_case_independent_of_draws():
    values = [[[(0.5,), (1.5,)], [(2.0,), (0.0,)]]]
    ds = panel(1, 2, 2, values=values)
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "fixed"),),
                     terms=(UtilityTerm("b_x", "x"),))
    lls = [mixed_panel_ll(spec, ds, mlhs(1, r, 1, seed=1) if r else None, [0.7])[0]
           for r in (0, 1, 5, 50)]
    assert lls[0] == lls[1] == lls[2] == lls[3]


def test_zero_variance_invariant_to_n_draws():
    values = [[[(0.5,), (1.5,)], [(2.0,), (0.0,)]]]
    ds = panel(1, 2, 2, values=values)
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "normal"),),
                     terms=(UtilityTerm("b_x", "x"),))
    lls = [mixed_panel_ll(spec, ds, mlhs(1, r, 1, seed=1), [0.7, 0.0])[0]
           for r in (1, 3, 17)]
    assert lls[0] == pytest.approx(lls[1], abs=1e-10)
    assert lls[0] == pytest.approx(lls[2], abs=1e-10)


def test_draw_permutation_invariance():
    ds = panel(2, 2, 3, values=[[[(float(k),) for k in range(3)]] * 2] * 2)
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "normal"),),
                     terms=(UtilityTerm("b_x", "x"),))
    block = mlhs(2, 16, 1, seed=6)
    theta = [0.2, 0.5]
    ll, _ = mixed_panel_ll(spec, ds, block, theta)
    rng = np.random.default_rng(0)
    perm = rng.permutation(16)
    shuffled = DrawBlock(values=block.values[:, perm, :].copy(), kind=block.kind,
                         seed=block.seed, n_draws=block.n_draws)
    ll_perm, _ = mixed_panel_ll(spec, ds, shuffled, theta)
    assert ll == pytest.approx(ll_perm, abs=1e-10)


def test_draw_dimension_mismatch():
    ds = panel(1, 1, 2)
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "triangular"),),
                     terms=(UtilityTerm("b_x", "x"),))
    with pytest.raises(DrawDimensionMismatch):
        mixed_panel_ll(spec, ds, mlhs(1, 4, 1, seed=1), [0.0, 1.0])
    with pytest.raises(DrawDimensionMismatch):
        mixed_panel_ll(spec, ds, mlhs(3, 4, 2, seed=1), [0.0, 1.0])


def test_ragged_panel_matches_oracle():
    # persons with different task counts and alternative counts
    p1 = PanelPerson("1", (
        Task((("alt0", (0.5,)), ("alt1", (1.0,)), ("alt2", (-0.5,))), 2),
        Task((("alt0", (1.0,)), ("alt1", (0.0,))), 0),
    ))
    p2 = PanelPerson("2", (
        Task((("alt0", (0.2,)), ("alt1", (0.9,))), 1),
    ))
    ds = ChoiceDataset((p1, p2), ("x",), ("alt0", "alt1", "alt2"))
    spec = ModelSpec(coefficients=(MixingSpec("b_x", "uniform"),),
                     terms=(UtilityTerm("b_x", "x"),))
    block = mlhs(2, 3, 1, seed=2)
    theta = np.array([-0.2, 0.8])
    ll, _ = mixed_panel_ll(spec, ds, block, theta)
    expected, _ = brute_force_panel_ll(spec, ds, block, theta, ("x",))
    assert ll == pytest.approx(expected, abs=1e-12)


# -- rp_pair_ll ---------------------------------------------------------------

def rp_dataset(rows):
    persons = tuple(PanelPerson(str(i + 1), covariates=dict(row))
                    for i, row in enumerate(rows))
    return ChoiceDataset(persons, tuple(rows[0]), (), mode=RP_PAIR)


def rp_spec(sigma_fixed=False):
    coefficients = (
        MixingSpec("asc_cig", "fixed"),
        MixingSpec("asc_ecig", "fixed"),
        MixingSpec("g_age_cig", "fixed"),
        MixingSpec("g_age_ecig", "fixed"),
    )
    rp = RPBlock(outcomes=(
        RPOutcome(label="cig", indicator="c", asc="asc_cig",
                  terms=(UtilityTerm("g_age_cig", "age"),)),
        RPOutcome(label="ecig", indicator="e", asc="asc_ecig",
                  terms=(UtilityTerm("g_age_ecig", "age"),)),
    ), sigma_rho="sigma_rho")
    return ModelSpec(coefficients=coefficients, rp=rp)


def test_rp_fair_coins():
    ds = rp_dataset([{"age": 1.0, "c": 1.0, "e": 0.0},
                     {"age": 2.0, "c": 0.0, "e": 1.0}])
    spec = rp_spec()
    theta = np.zeros(5)  # four coefficients + sigma_rho
    ll, people = rp_pair_ll(spec, ds, mlhs(2, 4, 1, seed=1), theta)
    assert ll == pytest.approx(2 * (math.log(0.5) + math.log(0.5)), abs=1e-12)
    for person in people:
        assert person.p == pytest.approx(0.25, rel=1e-12)


def test_rp_no_correlation_reduces_to_independent_logits():
    ds = rp_dataset([{"age": 0.5, "c": 1.0, "e": 0.0},
                     {"age": -1.0, "c": 0.0, "e": 0.0},
                     {"age": 2.0, "c": 1.0, "e": 1.0}])
    spec = rp_spec()
    theta = np.array([0.3, -0.6, 0.8, -0.2, 0.0])  # sigma_rho = 0

    def logit(v):
        return 1.0 / (1.0 + math.exp(-v))

    expected = 0.0
    for person in ds.individuals:
        age, c, e = (person.covariates[k] for k in ("age", "c", "e"))
        p_c = logit(0.3 + 0.8 * age)
        p_e = logit(-0.6 - 0.2 * age)
        expected += math.log(p_c if c else 1 - p_c) + math.log(p_e if e else 1 - p_e)
    ll, _ = rp_pair_ll(spec, ds, mlhs(3, 5, 1, seed=2), theta)
    assert ll == pytest.approx(expected, abs=1e-12)


def test_rp_enumeration_oracle_with_correlation():
    ds = rp_dataset([{"age": 0.5, "c": 1.0, "e": 0.0},
                     {"age": -1.0, "c": 0.0, "e": 1.0}])
    spec = rp_spec()
    theta = np.array([0.3, -0.6, 0.8, -0.2, 1.0])  # sigma_rho = 1
    block = mlhs(2, 3, 1, seed=3)
    z = to_std_normal(block).values[:, :, 0]

    def logit(v):
        return 1.0 / (1.0 + math.exp(-v))

    expected = 0.0
    for i, person in enumerate(ds.individuals):
        age, c, e = (person.covariates[k] for k in ("age", "c", "e"))
        acc = 0.0
        for r in range(3):
            rho = 1.0 * z[i, r]
            p_c = logit(0.3 + 0.8 * age + rho)
            p_e = logit(-0.6 - 0.2 * age + rho)
            acc += ((p_c if c else 1 - p_c) * (p_e if e else 1 - p_e))
        expected += math.log(acc / 3.0)
    ll, _ = rp_pair_ll(spec, ds, block, theta)
    assert ll == pytest.approx(expected, abs=1e-12)


def test_rp_missing_indicator():
    ds = rp_dataset([{"age": 0.5, "c": 1.0}])
    spec = rp_spec()
    with pytest.raises(MissingIndicator):
        rp_pair_ll(spec, ds, mlhs(1, 2, 1, seed=1), np.zeros(5))


def test_wtp_requires_sign_constrained_price():
    with pytest.raises(MissingCoefficient):
        ModelSpec(
            coefficients=(MixingSpec("b_price", "normal"),),
            terms=(),
            space="wtp", price_coefficient="b_price", price_attribute="price")
