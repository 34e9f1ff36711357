import json
import math

import numpy as np
import pytest

from metaplot.cohort import (
    CohortConfig,
    Confounder,
    Pcg32,
    RankDeficiencyError,
    gap_decomposition,
    gap_over_seeds,
    generate_cohort,
    ols_fit,
)


def test_pcg32_reference_stream():
    # First outputs of the pcg32 reference implementation for
    # seed=42, stream=54 (the values published with the minimal C version).
    rng = Pcg32(42, stream=54)
    expected = [0xA15C02B7, 0x7B47F409, 0xBA1D3330, 0x83D2F293, 0xBFA4784B, 0xCBED606E]
    assert [rng.next_uint32() for _ in range(6)] == expected


def test_pcg32_deterministic_and_seed_sensitive():
    a = [Pcg32(123).random() for _ in range(5)]
    b = [Pcg32(123).random() for _ in range(5)]
    c = [Pcg32(124).random() for _ in range(5)]
    assert a == b
    assert a != c
    assert all(0.0 < u < 1.0 for u in a)


def test_pcg32_normal_moments():
    rng = Pcg32(2024)
    draws = [rng.normal() for _ in range(20000)]
    assert np.mean(draws) == pytest.approx(0.0, abs=0.03)
    assert np.std(draws) == pytest.approx(1.0, abs=0.03)


def test_config_validation():
    with pytest.raises(ValueError, match="identifiable"):
        CohortConfig(n_per_group=2, beta0=0, beta1=0,
                     confounders=(Confounder(1, 0, 0, 1),))
    with pytest.raises(ValueError):
        CohortConfig(n_per_group=10, beta0=0, beta1=0, noise_sigma=-1)
    with pytest.raises(ValueError):
        Confounder(1.0, 0.0, 0.0, 0.0)


def test_config_json_round_trip():
    cfg = CohortConfig(
        n_per_group=50,
        beta0=1.5,
        beta1=-2.0,
        confounders=(Confounder(0.5, -1.0, 0.0, 2.0),),
        noise_sigma=0.3,
        seed=9,
    )
    again = CohortConfig.from_json(json.dumps(cfg.to_dict()))
    assert again == cfg


def test_config_rejects_unknown_fields():
    with pytest.raises(ValueError, match="unknown cohort config"):
        CohortConfig.from_dict({"n_per_group": 5, "beta0": 0, "beta1": 0, "bogus": 1})


def test_generate_cohort_zero_noise_exact_outcomes():
    cfg = CohortConfig(n_per_group=4, beta0=10.0, beta1=-5.0)
    cohort = generate_cohort(cfg)
    male = cohort.y[:4]
    female = cohort.y[4:]
    assert np.all(male == 10.0)
    assert np.all(female == 5.0)
    assert cohort.columns == ("intercept", "group")


def test_generate_cohort_byte_identical_for_fixed_seed():
    cfg = CohortConfig(
        n_per_group=30,
        beta0=1.0,
        beta1=0.5,
        confounders=(Confounder(1.0, -1.0, 0.0, 1.0),),
        noise_sigma=0.7,
        seed=321,
    )
    a = generate_cohort(cfg)
    b = generate_cohort(cfg)
    assert a.x.tobytes() == b.x.tobytes()
    assert a.y.tobytes() == b.y.tobytes()


def test_confounder_group_means_shift():
    cfg = CohortConfig(
        n_per_group=4000,
        beta0=0.0,
        beta1=0.0,
        confounders=(Confounder(1.0, mean_f=-1.5, mean_m=0.5, sigma=2.0),),
        seed=11,
    )
    cohort = generate_cohort(cfg)
    col = cohort.x[:, 2]
    diff = col[4000:].mean() - col[:4000].mean()
    bound = 4.0 * 2.0 / math.sqrt(4000)
    assert abs(diff - (-2.0)) <= bound


def brute_force_normal_equations(x, y):
    # Independent oracle: explicit Gaussian elimination on X'X b = X'y.
    x = [[float(v) for v in row] for row in x]
    y = [float(v) for v in y]
    p = len(x[0])
    xtx = [[sum(r[i] * r[j] for r in x) for j in range(p)] for i in range(p)]
    xty = [sum(r[i] * yi for r, yi in zip(x, y)) for i in range(p)]
    aug = [xtx[i] + [xty[i]] for i in range(p)]
    for col in range(p):
        pivot = max(range(col, p), key=lambda r: abs(aug[r][col]))
        aug[col], aug[pivot] = aug[pivot], aug[col]
        for r in range(p):
            if r != col and aug[col][col] != 0.0:
                f = aug[r][col] / aug[col][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][p] / aug[i][i] for i in range(p)]


def test_ols_exact_line():
    x = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
    y = np.array([0.0, 2.0, 4.0])
    fit = ols_fit(x, y)
    assert fit.coefficients[0] == pytest.approx(0.0, abs=1e-12)
    assert fit.coefficients[1] == pytest.approx(2.0, abs=1e-12)
    assert fit.residual_sd == pytest.approx(0.0, abs=1e-12)


def test_ols_matches_normal_equation_oracle():
    rng = Pcg32(777)
    x = np.array([[1.0, rng.normal(), rng.normal()] for _ in range(50)])
    y = np.array([rng.normal() for _ in range(50)])
    fit = ols_fit(x, y)
    oracle = brute_force_normal_equations(x, y)
    assert fit.coefficients == pytest.approx(oracle, abs=1e-9)


def test_ols_residuals_orthogonal_to_columns():
    rng = Pcg32(778)
    x = np.array([[1.0, rng.normal(), rng.normal(), rng.normal()] for _ in range(120)])
    y = np.array([rng.normal() for _ in range(120)])
    fit = ols_fit(x, y)
    scale = np.linalg.norm(y) * np.linalg.norm(x, axis=0)
    dots = np.abs(x.T @ fit.residuals)
    assert np.all(dots <= 1e-8 * np.maximum(scale, 1.0))


def test_ols_duplicated_column_raises():
    col = np.arange(10.0)
    x = np.column_stack([np.ones(10), col, col])
    with pytest.raises(RankDeficiencyError):
        ols_fit(x, np.arange(10.0))


def test_ols_shape_validation():
    with pytest.raises(ValueError):
        ols_fit(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        ols_fit(np.ones((5, 2)), np.ones(4))


def test_gap_no_confounders_both_equal_beta1():
    cfg = CohortConfig(n_per_group=20, beta0=4.0, beta1=-3.0)
    rep = gap_decomposition(cfg)
    assert rep.gap_unadjusted == pytest.approx(-3.0, abs=1e-10)
    assert rep.gap_adjusted == pytest.approx(-3.0, abs=1e-10)


def test_gap_zero_noise_recovers_all_betas():
    cfg = CohortConfig(
        n_per_group=200,
        beta0=2.0,
        beta1=1.25,
        confounders=(
            Confounder(beta=2.0, mean_f=-1.0, mean_m=0.0, sigma=1.0),
            Confounder(beta=-0.75, mean_f=0.5, mean_m=-0.5, sigma=2.0),
        ),
        noise_sigma=0.0,
        seed=5,
    )
    rep = gap_decomposition(cfg)
    assert rep.gap_adjusted == pytest.approx(1.25, abs=1e-8)
    assert rep.coefficients == pytest.approx([2.0, 1.25, 2.0, -0.75], abs=1e-8)
    assert rep.residual_sd == pytest.approx(0.0, abs=1e-8)


def test_gap_single_confounder_analytic_bias():
    # beta1=0, one confounder with beta=2 and group mean difference -1:
    # the unadjusted gap absorbs 2 * (-1) = -2, the adjusted gap is 0.
    cfg = CohortConfig(
        n_per_group=60000,
        beta0=0.0,
        beta1=0.0,
        confounders=(Confounder(beta=2.0, mean_f=-1.0, mean_m=0.0, sigma=0.05),),
        noise_sigma=0.0,
        seed=13,
    )
    rep = gap_decomposition(cfg)
    assert rep.gap_unadjusted == pytest.approx(-2.0, abs=1e-2)
    assert rep.gap_adjusted == pytest.approx(0.0, abs=1e-6)


def test_gap_null_confounder_changes_little():
    base = CohortConfig(
        n_per_group=500,
        beta0=1.0,
        beta1=-0.8,
        confounders=(Confounder(beta=1.0, mean_f=-1.0, mean_m=0.0, sigma=1.0),),
        noise_sigma=1.0,
        seed=88,
    )
    with_null = CohortConfig(
        n_per_group=500,
        beta0=1.0,
        beta1=-0.8,
        confounders=base.confounders + (Confounder(0.0, 0.3, 0.0, 1.0),),
        noise_sigma=1.0,
        seed=88,
    )
    reps = [gap_decomposition(c) for c in (base, with_null)]
    # the group coefficient's standard error is roughly noise*sqrt(2/n)
    se = 1.0 * math.sqrt(2.0 / 500.0)
    assert abs(reps[0].gap_adjusted - reps[1].gap_adjusted) <= 3.0 * se


def test_gap_over_seeds_replicates():
    cfg = CohortConfig(n_per_group=20, beta0=0.0, beta1=1.0, noise_sigma=0.5, seed=3)
    reports = gap_over_seeds(cfg, [3, 4, 5])
    assert len(reports) == 3
    assert reports[0] == gap_decomposition(cfg)
