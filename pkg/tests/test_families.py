from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphersym import (
    BundleConfig,
    FamilyParams,
    MetricField,
    TotalPoint,
    WeightProfile,
    base_example_inverse_norm,
    bilaplacian_numeric,
    classify,
    classify_vertical_lift,
    equation_E_prime_residual,
    equation_E_residual,
    euclidean_chart,
    exponent_roots,
    log_weight,
    polynomial_weight,
    power_ode_residual,
    preset,
    radial_family,
    radial_polynomial,
    sasaki_radial_residual,
    zero_weight,
)
from sphersym.errors import ConfigurationError
from sphersym.families import (
    HARMONIC,
    NOT_BIHARMONIC,
    PROPER_BIHARMONIC,
    euler_quadratic,
)
from sphersym.fields import VerticalLift

SASAKI = preset("sasaki")


# the weight condition (E) and its regrouped form


def test_equation_E_vanishes_for_constant_phi1():
    rng = np.random.default_rng(0)
    for _ in range(10):
        w = WeightProfile(
            "const1",
            polynomial_weight([rng.uniform(-2, 2)]),
            polynomial_weight(rng.uniform(-1, 1, size=3)),
        )
        m, k = rng.integers(1, 5), rng.integers(1, 5)
        assert equation_E_residual(w, int(m), int(k), float(rng.uniform(0, 5))) == 0.0


def test_equation_E_linear_horizontal_value():
    assert equation_E_residual(preset("linear_horizontal"), 2, 2, 1.0) == pytest.approx(2.0)
    assert equation_E_prime_residual(preset("linear_horizontal"), 2, 2, 1.0) == pytest.approx(2.0)


def test_equation_E_on_scale_invariant_singular_family():
    # phi1' = c / r solves the condition when m = k = 2, for any c
    for c in (0.5, -1.3, 2.0):
        w = WeightProfile("singular", log_weight(c), zero_weight())
        for r in (0.5, 1.0, 2.0):
            assert abs(equation_E_residual(w, 2, 2, r)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    p1=st.lists(st.floats(-1.5, 1.5), min_size=1, max_size=4),
    p2=st.lists(st.floats(-1.5, 1.5), min_size=1, max_size=4),
    m=st.integers(1, 5),
    k=st.integers(1, 5),
    r=st.floats(0.01, 8.0),
)
def test_equation_E_forms_agree(p1, p2, m, k, r):
    w = WeightProfile("hyp", polynomial_weight(p1), polynomial_weight(p2))
    e = equation_E_residual(w, m, k, r)
    e_prime = equation_E_prime_residual(w, m, k, r)
    assert abs(e - e_prime) <= 1e-12 * (1.0 + abs(e))


# the fourth-order radial ODE residual


def test_residual_of_degree_one_profiles_vanishes():
    alpha = radial_polynomial([0.3, -1.7])
    for k in range(1, 9):
        for r in (0.2, 1.0, 4.0):
            assert sasaki_radial_residual(alpha, k, r) == 0.0


def test_residual_of_line_bundle_family_at_r_two():
    fam = radial_family(FamilyParams(1, "k1", beta=1.0))
    assert sasaki_radial_residual(fam, 1, 2.0) == pytest.approx(0.0, abs=1e-14)


def test_residual_of_quadratic_profile():
    alpha = radial_polynomial([0.0, 0.0, 1.0])
    assert sasaki_radial_residual(alpha, 2, 1.0) == pytest.approx(16.0)
    for k in range(1, 9):
        assert sasaki_radial_residual(alpha, k, 1.0) == pytest.approx(2.0 * k * (k + 2))


# exact exponent roots


def test_roots_for_line_bundles():
    roots = exponent_roots(1)
    assert roots.roots == (Fraction(-1), Fraction(-3, 2))
    assert roots.discriminant == 1
    assert roots.parity_case == "k1"
    assert not roots.double


def test_roots_for_plane_bundles():
    roots = exponent_roots(2)
    assert roots.roots == (Fraction(-2),)
    assert roots.multiplicities == (2,)
    assert roots.double
    assert roots.discriminant == 0


@pytest.mark.parametrize("k", range(3, 13))
def test_roots_satisfy_the_quadratic_exactly(k):
    roots = exponent_roots(k)
    assert roots.discriminant == (k - 2) ** 2
    assert set(roots.roots) == {Fraction(-k), Fraction(-(k + 2), 2)}
    for n in roots.roots:
        assert euler_quadratic(n, k) == 0
        assert power_ode_residual(n, k, 1.0) == 0.0
        assert power_ode_residual(n, k, 2.0) == 0.0


@pytest.mark.parametrize("k", range(3, 13))
def test_half_rank_value_is_not_a_root(k):
    # the often-quoted second root -k/2 fails the quadratic for every k != 2:
    # 2n^2 + (3k+2)n + k(k+2) factors as (n+k)(2n+k+2)
    assert euler_quadratic(Fraction(-k, 2), k) == k
    assert power_ode_residual(Fraction(-k, 2), k, 1.0) == float(k)


def test_roots_reject_bad_rank():
    with pytest.raises(ConfigurationError):
        exponent_roots(0)


@given(k=st.integers(1, 60))
@settings(max_examples=60, deadline=None)
def test_quadratic_factorization_property(k):
    for n in exponent_roots(k).roots:
        assert (n + k) * (2 * n + k + 2) == 0
        assert euler_quadratic(n, k) == 0


# family constructors


def test_plane_bundle_family_is_negative_log():
    fam = radial_family(FamilyParams(2, "k2", beta=1.0))
    assert fam.eval(0, 1.0) == pytest.approx(0.0)
    assert fam.eval(2, 0.5) == pytest.approx(4.0)  # beta / r^2
    assert fam.singular_at_zero and fam.domain_min == pytest.approx(1e-3)


def test_rank_three_family_is_half_inverse():
    fam = radial_family(FamilyParams(3, "k_odd", beta=1.0))
    # beta r^{2-k} / ((1-k)(2-k)) = r^{-1} / 2
    assert fam.eval(0, 2.0) == pytest.approx(0.25)
    assert fam.eval(1, 1.0) == pytest.approx(-0.5)


def test_rank_four_second_family_uses_the_exact_root():
    # psi = beta r^{-3} (root -(k+2)/2 = -3) integrates to (beta/2) r^{-1};
    # the -k/2 exponent would not solve the equation and is not used
    fam = radial_family(FamilyParams(4, "k_even_b", beta=1.0))
    assert fam.eval(0, 2.0) == pytest.approx(0.25)
    assert fam.eval(2, 1.0) == pytest.approx(1.0)
    for r in (0.3, 1.0, 2.7):
        assert abs(sasaki_radial_residual(fam, 4, r)) <= 1e-12


def test_family_case_validation():
    with pytest.raises(ConfigurationError):
        FamilyParams(5, "k_even_b", beta=1.0)
    with pytest.raises(ConfigurationError):
        FamilyParams(2, "k1", beta=1.0)
    with pytest.raises(ConfigurationError):
        FamilyParams(3, "k_odd", beta=0.0)
    with pytest.raises(ConfigurationError):
        FamilyParams(3, "k_off", beta=1.0)


def admissible_cases(k):
    if k == 1:
        return ["k1"]
    if k == 2:
        return ["k2"]
    if k % 2:
        return ["k_odd"]
    return ["k_even_a", "k_even_b"]


def test_all_families_solve_the_radial_ode():
    rng = np.random.default_rng(42)
    rs = np.linspace(0.1, 10.0, 50)
    for k in range(1, 9):
        for case in admissible_cases(k):
            beta = float(rng.uniform(0.2, 2.0)) * rng.choice([-1.0, 1.0])
            fam = radial_family(FamilyParams(k, case, beta,
                                             float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2))))
            for r in rs:
                scale = 1.0 + abs(float(fam.eval(2, r))) * k * (k + 2)
                assert abs(sasaki_radial_residual(fam, k, float(r))) <= 1e-12 * scale


# classification


def test_classify_degree_one_profiles():
    assert classify(radial_polynomial([0.3, 1.5]), SASAKI, 2, 2, [0.5, 1.0, 2.0]) == PROPER_BIHARMONIC
    assert classify(radial_polynomial([0.3]), SASAKI, 2, 2, [0.5, 1.0, 2.0]) == HARMONIC
    assert classify(radial_polynomial([0.0, 0.0, 1.0]), SASAKI, 2, 2, [0.5, 1.0, 2.0]) == NOT_BIHARMONIC


def test_classify_plane_bundle_family():
    # gamma lifts the Laplacian away from zero while the bilaplacian stays
    # zero: the only log/power family that is genuinely proper biharmonic
    grid = [0.5, 1.0, 2.0]
    assert classify(radial_family(FamilyParams(2, "k2", 1.0, gamma=0.5)), SASAKI, 2, 2, grid) == PROPER_BIHARMONIC
    assert classify(radial_family(FamilyParams(2, "k2", 1.0)), SASAKI, 2, 2, grid) == HARMONIC


def test_classify_records_that_ode_solutions_need_not_be_biharmonic():
    # solving the displayed fourth-order equation is necessary only for the
    # display; the composed bilaplacian of the k=1 family is -4 beta / r
    fam = radial_family(FamilyParams(1, "k1", beta=1.0))
    assert classify(fam, SASAKI, 2, 1, [0.5, 1.0, 2.0]) == NOT_BIHARMONIC
    from sphersym import bilaplacian_radial

    for r in (0.5, 1.0, 2.0):
        assert bilaplacian_radial(fam, SASAKI, 2, 1, r) == pytest.approx(-4.0 / r)


def test_classify_lifted_inverse_norms():
    rng = np.random.default_rng(9)
    w = WeightProfile("c", polynomial_weight([0.2]), polynomial_weight([0.0, 0.25]))
    points = []
    for n in (3, 5):
        chart = euclidean_chart(n)
        space = MetricField(chart, BundleConfig(2, np.eye(2)), w)
        points = []
        for _ in range(6):
            x = rng.uniform(-1.2, 1.2, n)
            while np.linalg.norm(x) < 0.8:
                x = rng.uniform(-1.2, 1.2, n)
            points.append(TotalPoint(x, rng.uniform(-0.8, 0.8, 2)))
        bf = base_example_inverse_norm(n)
        expected = HARMONIC if n == 3 else PROPER_BIHARMONIC
        assert classify_vertical_lift(space, bf, points) == expected


# the inverse norm example


def test_inverse_norm_laplacian_data():
    bf3 = base_example_inverse_norm(3)
    x = np.array([0.5, -0.8, 1.1])
    assert bf3.lap_f(x) == 0.0
    bf5 = base_example_inverse_norm(5)
    x5 = np.array([0.5, -0.8, 1.1, 0.2, -0.4])
    f = float(bf5.f(x5))
    assert bf5.lap_f(x5) == pytest.approx(-2.0 * f**3)
    assert bf5.bilap_f(x5) == 0.0
    with pytest.raises(ConfigurationError):
        base_example_inverse_norm(1)


def test_inverse_norm_bilaplacian_in_dimension_four():
    bf = base_example_inverse_norm(4)
    x = np.array([0.5, -0.5, 0.5, 0.5])  # |x| = 1
    assert bf.bilap_f(x) == pytest.approx(-3.0)
    # cross-check against the base-chart numerical bilaplacian
    chart = euclidean_chart(4)
    from sphersym import DiffConfig

    numeric = bilaplacian_numeric(chart.metric, lambda q: bf.f(q), x,
                                  DiffConfig(base_step=5e-3, nested_step_ratio=5))
    assert numeric == pytest.approx(-3.0, abs=2e-3)
