from fractions import Fraction

import pytest

from stochastic_string.core import StringParams
from stochastic_string.algebra.fock import (
    AuxOscillator,
    apply_expr,
    basis_state,
    commutator_application,
    lift_gaussian_state,
    states_equal,
    substitute_alpha_terms,
)
from stochastic_string.algebra.lorentz import (
    TruncationError,
    UnsupportedComponentError,
    alpha_terms_to_expr,
    anomaly_coefficient,
    anomaly_report,
    anomaly_value_direct,
    lorentz_generator,
    m_minus_alpha_terms,
    m_minus_expr,
    virasoro_alpha_terms,
)
from stochastic_string.algebra.operators import (
    annihilation,
    commutator,
    creation,
    identity,
    position,
)
from stochastic_string.algebra.scalars import Coeff, PolyDA, solve_affine_system

AP = Fraction(1, 2)
PP = Fraction(1)
AUX = AuxOscillator(Fraction(2))


def virasoro(n, transverse=3, n_max=6):
    return alpha_terms_to_expr(virasoro_alpha_terms(n, transverse, n_max, AP))


def states(occupations_list):
    return [lift_gaussian_state(basis_state(occ)) for occ in occupations_list]


def exprs_equal_on(lhs, rhs, state_list):
    return all(
        states_equal(apply_expr(lhs, psi, AUX), apply_expr(rhs, psi, AUX))
        for psi in state_list
    )


LOW_STATES = [{}, {(1, 1): 1}, {(2, 2): 1}, {(1, 1): 1, (1, 2): 1}, {(2, 1): 2}]


def test_virasoro_ladder_action():
    # [L_m, alpha_n] = -n alpha_{m+n}: check on the unit-normalized ladder
    L1 = virasoro(1)
    a2 = annihilation(2, 1)  # alpha_2 / sqrt(2)
    lhs = commutator(L1, a2)
    rhs = annihilation(3, 1).scale(Coeff.sqrt(3) * Coeff.sqrt(Fraction(1, 2))).scale(-2)
    assert exprs_equal_on(lhs, rhs, states(LOW_STATES))


def test_virasoro_algebra_with_central_term():
    # [L_m, L_-m] = 2m L_0 + (T/12) m (m^2 - 1)
    for m, transverse in ((1, 3), (2, 3), (2, 4)):
        lhs = commutator(virasoro(m, transverse), virasoro(-m, transverse))
        central = Fraction(transverse, 12) * m * (m**2 - 1)
        rhs = virasoro(0, transverse).scale(2 * m) + identity(Coeff.rational(central))
        assert exprs_equal_on(lhs, rhs, states(LOW_STATES))


def test_virasoro_commutator_mixed_modes():
    # [L_1, L_-2] = 3 L_-1 on low-lying states
    lhs = commutator(virasoro(1), virasoro(-2))
    rhs = virasoro(-1).scale(3)
    assert exprs_equal_on(lhs, rhs, states(LOW_STATES))


def test_rotation_generator_rotates_ladder_index(params):
    m12 = lorentz_generator((1, 2), params)
    assert commutator(m12, creation(1, 1)) == creation(1, 2).scale(Coeff.imaginary(1))


def test_rotation_generator_antisymmetry(params):
    assert lorentz_generator((1, 1), params).is_zero()
    m12 = lorentz_generator((1, 2), params)
    m21 = lorentz_generator((2, 1), params)
    assert (m12 + m21).is_zero()


def test_rotation_algebra_closes(params):
    # [M^{ij}, M^{kl}] = -i (d_jk M^il - d_ik M^jl - d_jl M^ik + d_il M^jk)
    small = StringParams(alpha_prime=0.5, dims=5, mode_cutoff=2)
    m = {pair: lorentz_generator(pair, small) for pair in [(1, 2), (2, 3), (1, 3)]}
    lhs = commutator(m[(1, 2)], m[(2, 3)])
    assert lhs == m[(1, 3)].scale(Coeff.imaginary(-1))
    # disjoint index pairs commute outright
    bigger = StringParams(alpha_prime=0.5, dims=7, mode_cutoff=2)
    m12 = lorentz_generator((1, 2), bigger)
    m34 = lorentz_generator((3, 4), bigger)
    assert commutator(m12, m34).is_zero()


def test_m_plus_component(params):
    mi_plus = lorentz_generator((1, "+"), params)
    assert mi_plus == position(1).scale(Fraction(1))
    assert lorentz_generator(("+", 1), params) == position(1).scale(-1)


def test_plus_minus_component_rejected(params):
    with pytest.raises(UnsupportedComponentError):
        lorentz_generator(("+", "-"), params)
    with pytest.raises(UnsupportedComponentError):
        lorentz_generator((0, 2), params)
    with pytest.raises(UnsupportedComponentError):
        lorentz_generator((1, 99), params)


def test_m_minus_vacuum_expectation(params):
    # normal-ordered M^{i-} has vanishing vacuum expectation at a = 0;
    # oracle: state application in the aux representation
    expr = m_minus_expr(1, 3, 2, AP, PP, intercept=Fraction(0))
    vacuum = lift_gaussian_state(basis_state())
    out = apply_expr(expr, vacuum, AUX)
    assert out.get(((), ()), Coeff.zero()).is_zero()


def test_m_minus_hermitian():
    expr = m_minus_expr(1, 3, 2, AP, PP, intercept=Fraction(1))
    assert expr.dagger() == expr


def test_anomaly_polynomials(params):
    d1 = anomaly_coefficient(1, params)
    d2 = anomaly_coefficient(2, params)
    # standard closed form: m (26 - D)/12 + ((D - 26)/12 + 2(1 - a)) / m
    def closed_form(m, D, a):
        return (
            Fraction(m * (26 - D), 12)
            + (Fraction(D - 26, 12) + 2 * (1 - Fraction(a))) / m
        )
    for D in (3, 10, 25, 26, 27):
        for a in (0, 1, 2, Fraction(1, 2)):
            assert d1.evaluate(D, a) == closed_form(1, D, a)
            assert d2.evaluate(D, a) == closed_form(2, D, a)


def test_anomaly_vanishes_only_at_critical_point(params):
    d1 = anomaly_coefficient(1, params)
    d2 = anomaly_coefficient(2, params)
    assert d1.evaluate(26, 1) == 0
    assert d2.evaluate(26, 1) == 0
    assert (d1.evaluate(25, 1), d2.evaluate(25, 1)) != (0, 0)
    assert (d1.evaluate(26, 0), d2.evaluate(26, 0)) != (0, 0)
    assert solve_affine_system([d1, d2]) == ("point", Fraction(26), Fraction(1))


def test_anomaly_mode_three():
    # the truncation policy extends beyond the acceptance modes
    params = StringParams(alpha_prime=0.5, dims=26, mode_cutoff=6)
    d3 = anomaly_coefficient(3, params)
    assert d3.evaluate(26, 1) == 0
    assert d3.coefficient(1, 0) == Fraction(-2, 9)
    assert d3.coefficient(0, 1) == Fraction(-2, 3)
    assert d3.coefficient(0, 0) == Fraction(58, 9)


def test_anomaly_independent_of_alpha_prime_and_p_plus():
    base = anomaly_coefficient(1, StringParams(alpha_prime=0.5, mode_cutoff=2))
    other = anomaly_coefficient(
        1, StringParams(alpha_prime=2.0, mode_cutoff=2, p_plus=3.0)
    )
    assert base == other


def test_anomaly_truncation_guard():
    with pytest.raises(TruncationError):
        anomaly_coefficient(3, StringParams(alpha_prime=0.5, mode_cutoff=4))
    with pytest.raises(TruncationError):
        anomaly_value_direct(3, StringParams(alpha_prime=0.5, mode_cutoff=4), 1)


def test_anomaly_direct_matches_polynomial(params):
    # direct evaluation at the physical transverse count (no interpolation)
    d2 = anomaly_coefficient(2, params)
    assert anomaly_value_direct(2, params, 1) == d2.evaluate(26, 1)
    params25 = StringParams(alpha_prime=0.5, dims=25, mode_cutoff=4)
    assert anomaly_value_direct(2, params25, 1) == d2.evaluate(25, 1)


def test_m_minus_commutator_matches_raw_application():
    # oracle: sequential application of the raw generator terms, no Wick engine
    a_val = Fraction(1)
    transverse, n_max = 3, 2
    terms1 = m_minus_alpha_terms(1, transverse, n_max, AP, PP, intercept=a_val)
    terms2 = m_minus_alpha_terms(2, transverse, n_max, AP, PP, intercept=a_val)
    C = commutator(
        m_minus_expr(1, transverse, n_max, AP, PP, intercept=a_val),
        m_minus_expr(2, transverse, n_max, AP, PP, intercept=a_val),
    )
    raw1 = substitute_alpha_terms(terms1, a_val)
    raw2 = substitute_alpha_terms(terms2, a_val)
    for occ, aux_occ in [({}, {}), ({(1, 2): 1}, {}), ({(2, 2): 1}, {1: 1})]:
        gf_state = basis_state(occ, aux_occ)
        sym = apply_expr(C, lift_gaussian_state(gf_state), AUX)
        raw = lift_gaussian_state(commutator_application(raw1, raw2, gf_state, AUX))
        assert states_equal(sym, raw)


def test_anomaly_report_format(params):
    report = anomaly_report(params)
    assert "Delta_1(D, a)" in report
    assert "Delta_1(26, 1) = 0" in report
    assert "Delta_2(26, 1) = 0" in report
    assert "joint solution: D = 26, a = 1" in report


def test_poly_da_helpers():
    poly = PolyDA({(1, 0): Fraction(2), (0, 0): Fraction(-52)})
    assert poly.evaluate(26, 7) == 0
    assert poly.is_affine()
    assert not poly.is_zero()
    assert solve_affine_system(
        [poly, PolyDA({(0, 1): Fraction(1), (0, 0): Fraction(-1)})]
    ) == ("point", Fraction(26), Fraction(1))
