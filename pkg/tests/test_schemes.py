"""Scheme dimensioning: group sequences, stage counts, rates."""

from fractions import Fraction

import pytest

from wtcpir.schemes import (
    EavesdropProfile,
    achievable_rate,
    as_fraction,
    best_scheme,
    derive_groups,
    enumerate_sequences,
    n2_closed_form,
    plan_dimensions_per_rep,
    repetition_factor,
    stage_counts,
    traffic_vector,
)

from oracles import classic_rate, m2n3_rates, m4n2_rates, n2_rate_formula, M2N3_SEQUENCES

WORKED_MU = EavesdropProfile(["1/4", "1/2"])


def test_profile_validation():
    with pytest.raises(TypeError):
        EavesdropProfile([0.25, 0.5])
    with pytest.raises(ValueError):
        EavesdropProfile(["1/2", "1/4"])
    with pytest.raises(ValueError):
        EavesdropProfile(["1/2", "1"])
    with pytest.raises(ValueError):
        EavesdropProfile([])
    p = EavesdropProfile(["1/4", "1/2"])
    assert p.N == 2 and p.x(2) == 2


def test_as_fraction_rejects_floats():
    with pytest.raises(TypeError):
        as_fraction(0.25)
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction(2) == 2


def test_derive_groups_structure():
    g = derive_groups(3, 2, (1, 2, 2))
    assert g.S == (0, 1) and g.xi == {0: 1, 1: 1}
    assert g.width(0) == 1 and g.width(1) == 1
    assert g.group_of(1) == 0 and g.group_of(2) == 1
    assert list(g.active_databases) == [1, 2]

    g4 = derive_groups(4, 2, (1, 1, 2, 2))
    assert g4.S == (0, 2) and g4.xi == {0: 2, 2: 1}

    with pytest.raises(ValueError):
        derive_groups(3, 2, (2, 1, 2))
    with pytest.raises(ValueError):
        derive_groups(3, 2, (1, 2, 3))
    with pytest.raises(ValueError):
        derive_groups(3, 2, (0, 1, 2))


# Frozen stage-count goldens: {(vector): {group: (y[1..M])}}
STAGE_GOLDENS = {
    (1, 2, 2): {0: (1, 0, 1), 1: (0, 1, 0)},
    (1, 1, 2, 2): {0: (2, 0, 0, 1), 2: (0, 0, 1, 0)},
    (1, 2, 2, 2): {0: (1, 0, 1, 0), 1: (0, 1, 0, 1)},
    (1, 1, 1, 2): {0: (1, 0, 0, 0), 3: (0, 0, 0, 1)},
    (2, 2, 2, 2): {0: (1, 1, 1, 1)},
    (2, 3): {0: (1, 1), 1: (0, 2)},
}


def test_stage_count_goldens():
    for vec, rows in STAGE_GOLDENS.items():
        M = len(vec)
        g = derive_groups(M, max(vec), vec)
        sc = stage_counts(g)
        for group, expected in rows.items():
            assert sc.row(group, M) == expected, (vec, group)


def test_dimension_goldens():
    cases = {
        (1, 2, 2): ((4, 3), 4),
        (1, 1, 2, 2): ((9, 4), 6),
        (1, 2, 2, 2): ((8, 7), 8),
        (1, 1, 1, 2): ((4, 1), 2),
        (2, 2, 2, 2): ((15, 15), 16),
    }
    for vec, (D, L) in cases.items():
        g = derive_groups(len(vec), max(vec), vec)
        assert plan_dimensions_per_rep(g) == (D, L), vec


def test_repetition_factor_worked_example():
    g = derive_groups(3, 2, (1, 2, 2))
    dims = repetition_factor(g, WORKED_MU)
    assert dims.nu == 3
    assert dims.t == (16, 18)
    assert dims.key_len == (4, 9)
    assert dims.L == 12


def test_repetition_factor_no_eavesdropping_and_halves():
    g = derive_groups(3, 2, (1, 2, 2))
    d0 = repetition_factor(g, EavesdropProfile([0, 0]))
    assert d0.nu == 1 and d0.t == (4, 3) and d0.key_len == (0, 0)
    dh = repetition_factor(g, EavesdropProfile(["1/2", "1/2"]))
    assert dh.nu == 1 and dh.t == (8, 6) and dh.key_len == (4, 3)


def test_traffic_vector():
    g = derive_groups(3, 2, (1, 2, 2))
    assert traffic_vector(g) == (Fraction(4, 7), Fraction(3, 7))
    flat = derive_groups(3, 2, (2, 2, 2))
    assert traffic_vector(flat) == (Fraction(1, 2), Fraction(1, 2))
    solo = derive_groups(2, 3, (1, 1))
    assert traffic_vector(solo) == (1, 0, 0)
    for vec in [(1, 2, 2), (2, 3), (1, 1, 2, 2)]:
        tv = traffic_vector(derive_groups(len(vec), max(vec), vec))
        assert sum(tv) == 1
        assert all(a >= b for a, b in zip(tv, tv[1:]))


def test_achievable_rate_goldens():
    g = derive_groups(3, 2, (1, 2, 2))
    assert achievable_rate(g, WORKED_MU) == Fraction(6, 17)
    g4 = derive_groups(4, 2, (1, 2, 2, 2))
    x, y = WORKED_MU.x(1), WORKED_MU.x(2)
    assert achievable_rate(g4, WORKED_MU) == Fraction(8) / (8 * x + 7 * y)


def test_classic_reduction_rates():
    for M in range(2, 6):
        for N in range(2, 6):
            mu = EavesdropProfile([0] * N)
            g = derive_groups(M, N, (N,) * M)
            assert achievable_rate(g, mu) == classic_rate(M, N)


def test_best_scheme_worked_example_and_ties():
    g, rate = best_scheme(3, 2, WORKED_MU)
    assert g.n == (1, 2, 2) and rate == Fraction(6, 17)

    # with no eavesdropping the lex-smallest of the tied optima wins
    g0, rate0 = best_scheme(3, 2, EavesdropProfile([0, 0]))
    assert rate0 == classic_rate(3, 2) == Fraction(4, 7)
    assert g0.n == (1, 2, 2)
    assert achievable_rate(derive_groups(3, 2, (2, 2, 2)), EavesdropProfile([0, 0])) == rate0

    g1, rate1 = best_scheme(2, 3, EavesdropProfile([0, 0, 0]))
    assert rate1 == Fraction(3, 4) and g1.n == (1, 3)
    assert achievable_rate(derive_groups(2, 3, (3, 3)), EavesdropProfile([0, 0, 0])) == rate1


def test_enumerate_sequences_monotone_complete():
    seqs = [g.n for g in enumerate_sequences(3, 2)]
    assert seqs == [(1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2)]
    assert len(list(enumerate_sequences(4, 3))) == 15


def test_m4n2_rate_family():
    order = [(1, 1, 1, 1), (1, 1, 1, 2), (1, 1, 2, 2), (1, 2, 2, 2)]
    exprs = m4n2_rates(*WORKED_MU.mu)
    for vec, expr in zip(order, exprs):
        assert achievable_rate(derive_groups(4, 2, vec), WORKED_MU) == expr


def test_m2n3_rate_family():
    mu = EavesdropProfile(["1/8", "1/4", "1/2"])
    exprs = m2n3_rates(mu.mu)
    for vec, expr in zip(M2N3_SEQUENCES, exprs):
        assert achievable_rate(derive_groups(2, 3, vec), mu) == expr


def test_n2_closed_form_matches_leading_singles_sequences():
    for M in (3, 4, 5):
        for s2 in range(1, M):
            vec = (1,) * s2 + (2,) * (M - s2)
            g = derive_groups(M, 2, vec)
            assert n2_closed_form(M, s2, WORKED_MU) == achievable_rate(g, WORKED_MU), (M, s2)


def test_n2_closed_form_matches_independent_formula():
    for M in range(2, 7):
        for s2 in range(0, M):
            assert n2_closed_form(M, s2, WORKED_MU) == n2_rate_formula(M, s2, WORKED_MU.mu)


def test_n2_closed_form_validation():
    with pytest.raises(ValueError):
        n2_closed_form(3, 3, WORKED_MU)
    with pytest.raises(ValueError):
        n2_closed_form(3, -1, WORKED_MU)
    with pytest.raises(ValueError):
        n2_closed_form(3, 1, EavesdropProfile(["1/4", "1/3", "1/2"]))


def test_rate_monotone_in_eavesdropping():
    g = derive_groups(3, 2, (1, 2, 2))
    weaker = achievable_rate(g, EavesdropProfile(["1/8", "1/4"]))
    stronger = achievable_rate(g, EavesdropProfile(["1/4", "1/2"]))
    assert weaker > stronger
