from fractions import Fraction

import numpy as np
import pytest

from bvlab import fixtures as fx
from bvlab.space import DomainSpec, build_domain


def test_ones_measure_is_exact():
    # u(4 t) = 1 on [0, 1/8) and [1/4, 3/8)
    assert fx._ones_measure(1, Fraction(1, 4)) == Fraction(1, 8)
    assert fx._ones_measure(1, Fraction(5, 16)) == Fraction(1, 8) + Fraction(1, 16)
    assert fx._ones_measure(2, Fraction(1)) == Fraction(1, 2)


def test_divergent_fixed_balls_matches_sampling():
    # fine sampling of the same sum, with Lebesgue measure on (0, 1)
    J = 2
    value, table = fx.divergent_fixed_balls(J, extra_levels=6)
    n = 2**16
    t = (np.arange(n) + 0.5) / n
    v = fx.divergent(J)(t)
    total = 0.0
    for k, contrib in table[:8]:
        step = 2**-k
        s = 0.0
        for l in range(2**k - 1):
            m = (t >= l * step) & (t < (l + 2) * step)
            s += np.abs(v[m] - v[m].mean()).sum() / n
        assert s == pytest.approx(contrib, abs=2e-3)


def test_divergent_grows_like_harmonic_numbers():
    r = [fx.divergent_fixed_balls(J)[0] / fx.harmonic(J) for J in (2, 4, 8)]
    assert max(r) / min(r) < 1.1


def test_thin_tube_norms_double():
    ratios = [fx.thin_tube_norms(n)["ratio"] for n in range(2, 9)]
    np.testing.assert_allclose(np.array(ratios[1:]) / ratios[:-1], 2.0, rtol=1e-12)
    t = fx.thin_tube_norms(3)
    assert t["l1"] == pytest.approx(2 * 4.0**-3 * 2.0**-3)
    assert t["variation"] == pytest.approx(2 * 4.0**-3)


def test_thin_tube_trace_measure_is_calibrated():
    disc = build_domain(DomainSpec("thin-tubes", 1 / 8, N=4))
    exact = fx.thin_tube_norms(3)["trace_l1"]
    assert fx.thin_tube_trace_measure(disc, 3) == pytest.approx(exact, rel=0.1)


def test_fixture_family_is_seeded(square32):
    disc, _, _ = square32
    a = fx.fixture_family(disc, 10, seed=3)
    b = fx.fixture_family(disc, 10, seed=3)
    assert [n for n, _ in a] == [n for n, _ in b]
    for (_, f), (_, g) in zip(a, b):
        np.testing.assert_array_equal(f.values, g.values)
    kinds = {n.split("-")[0] for n, _ in a}
    assert kinds == {"linear", "lipschitz", "step", "arc", "wave"}


def test_named_fixture_errors(square32):
    disc, _, _ = square32
    with pytest.raises(KeyError):
        fx.named_fixture("spiral", disc)


def test_weierstrass_partial_sum():
    w = fx.weierstrass(3, 0.5)
    t = np.array([0.0, 0.5])
    expected = [sum(2.0 ** (-k / 2) for k in (1, 2, 3)), -2**-0.5 + 0.5 + 2**-1.5]
    np.testing.assert_allclose(w(t), expected)
