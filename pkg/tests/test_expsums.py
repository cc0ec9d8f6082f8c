import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp, mpf

from psmod1 import (InvalidLambda, RegimeViolation, make_phase, parse_real,
                    q0_choice, s_of_x, theta_sum, type2_envelope,
                    van_der_corput_check, vaughan_coefficients,
                    vaughan_decompose, weyl_shift_check)
from psmod1.expsums import type2_envelope_terms
from psmod1.ps_primes import chebyshev_theta
from psmod1.rational_approx import DirichletApprox, dirichlet_approx

from conftest import oracle_lambda_table, oracle_primes, oracle_tau


def oracle_phase_sum(ns, weights, phases):
    """Weighted exponential sum via cmath, one term at a time."""
    total = 0j
    for n, wgt, ph in zip(ns, weights, phases):
        total += wgt * cmath.exp(2j * math.pi * ph)
    return total


class TestSOfX:
    def test_single_prime(self, sqrt2):
        ap = dirichlet_approx(sqrt2, 5)
        rep = s_of_x(sqrt2, 2, ap)
        with mp.workdps(40):
            want = mp.e ** (2j * mp.pi * (mp.sqrt(2) * 2)) * mp.log(2)
            assert rep.value.real == pytest.approx(float(want.real), abs=1e-12)
            assert rep.value.imag == pytest.approx(float(want.imag), abs=1e-12)

    def test_alpha_zero_is_chebyshev_exactly(self, zero):
        ap = DirichletApprox(0, 1, 10)
        for X in (10 ** 3, 10 ** 5):
            rep = s_of_x(zero, X, ap)
            assert rep.value.real == chebyshev_theta(X)
            assert rep.value.imag == 0.0

    def test_direct_oracle_1e3(self, sqrt2):
        ap = dirichlet_approx(sqrt2, 31)
        rep = s_of_x(sqrt2, 10 ** 3, ap)
        with mp.workdps(50):
            s2 = mp.sqrt(2)
            want = sum(mp.e ** (2j * mp.pi * (s2 * p)) * mp.log(p)
                       for p in oracle_primes(10 ** 3))
            assert abs(rep.value - complex(want)) < 1e-9
        assert rep.ratio == rep.abs / rep.bound

    def test_bound_formula(self, sqrt2):
        ap = dirichlet_approx(sqrt2, 31)
        rep = s_of_x(sqrt2, 1000, ap)
        q = ap.q_h
        want = (1000 / math.sqrt(q) + 1000 ** 0.8
                + math.sqrt(1000 * q)) * math.log(1000) ** 4
        assert rep.bound == pytest.approx(want)


class TestThetaSum:
    def test_chebyshev_case(self, zero):
        rep = theta_sum(10 ** 3, 2 * 10 ** 3, zero, 0, 0, 0.95)
        lam = oracle_lambda_table(2 * 10 ** 3)
        want = sum(lam[10 ** 3 + 1:])
        assert rep.value.imag == 0.0
        assert rep.value.real == pytest.approx(want, rel=1e-12)

    def test_linear_phase_reduction(self, sqrt2):
        rep = theta_sum(500, 900, sqrt2, 2, 0, 0.95)
        lam = oracle_lambda_table(900)
        with mp.workdps(50):
            s2 = mp.sqrt(2)
            want = sum(lam[n] * mp.e ** (2j * mp.pi * (2 * s2 * n))
                       for n in range(501, 901) if lam[n])
            assert abs(rep.value - complex(want)) < 1e-9

    def test_full_phase_oracle(self, sqrt2):
        g = Fraction(19, 20)
        rep = theta_sum(10 ** 3, 2 * 10 ** 3, sqrt2, 1, 2, g)
        lam = oracle_lambda_table(2 * 10 ** 3)
        with mp.workdps(60):
            s2 = mp.sqrt(2)
            want = sum(lam[n] * mp.e ** (2j * mp.pi * (s2 * n - 2 * mpf(n) ** (mpf(19) / 20)))
                       for n in range(10 ** 3 + 1, 2 * 10 ** 3 + 1) if lam[n])
            assert abs(rep.value - complex(want)) < 1e-9 * (1 + abs(complex(want)))

    def test_conjugation_symmetry(self, sqrt2):
        g = Fraction(19, 20)
        rep = theta_sum(1500, 3000, sqrt2, 1, 2, g)
        neg = theta_sum(1500, 3000, parse_real("-sqrt:2"), 1, -2, g)
        assert abs(neg.value - rep.value.conjugate()) \
            <= 1e-12 * (1 + abs(rep.value))


class TestVaughan:
    def test_coefficient_edge_values(self):
        assert vaughan_coefficients(1, 5) == (0.0, 1)
        c, a = vaughan_coefficients(3, 5)
        assert c == pytest.approx(math.log(3))
        c7, _ = vaughan_coefficients(7, 7)
        assert c7 == pytest.approx(math.log(7))

    def test_coefficient_bounds_to_500(self):
        v = 12
        for d in range(2, 501):
            c, a = vaughan_coefficients(d, v)
            assert abs(c) <= math.log(d) + 1e-12
            assert abs(a) <= oracle_tau(d)

    def test_phase_free_identity(self):
        vp = vaughan_decompose(400, 800, lambda ns: np.zeros(len(ns)), 4)
        lam = oracle_lambda_table(800)
        want = sum(lam[401:])
        assert vp.reconstruction.imag == pytest.approx(0.0, abs=1e-12)
        assert vp.reconstruction.real == pytest.approx(want, rel=1e-11)

    def test_linear_phase_example(self):
        alpha = 0.7312912
        f = lambda ns: alpha * ns.astype(np.float64)
        vp = vaughan_decompose(400, 800, f, 4)
        lam = oracle_lambda_table(800)
        want = oracle_phase_sum(range(401, 801), lam[401:],
                                [alpha * n for n in range(401, 801)])
        assert abs(vp.reconstruction - want) <= 1e-9 * (1 + abs(want))

    def test_bilinear_phase_midscale(self, sqrt2):
        g = Fraction(19, 20)
        f = make_phase(sqrt2, 1, 1, g)
        vp = vaughan_decompose(10 ** 4, 2 * 10 ** 4, f, 5)
        lam = oracle_lambda_table(2 * 10 ** 4)
        ns = [n for n in range(10 ** 4 + 1, 2 * 10 ** 4 + 1) if lam[n]]
        phases = f(np.array(ns, dtype=np.int64))
        want = oracle_phase_sum(ns, [lam[n] for n in ns], phases.tolist())
        assert abs(vp.reconstruction - want) <= 1e-9 * (1 + abs(want))

    def test_regime_violation(self):
        with pytest.raises(RegimeViolation):
            vaughan_decompose(15, 100, lambda ns: np.zeros(len(ns)), 4)

    def test_parts_recorded(self):
        vp = vaughan_decompose(400, 800, lambda ns: np.zeros(len(ns)), 4)
        assert vp.reconstruction == vp.U1 - vp.U2 - vp.U3 - vp.U4
        assert vp.v == 4


class TestVanDerCorput:
    def test_quadratic_example(self):
        r = van_der_corput_check(
            lambda ns: 0.01 * ns.astype(np.float64) ** 2, 0, 100, 0.02)
        assert math.isfinite(r.ratio) and r.lhs >= 0

    def test_single_point_interval(self):
        for lam in (0.001, 0.5, 3.0):
            r = van_der_corput_check(
                lambda ns: 0.3 * ns.astype(np.float64) ** 2, 10, 11, lam)
            assert r.lhs <= 1.0 <= r.rhs + 1e-12

    def test_row_phase_family_ratio_stable(self, sqrt2):
        # the d-row phases of the bilinear piece: recorded empirical constant
        g = Fraction(19, 20)
        ratios = []
        n1 = 4096
        for d in (8, 16, 32):
            for m in (1, 2, 4):
                f = make_phase(sqrt2, 1, m, g)
                lam = m * d * d * n1 ** (float(g) - 2.0)
                r = van_der_corput_check(
                    lambda ls, d=d, f=f: f(ls * d), n1 // d, 2 * n1 // d, lam)
                ratios.append(r.ratio)
        assert max(ratios) <= 2.0

    def test_invalid_lambda(self):
        with pytest.raises(InvalidLambda):
            van_der_corput_check(lambda ns: ns * 0.1, 0, 10, 0.0)


class TestWeylShift:
    def test_single_entry(self):
        seq = np.zeros(16, dtype=complex)
        seq[5] = 3 - 4j
        r = weyl_shift_check(seq, 4)
        assert r.lhs == pytest.approx(25.0)
        assert r.holds

    def test_constant_sequence_closed_form(self):
        N, Q = 64, 32
        r = weyl_shift_check(np.ones(N, dtype=complex), Q)
        assert r.lhs == pytest.approx(float(N * N))
        inner = N + 2 * sum((1 - q / Q) * (N - q) for q in range(1, Q + 1))
        assert r.rhs == pytest.approx((1 + N / Q) * inner)
        assert r.holds

    def test_thousand_random_sequences(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            L = int(rng.integers(2, 513))
            Q = int(rng.integers(1, max(2, L // 2 + 1)))
            seq = rng.normal(size=L) + 1j * rng.normal(size=L)
            assert weyl_shift_check(seq, Q).holds

    def test_rhs_is_real_by_symmetry(self):
        rng = np.random.default_rng(9)
        seq = rng.normal(size=40) + 1j * rng.normal(size=40)
        r = weyl_shift_check(seq, 10)
        assert isinstance(r.rhs, float)


class TestQ0Choice:
    def test_exponent_arithmetic(self):
        # m=1, D=L, gamma -> 1: Q0 ~ D^(1/3)
        r = q0_choice(1, 4096, 4096, 0.999999)
        assert r.value == pytest.approx(4096 ** (1 / 3), rel=0.01)

    def test_integer_value(self):
        r = q0_choice(8, 64, 64, 0.95)
        want = 8 ** (-1 / 3) * 64 ** (2 / 3 - 0.95 / 3) * 64 ** (1 / 3 - 0.95 / 3)
        assert r.value == round(want)
        assert not r.clamped

    def test_clamp_to_one(self):
        r = q0_choice(10 ** 9, 2, 2, 0.95)
        assert r.value == 1 and r.clamped

    def test_clamp_to_half_length(self):
        r = q0_choice(1, 10 ** 6, 4, 0.95)
        assert r.value == 2 and r.clamped


class TestType2Envelope:
    def test_all_ones(self):
        terms = type2_envelope_terms(1, 1, 1, 0.95)
        assert terms == (1, 1.0, 1.0, 1.0)
        assert sum(terms) == 4.0

    def test_example_value(self):
        env = type2_envelope(32, 32, 2, 0.95, 4, 10 ** 5)
        want = math.sqrt(sum(type2_envelope_terms(32, 32, 2, 0.95))) \
            * math.log(10 ** 5) ** 2
        assert env == pytest.approx(want)

    def test_term_monotonicity_in_m(self):
        # within each term signature: positive powers of m rise, negative fall
        ms = [1, 2, 4, 8, 16]
        t = [type2_envelope_terms(32, 64, m, 0.95) for m in ms]
        assert all(a[1] <= b[1] for a, b in zip(t, t[1:]))
        assert all(a[2] >= b[2] for a, b in zip(t, t[1:]))
        assert all(a[3] >= b[3] for a, b in zip(t, t[1:]))
        assert all(a[0] == b[0] for a, b in zip(t, t[1:]))
