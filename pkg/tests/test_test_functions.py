import math

import numpy as np
import pytest
from scipy import integrate

from sparserecovery import test_functions as tf
from sparserecovery.analysis import monte_carlo_lq
from sparserecovery.dictionaries import chebyshev, fourier
from sparserecovery.errors import UnsupportedError
from sparserecovery.index_sets import hyperbolic_cross


def fourier_quad(g, k):
    kinks = [0.5 - math.sqrt(0.2), 0.5 + math.sqrt(0.2)]
    re, _ = integrate.quad(lambda x: g(x) * math.cos(2 * math.pi * k * x), 0, 1, points=kinks, limit=400,
                           epsabs=1e-13)
    im, _ = integrate.quad(lambda x: -g(x) * math.sin(2 * math.pi * k * x), 0, 1, points=kinks, limit=400,
                           epsabs=1e-13)
    return complex(re, im)


# ---------------------------------------------------------------- Example 1


def test_example1_values():
    assert tf.example1_g(0.0) == 0.0
    # the mean of g, obtained by direct integration
    assert tf.example1_ghat(0) == pytest.approx(5**0.25 / math.sqrt(3), rel=1e-14)
    assert tf.example1_ghat(0) == pytest.approx(fourier_quad(tf.example1_g, 0).real, abs=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3, 7, 20])
def test_example1_coefficients_by_quadrature(k):
    assert abs(tf.example1_ghat(k) - fourier_quad(tf.example1_g, k)) < 1e-8


def test_example1_even_and_real():
    k = np.arange(1, 101)
    assert np.array_equal(tf.example1_ghat(k), tf.example1_ghat(-k))
    gt = tf.example1(2)
    K = np.array([[3, -4], [-3, 4], [3, 4]])
    c = gt.coefficients(K)
    assert np.all(np.isreal(c)) and c[0] == c[1] == c[2]


def test_example1_norm_by_quadrature():
    val, _ = integrate.quad(lambda x: tf.example1_g(x) ** 2, 0, 1,
                            points=[0.5 - math.sqrt(0.2), 0.5 + math.sqrt(0.2)])
    assert val == pytest.approx(1.0, abs=1e-12)


def test_example1_series_synthesis():
    k = np.arange(-10**4, 10**4 + 1)
    c = tf.example1_ghat(k)
    x = np.random.default_rng(0).random(100)
    synth = (np.exp(2j * np.pi * np.outer(x, k)) @ c).real
    tail = tf.example1(1).l1_upper - np.abs(c).sum()
    assert tail > 0
    assert np.abs(synth - tf.example1_g(x)).max() <= tail + 1e-10


# ---------------------------------------------------------------- Example 2


def test_bspline_constants():
    assert tf.bspline_constant(2) == pytest.approx(math.sqrt(3) / 2, abs=1e-10)
    # independent direct summation with a much longer series
    k = np.arange(1, 10**6 + 1)
    s8 = 1 + 2 * np.sum((np.sin(np.pi * k / 4) / (np.pi * k / 4)) ** 8)
    assert tf.bspline_constant(4) == pytest.approx(1 / math.sqrt(s8), abs=1e-12)
    assert tf.bspline_tail_bound(4) < 1e-20


def test_bspline_zeros():
    k = np.array([2, 4, -6, 10])
    assert np.all(tf.bspline_coefficients(2, k) == 0)
    gt = tf.example2()
    K = np.zeros((3, 7), dtype=np.int64)
    K[0, 0] = 2  # even frequency in an N_2 coordinate
    K[1, 0], K[1, 1] = 1, 1  # both products touched
    K[2, 1] = 2  # N_4 coordinate, nonzero
    c = gt.coefficients(K)
    assert c[0] == 0 and c[1] == 0 and c[2] != 0


@pytest.mark.parametrize("order", [2, 4])
def test_bspline_pointwise_matches_series(order):
    k = np.arange(-2000, 2001)
    c = tf.bspline_coefficients(order, k)
    x = np.random.default_rng(order).random(100)
    synth = (np.exp(2j * np.pi * np.outer(x, k)) @ c).real
    assert np.abs(synth - tf.bspline_periodic(order, x)).max() < (1e-3 if order == 2 else 1e-9)


def test_bspline_mean_is_constant():
    val, _ = integrate.quad(lambda x: tf.bspline_periodic(4, x), 0, 1, points=[0.25, 0.5, 0.75])
    assert val == pytest.approx(tf.bspline_constant(4), rel=1e-10)


def test_example2_parseval_partial_sums():
    gt = tf.example2()
    sums = [float(np.sum(np.abs(gt.coefficients(hyperbolic_cross(s, 7))) ** 2)) for s in (2, 4, 8, 16)]
    assert all(b >= a for a, b in zip(sums, sums[1:]))
    assert sums[-1] <= 1.0 and sums[-1] > 0.99


def test_example2_mc_norm():
    gt = tf.example2()
    est, se = monte_carlo_lq(gt, None, 2, 10**6, 11, fourier(7))
    assert abs(est - 1.0) <= 3 * se + 1e-12


# ---------------------------------------------------------------- Example 3


def test_example3_values():
    assert tf.example3_ghat(0) == pytest.approx(tf.EXAMPLE3_SCALE * 15 / 32, rel=1e-14)
    assert tf.example3_ghat(0) == pytest.approx(0.887725, abs=1e-6)
    assert np.all(tf.example3_ghat(np.arange(4, 200, 2)) == 0)


def test_example3_coefficients_by_quadrature():
    # Gauss-Chebyshev quadrature of g against sqrt(2)^{min(1,k)} T_k
    n = 20000
    t = (np.arange(n) + 0.5) * math.pi / n
    x = np.cos(t)
    g = tf.example3_g(x)
    for k in range(12):
        atom = np.cos(k * t) * (math.sqrt(2) if k else 1.0)
        assert np.mean(g * atom) == pytest.approx(float(tf.example3_ghat(k)), abs=1e-8)


def test_example3_series_at_endpoint():
    k = np.arange(0, 10**4 + 1)
    c = tf.example3_ghat(k)
    atoms_at_1 = np.where(k == 0, 1.0, math.sqrt(2))
    assert float(c @ atoms_at_1) == pytest.approx(float(tf.example3_g(1.0)), abs=1e-6)


def test_example3_norm_one():
    val, _ = integrate.quad(lambda t: tf.example3_g(math.cos(t)) ** 2 / math.pi, 0, math.pi,
                            points=[math.pi / 2])
    assert val == pytest.approx(1.0, abs=1e-12)
    k = np.arange(0, 10**5)
    assert np.sum(tf.example3_ghat(k) ** 2) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- Example 4


def test_example4_norm_base():
    assert tf.EXAMPLE4_BASE == pytest.approx(21.906957759607, rel=1e-12)
    assert tf._kink_norm_sq(1.0, 0.4) == pytest.approx(tf.EXAMPLE4_BASE, rel=1e-10)


def test_example4_kink_point():
    gt = tf.example4(3, normalized=False)
    x = np.full((1, 3), (6 + 0.4) / 8)
    assert gt(x)[0] == pytest.approx(2.0**-3)


def test_example4_normalized_mc():
    gt = tf.example4(4)
    est, _ = monte_carlo_lq(gt, None, 2, 10**6, 5, chebyshev(4))
    assert abs(est - 1.0) < 0.01


def test_example4_custom_parameters():
    c, w = [0.5, 2.0], [0.1, -0.3]
    gt = tf.example4(2, c=c, w=w)
    est, se = monte_carlo_lq(gt, None, 2, 400_000, 1, chebyshev(2))
    assert abs(est - 1.0) <= 4 * se + 1e-3


def test_example4_has_no_oracle():
    gt = tf.example4(2)
    assert not gt.has_coefficients
    with pytest.raises(UnsupportedError):
        gt.coefficients([[0, 0]])


# ---------------------------------------------------------------- shared


@pytest.mark.parametrize("gt", [tf.example1(3), tf.example3(3)], ids=["ex1", "ex3"])
def test_parseval_monotone(gt):
    sums = []
    for s in (2, 4, 8, 16, 32):
        J = hyperbolic_cross(s, gt.dim, signed=gt.signed)
        sums.append(float(np.sum(np.abs(gt.coefficients(J)) ** 2)))
    assert all(b >= a for a, b in zip(sums, sums[1:]))
    assert sums[-1] <= gt.norm_sq + 1e-12


def test_dump_coefficients(tmp_path):
    gt = tf.example1(2)
    J = hyperbolic_cross(3, 2)
    gt.dump_coefficients(J, tmp_path / "c.txt")
    lines = (tmp_path / "c.txt").read_text().splitlines()
    assert len(lines) == len(J)
    first = lines[0].split()
    assert len(first) == 4
    assert float(first[2]) == pytest.approx(float(gt.coefficients(J.indices[:1])[0]))


def test_by_name():
    assert tf.by_name(2).dim == 7
    with pytest.raises(ValueError):
        tf.by_name(5, 2)
