"""Kernels, Gram matrices, and finite-expansion RKHS norms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from defcast.kernels import Kernel, KernelError, KernelExpansion

SOB = Kernel.sobolev()
LN2 = math.log(2)

points_strategy = st.lists(
    st.floats(min_value=-3.0, max_value=3.0), min_size=1, max_size=64)


# -- evaluation -----------------------------------------------------------

def test_eval_values():
    assert SOB(0.0, 0.0) == 0.5
    assert SOB(0.0, LN2) == pytest.approx(0.25, abs=1e-15)
    assert Kernel.gaussian(1.0)(0.0, 0.0) == 1.0
    assert Kernel.linear(offset=0.5)(2.0, 3.0) == 6.5


def test_eval_broadcasts():
    xs = np.array([0.0, 1.0, -1.0])
    vals = SOB(0.0, xs)
    assert vals.shape == (3,)
    assert vals[0] == 0.5
    assert vals[1] == vals[2] == pytest.approx(0.5 * math.exp(-1), abs=1e-15)


def test_symmetry():
    rng = np.random.default_rng(0)
    for k in (SOB, Kernel.gaussian(0.7), Kernel.linear(offset=0.3)):
        for _ in range(20):
            a, b = rng.uniform(-2, 2, 2)
            assert float(k(a, b)) == pytest.approx(float(k(b, a)), abs=1e-15)


def test_custom_kernel_eval():
    k = Kernel.custom(lambda a, b: min(a, b) + 1.0, data_range=1.0)
    assert k(0.25, 0.75) == 1.25


# -- diagonal sup ---------------------------------------------------------

def test_c_f_values():
    assert SOB.c_f() == pytest.approx(1.0 / math.sqrt(2), abs=1e-15)
    assert Kernel.gaussian(0.1).c_f() == 1.0
    assert Kernel.linear(data_range=2.0).c_f() == pytest.approx(2.0, abs=1e-6)


def test_c_f_unbounded_without_range():
    assert math.isinf(Kernel.linear().c_f())
    assert math.isinf(Kernel.custom(lambda a, b: a * b).c_f())


def test_c_f_squared_is_the_sobolev_diagonal():
    for x in np.linspace(-5, 5, 11):
        assert SOB.c_f() ** 2 == pytest.approx(float(SOB.diag(x)), abs=1e-12)


def test_constructor_validation():
    with pytest.raises(KernelError):
        Kernel.gaussian(0.0)
    with pytest.raises(KernelError):
        Kernel.linear(offset=-1.0)


# -- Gram matrices --------------------------------------------------------

def test_gram_values():
    assert np.allclose(SOB.gram([0.0]), [[0.5]])
    g = SOB.gram([0.0, LN2])
    assert np.allclose(g, [[0.5, 0.25], [0.25, 0.5]], atol=1e-15)


def test_gram_permutation():
    pts = [0.3, -1.2, 0.8, 2.5]
    perm = [2, 0, 3, 1]
    g = SOB.gram(pts)
    gp = SOB.gram([pts[i] for i in perm])
    assert np.allclose(gp, g[np.ix_(perm, perm)])


def test_gram_empty_rejected():
    with pytest.raises(KernelError):
        SOB.gram([])


@settings(max_examples=40, deadline=None)
@given(points_strategy)
def test_gram_psd_sobolev(pts):
    eig = np.linalg.eigvalsh(SOB.gram(pts))
    assert eig.min() >= -1e-8


@settings(max_examples=40, deadline=None)
@given(points_strategy)
def test_gram_psd_gaussian(pts):
    eig = np.linalg.eigvalsh(Kernel.gaussian(0.5).gram(pts))
    assert eig.min() >= -1e-8


@settings(max_examples=40, deadline=None)
@given(points_strategy)
def test_gram_psd_linear(pts):
    eig = np.linalg.eigvalsh(Kernel.linear(offset=1.0).gram(pts))
    assert eig.min() >= -1e-8


# -- expansions -----------------------------------------------------------

def test_norm_values():
    assert KernelExpansion.zero(SOB).norm() == 0.0
    assert KernelExpansion.build([0.0], [0.0], SOB).norm() == 0.0
    assert KernelExpansion.build([0.0], [1.0], SOB).norm() == pytest.approx(
        math.sqrt(0.5), abs=1e-15)
    e = KernelExpansion.build([0.0, LN2], [1.0, -1.0], SOB)
    assert e.norm() == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_eval_expansion_values():
    zero = KernelExpansion.build([0.0, 1.0], [0.0, 0.0], SOB)
    assert zero(0.37) == 0.0
    single = KernelExpansion.build([0.7], [1.0], SOB)
    assert single(0.7) == 0.5
    e = KernelExpansion.build([0.0, 1.0], [2.0, -1.0], SOB)
    assert e(0.0) == pytest.approx(1.0 - 0.5 * math.exp(-1), abs=1e-12)
    assert e(0.0) == pytest.approx(0.816060, abs=1e-6)


def test_eval_expansion_broadcasts():
    e = KernelExpansion.build([0.0, 1.0], [2.0, -1.0], SOB)
    xs = np.array([0.0, 1.0])
    vals = e(xs)
    assert vals.shape == (2,)
    assert vals[0] == pytest.approx(e(0.0), abs=1e-15)
    assert vals[1] == pytest.approx(e(1.0), abs=1e-15)


def test_build_length_mismatch():
    with pytest.raises(KernelError):
        KernelExpansion.build([0.0, 1.0], [1.0], SOB)


def test_reproducing_consistency():
    # f(x) equals the Gram bilinear form of f against the evaluator at x
    rng = np.random.default_rng(7)
    for _ in range(25):
        m = int(rng.integers(1, 6))
        centers = rng.uniform(-2, 2, m)
        weights = rng.normal(size=m)
        f = KernelExpansion.build(centers, weights, SOB)
        x = float(rng.uniform(-2, 2))
        g = SOB.gram(list(centers) + [x])
        inner = float(weights @ g[:m, m])
        assert f(x) == pytest.approx(inner, abs=1e-10)


def test_cauchy_schwarz():
    rng = np.random.default_rng(8)
    for _ in range(25):
        m = int(rng.integers(1, 6))
        f = KernelExpansion.build(rng.uniform(-2, 2, m),
                                  rng.normal(size=m), SOB)
        x = float(rng.uniform(-3, 3))
        assert abs(f(x)) <= f.norm() * math.sqrt(float(SOB.diag(x))) + 1e-10


def test_non_psd_custom_kernel_detected():
    bad = Kernel.custom(lambda a, b: -1.0 if a != b else 0.0)
    e = KernelExpansion.build([0.0, 1.0], [1.0, 1.0], bad)
    with pytest.raises(KernelError):
        e.norm()


# -- serialization --------------------------------------------------------

def test_from_json():
    assert Kernel.from_json({"kind": "sobolev"}).kind.value == "sobolev"
    k = Kernel.from_json({"kind": "gaussian", "width": 0.5})
    assert k.width == 0.5
    k = Kernel.from_json({"kind": "linear", "offset": 1.0, "range": 2.0})
    assert (k.offset, k.data_range) == (1.0, 2.0)
    with pytest.raises(KernelError):
        Kernel.from_json({"kind": "polynomial"})
    e = KernelExpansion.from_json(
        {"centers": [0.0, 1.0], "weights": [1.0, -1.0]}, SOB)
    assert e.centers == (0.0, 1.0)
