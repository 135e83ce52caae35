"""Instance generators: determinism, kinds, certificates, validation."""

import numpy as np
import pytest

from blockydecomp.core import is_blocky
from blockydecomp.factorize import verify_factorization
from blockydecomp.generators import (
    KINDS,
    GeneratorSpec,
    generate,
    random_blocky_matrix,
)


def test_identity_and_all_ones():
    inst = generate(GeneratorSpec(kind="identity", n=3))
    assert np.array_equal(inst.matrix.values, np.eye(3, dtype=int))
    inst = generate(GeneratorSpec(kind="all-ones", n=3, m=2))
    assert np.array_equal(inst.matrix.values, np.ones((2, 3), dtype=int))


def test_convolution_kind_blocky_support():
    # Indicator of {0, 2} in Z_4 yields the parity-class circulant: its
    # support is the union of two disjoint rectangles, hence blocky.
    inst = generate(GeneratorSpec(kind="convolution-cyclic", n=4, support=(0, 2)))
    arr = inst.matrix.values
    assert arr.shape == (4, 4)
    expected = np.array([[((x - y) % 4) in (0, 2) for y in range(4)] for x in range(4)])
    assert np.array_equal(arr, expected.astype(int))
    assert is_blocky(arr)


def test_random_boolean_density_and_determinism():
    spec = GeneratorSpec(kind="random-boolean", n=40, m=30, density=0.3)
    a = generate(spec, seed=5).matrix.values
    b = generate(spec, seed=5).matrix.values
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {0, 1}
    assert 0.15 < a.mean() < 0.45
    c = generate(spec, seed=6).matrix.values
    assert not np.array_equal(a, c)
    assert generate(GeneratorSpec(kind="random-boolean", n=5, density=0.0), seed=1).matrix.values.sum() == 0
    assert generate(GeneratorSpec(kind="random-boolean", n=5, density=1.0), seed=1).matrix.values.min() == 1


def test_random_blocky_matrix_is_blocky():
    rng = np.random.default_rng(60)
    for _ in range(30):
        m, n = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        b = random_blocky_matrix(m, n, rng)
        dense = b.to_dense()
        assert dense.any()
        assert is_blocky(dense)


def test_random_blocky_sum_carries_exact_certificate():
    spec = GeneratorSpec(kind="random-blocky-sum", n=12, m=9, term_count=4)
    inst = generate(spec, seed=11)
    assert inst.blocky_sum is not None and inst.certificate is not None
    assert len(inst.blocky_sum.terms) == 4
    assert np.array_equal(inst.blocky_sum.evaluate(), inst.matrix.values)
    rep = verify_factorization(inst.matrix.values.astype(float), inst.certificate, tol=1e-9)
    assert rep.ok
    again = generate(spec, seed=11)
    assert np.array_equal(again.matrix.values, inst.matrix.values)


def test_zero_term_sum():
    inst = generate(GeneratorSpec(kind="random-blocky-sum", n=3, term_count=0), seed=1)
    assert not inst.matrix.values.any()
    assert inst.certificate.gamma == 0.0


def test_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec(kind="nope", n=3)
    with pytest.raises(ValueError):
        GeneratorSpec(kind="identity", n=0)
    with pytest.raises(ValueError):
        GeneratorSpec(kind="random-boolean", n=3, density=1.5)
    with pytest.raises(ValueError):
        GeneratorSpec(kind="random-blocky-sum", n=3, term_count=-1)
    with pytest.raises(ValueError):
        GeneratorSpec(kind="convolution-cyclic", n=4, support=(0, 4))
    assert "identity" in KINDS and len(KINDS) == 5
