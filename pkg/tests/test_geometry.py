import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from protogeom.errors import DegenerateError, DiagonalError, DimensionError, DomainError, NotPSDError, RankError
from protogeom.geometry import (
    GeometrySpec,
    PrototypeSet,
    convergence_delta,
    etf_gram,
    gram,
    make_etf,
    make_from_gram,
    make_majority_collapse,
    make_minority_angle,
)

from conftest import random_unit


def off_diagonal(g):
    return g[~np.eye(len(g), dtype=bool)]


class TestETF:
    def test_k10_angle(self):
        g = make_etf(10, 10).gram
        np.testing.assert_allclose(np.diag(g), 1.0, atol=1e-10)
        np.testing.assert_allclose(off_diagonal(g), -1.0 / 9.0, atol=1e-10)

    def test_antipodal_pair(self):
        w = make_etf(2, 1).vectors
        np.testing.assert_allclose(w[:, 0], -w[:, 1], atol=1e-12)
        assert gram(w)[0, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_eigenvalues(self):
        evals = np.linalg.eigvalsh(make_etf(4, 8).gram)
        np.testing.assert_allclose(evals, [0.0, 4 / 3, 4 / 3, 4 / 3], atol=1e-10)

    def test_three_vectors(self):
        np.testing.assert_allclose(off_diagonal(make_etf(3, 5).gram), -0.5, atol=1e-10)

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            make_etf(5, 3)

    def test_seed_controls_orientation_only(self):
        a, b = make_etf(5, 7, seed=0), make_etf(5, 7, seed=1)
        assert not np.allclose(a.vectors, b.vectors)
        np.testing.assert_allclose(a.gram, b.gram, atol=1e-12)
        np.testing.assert_array_equal(a.vectors, make_etf(5, 7, seed=0).vectors)

    @given(st.integers(2, 12), st.integers(0, 4), st.integers(0, 2**16))
    @settings(max_examples=40, deadline=None)
    def test_trace_and_row_sums(self, k, extra, seed):
        p = make_etf(k, k - 1 + extra, seed=seed)
        g = p.gram
        assert np.trace(g) == pytest.approx(k, abs=1e-10)
        np.testing.assert_allclose(g.sum(axis=1), 0.0, atol=1e-10)
        np.testing.assert_allclose(np.linalg.norm(p.vectors, axis=0), 1.0, atol=1e-12)


class TestFromGram:
    def test_identity(self):
        w = make_from_gram(np.eye(3), 3).vectors
        np.testing.assert_allclose(w.T @ w, np.eye(3), atol=1e-12)

    def test_etf_round_trip(self):
        g = etf_gram(4)
        np.testing.assert_allclose(make_from_gram(g, 8).gram, g, atol=1e-8)

    def test_pattern_matrix(self):
        g = np.full((3, 3), 0.9)
        np.fill_diagonal(g, 1.0)
        # a*ones + (1-a)*I has eigenvalues 1 + 2a (once) and 1 - a (twice)
        np.testing.assert_allclose(np.linalg.eigvalsh(g), [0.1, 0.1, 2.8], atol=1e-12)
        np.testing.assert_allclose(make_from_gram(g, 3).gram, g, atol=1e-8)

    def test_not_psd(self):
        g = np.array([[1.0, -0.9, -0.9], [-0.9, 1.0, -0.9], [-0.9, -0.9, 1.0]])
        with pytest.raises(NotPSDError, match="eigenvalue"):
            make_from_gram(g, 3)

    def test_rank(self):
        with pytest.raises(RankError):
            make_from_gram(np.eye(4), 3)

    def test_diagonal(self):
        with pytest.raises(DiagonalError):
            make_from_gram(np.diag([1.0, 2.0]), 2)

    @given(st.integers(2, 6), st.integers(1, 6), st.integers(0, 2**16))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_random(self, k, rank, seed):
        rng = np.random.default_rng(seed)
        v = random_unit(rank, k, rng)
        g = gram(v)
        d = rank + 2
        np.testing.assert_allclose(make_from_gram(g, d, seed=seed).gram, g, atol=1e-8)


class TestMinorityAngle:
    def test_read_back(self):
        # the pattern must be PSD for construction to succeed; cos_rest = -0.1 is
        # realizable (the two-level pattern stays PSD down to about -0.146)
        g = make_minority_angle(4, {2, 3}, -0.9, -0.1, 8).gram
        assert g[2, 3] == pytest.approx(-0.9, abs=1e-8)
        assert g[0, 1] == pytest.approx(-0.1, abs=1e-8)
        assert g[0, 2] == pytest.approx(-0.1, abs=1e-8)

    def test_documented_pattern_is_not_realizable(self):
        # minority pair at -0.9 with every other pair at -1/3: the all-ones
        # vector gives 1^T G 1 = 4 - 1.8 - 10/3 < 0
        g = np.full((4, 4), -1 / 3)
        g[2, 3] = g[3, 2] = -0.9
        np.fill_diagonal(g, 1.0)
        assert np.ones(4) @ g @ np.ones(4) < 0
        with pytest.raises(NotPSDError):
            make_minority_angle(4, {2, 3}, -0.9, -1 / 3, 8)

    def test_empty_minority_is_etf(self):
        g = make_minority_angle(4, set(), 0.123, -1 / 3, 8).gram
        np.testing.assert_allclose(g, etf_gram(4), atol=1e-8)

    def test_unrealizable(self):
        g = np.array([[1.0, 0.5, 0.5], [0.5, 1.0, -0.99], [0.5, -0.99, 1.0]])
        assert np.linalg.eigvalsh(g)[0] < -1e-8
        with pytest.raises(NotPSDError):
            make_minority_angle(3, {1, 2}, -0.99, 0.5, 4)

    def test_requires_larger_minority_angle(self):
        with pytest.raises(DomainError):
            make_minority_angle(4, {2, 3}, 0.0, -0.1, 8)


class TestMajorityCollapse:
    def test_k10(self):
        g = make_majority_collapse(10, range(5), 10).gram
        assert g[0, 1] == pytest.approx(1.0, abs=1e-10)
        assert g[0, 5] == pytest.approx(-0.2, abs=1e-10)
        assert g[5, 6] == pytest.approx(-0.2, abs=1e-10)
        np.testing.assert_allclose(g[:5, :5], 1.0, atol=1e-10)

    def test_full_collapse(self):
        p = make_majority_collapse(2, {0, 1}, 1)
        np.testing.assert_allclose(p.gram, np.ones((2, 2)), atol=1e-12)

    def test_rank_two(self):
        g = make_majority_collapse(4, {0, 1}, 2).gram
        assert np.linalg.matrix_rank(g, tol=1e-8) == 2
        assert g[2, 3] == pytest.approx(-0.5, abs=1e-10)

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            make_majority_collapse(6, {0, 1}, 3)

    def test_needs_two(self):
        with pytest.raises(DomainError):
            make_majority_collapse(4, {0}, 4)


class TestGramAndDelta:
    def test_gram_cases(self):
        v = np.array([[1.0], [0.0]])
        np.testing.assert_array_equal(gram(np.hstack([v, v])), np.ones((2, 2)))
        np.testing.assert_allclose(gram(np.eye(3)), np.eye(3))

    def test_delta_identity_vs_etf2(self):
        # hand evaluation: diag(1/sqrt 2) - [[.5,-.5],[-.5,.5]]
        expected = np.sqrt(2 * (1 / np.sqrt(2) - 0.5) ** 2 + 2 * 0.25)
        assert expected == pytest.approx(0.76537, abs=1e-5)
        assert convergence_delta(np.eye(2), [[1, -1], [-1, 1]]) == pytest.approx(expected, abs=1e-12)

    def test_delta_zero_and_scale(self):
        g = etf_gram(5)
        assert convergence_delta(g, g) == 0.0
        assert convergence_delta(2 * g, g) == pytest.approx(0.0, abs=1e-15)

    def test_degenerate(self):
        with pytest.raises(DegenerateError):
            convergence_delta(np.zeros((3, 3)), np.eye(3))

    @given(st.integers(0, 2**16), st.floats(0.01, 100))
    @settings(max_examples=50, deadline=None)
    def test_metric_properties(self, seed, c):
        rng = np.random.default_rng(seed)
        a, b, e = (gram(random_unit(3, 4, rng)) for _ in range(3))
        dab = convergence_delta(a, b)
        assert 0 <= dab <= 2
        assert dab == pytest.approx(convergence_delta(b, a), abs=1e-12)
        assert convergence_delta(c * a, b) == pytest.approx(dab, abs=1e-12)
        assert dab <= convergence_delta(a, e) + convergence_delta(e, b) + 1e-12


class TestTypes:
    def test_prototype_norm_invariant(self):
        with pytest.raises(DomainError):
            PrototypeSet(np.array([[1.0, 2.0], [0.0, 0.0]]))

    def test_prototype_needs_two(self):
        with pytest.raises(DimensionError):
            PrototypeSet(np.ones((1, 1)))

    def test_gram_psd_symmetric(self):
        g = make_minority_angle(5, {3, 4}, -0.6, -0.1, 6).gram
        np.testing.assert_array_equal(g, g.T)
        assert np.linalg.eigvalsh(g)[0] >= -1e-10

    @pytest.mark.parametrize(
        "spec",
        [
            GeometrySpec("etf"),
            GeometrySpec("minority_angle", minority=(2, 3), cos_min_min=-0.9, cos_rest=-0.1),
            GeometrySpec("majority_collapse", majority=(0, 1)),
            GeometrySpec("gram_target", target=np.eye(4)),
        ],
    )
    def test_spec_build_unit_norm(self, spec):
        p = spec.build(4, 8, seed=3)
        np.testing.assert_allclose(np.linalg.norm(p.vectors, axis=0), 1.0, atol=1e-12)

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            GeometrySpec("hexagon")
        with pytest.raises(DomainError):
            GeometrySpec("gram_target")
        with pytest.raises(DomainError):
            GeometrySpec("majority_collapse", majority=(1,))
        with pytest.raises(DomainError):
            GeometrySpec("minority_angle", cos_min_min=-1.5)
