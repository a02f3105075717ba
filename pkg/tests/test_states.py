import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

import oracle
from qcorr.linalg import I2, hermitian_eigenvalues, partial_trace_A, partial_trace_B
from qcorr.states import (
    BellDiagonalParams,
    TwoQubitState,
    UnphysicalStateError,
    WernerParams,
    bell_diagonal,
    bell_diagonal_matrix,
    from_descriptor,
    random_density_matrix,
    to_descriptor,
    validate,
    werner,
)


class TestBellDiagonal:
    def test_origin_is_maximally_mixed(self):
        assert_allclose(bell_diagonal(0, 0, 0).matrix, np.eye(4) / 4)

    def test_pure_bell_state(self):
        rho = bell_diagonal(1, -1, 1).matrix
        assert_allclose(rho, np.outer(oracle.PHI_PLUS, oracle.PHI_PLUS), atol=1e-15)
        assert_allclose(hermitian_eigenvalues(rho), [1, 0, 0, 0], atol=1e-12)

    def test_example_spectrum(self):
        assert_allclose(
            hermitian_eigenvalues(bell_diagonal(0.3, -0.4, 0.56).matrix), [0.565, 0.215, 0.135, 0.085], atol=1e-12
        )
        assert_allclose(BellDiagonalParams(0.3, -0.4, 0.56).eigenvalues(), [0.135, 0.215, 0.565, 0.085], atol=1e-15)

    def test_matrix_pattern(self):
        c1, c2, c3 = 0.3, -0.4, 0.56
        m = bell_diagonal(c1, c2, c3).matrix
        assert_allclose(np.diag(m).real, [(1 + c3) / 4, (1 - c3) / 4, (1 - c3) / 4, (1 + c3) / 4])
        assert m[0, 3] == pytest.approx((c1 - c2) / 4)
        assert m[1, 2] == pytest.approx((c1 + c2) / 4)

    def test_matches_bell_vector_construction(self, rng):
        for _ in range(20):
            c = rng.uniform(-1 / 3, 1 / 3, size=3)
            assert_allclose(bell_diagonal(*c).matrix, oracle.bell_state(*c), atol=1e-15)

    def test_rejects_unphysical_naming_eigenvalue(self):
        with pytest.raises(UnphysicalStateError, match="lambda5 = -0.425"):
            bell_diagonal(0.9, 0.9, 0.9)

    def test_tetrahedron_membership(self, rng):
        pts = rng.uniform(-1, 1, size=(1000, 3))
        for c in pts:
            inside = hermitian_eigenvalues(bell_diagonal_matrix(c))[-1] >= -1e-12
            assert BellDiagonalParams(*c).is_physical() == inside

    def test_reduced_states(self, rng):
        for _ in range(20):
            c = rng.uniform(-1 / 3, 1 / 3, size=3)
            rho = bell_diagonal(*c).matrix
            assert_allclose(partial_trace_A(rho), I2 / 2, atol=1e-15)
            assert_allclose(partial_trace_B(rho), I2 / 2, atol=1e-15)


class TestWerner:
    @pytest.mark.parametrize("z", [-1 / 3, -0.1, 0.0, 0.25, 0.5, 1.0])
    def test_equals_bell_diagonal_exactly(self, z):
        assert np.array_equal(werner(z).matrix, bell_diagonal(-z, -z, -z).matrix)

    @pytest.mark.parametrize("z", [0.0, 0.3, 1.0])
    def test_definition(self, z):
        assert_allclose(werner(z).matrix, oracle.werner_state(z), atol=1e-15)

    def test_spectrum(self):
        assert_allclose(hermitian_eigenvalues(werner(0.5).matrix), [0.625, 0.125, 0.125, 0.125], atol=1e-12)
        assert_allclose(WernerParams(0.5).eigenvalues(), [0.625, 0.125, 0.125, 0.125])

    @pytest.mark.parametrize("z", [-0.34, 1.01, float("nan")])
    def test_out_of_range(self, z):
        with pytest.raises(UnphysicalStateError):
            werner(z)


class TestValidate:
    def test_maximally_mixed_passes(self):
        d = validate(np.eye(4) / 4)
        assert d.passed and d.trace_deviation == 0

    def test_bad_trace(self):
        d = validate(1.1 * np.eye(4) / 4)
        assert not d.passed
        assert d.trace_deviation == pytest.approx(0.1)

    def test_negative_eigenvalue(self):
        d = validate(bell_diagonal_matrix([0.9, 0.9, 0.9]))
        assert not d.passed
        assert d.min_eigenvalue == pytest.approx(-0.425)

    def test_non_hermitian(self):
        m = np.eye(4, dtype=complex) / 4
        m[0, 1] = 0.01
        assert not validate(m).passed

    def test_random_states_pass(self, rng):
        for _ in range(10):
            assert validate(random_density_matrix(rng)).passed


class TestDescriptors:
    @pytest.mark.parametrize(
        "desc",
        [
            {"family": "bell_diagonal", "c": [0.3, -0.4, 0.56]},
            {"family": "werner", "z": 0.5},
        ],
    )
    def test_round_trip(self, desc):
        st = from_descriptor(json.loads(json.dumps(desc)))
        assert to_descriptor(st) == desc

    def test_raw_round_trip(self, rng):
        st = random_density_matrix(rng)
        back = from_descriptor(json.loads(json.dumps(to_descriptor(st))))
        assert np.array_equal(back.matrix, st.matrix)

    def test_raw_rejects_invalid(self):
        entries = [[1.0 if i in (0, 5, 10, 15) else 0.0, 0.0] for i in range(16)]
        with pytest.raises(UnphysicalStateError):
            from_descriptor({"family": "raw", "matrix": entries})

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            from_descriptor({"family": "ghz"})

    def test_state_matrix_is_read_only(self):
        st = TwoQubitState(np.eye(4) / 4)
        with pytest.raises(ValueError):
            st.matrix[0, 0] = 1
