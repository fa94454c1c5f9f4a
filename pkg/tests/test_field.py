import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fssa.errors import InvalidArgument
from fssa.field import (
    FieldParams,
    build_recon_matrix,
    fe_inv,
    find_field_modulus,
    poly_eval,
)

F11 = FieldParams(11)


def gaussian_solve(matrix, rhs, q):
    """Independent oracle: solve a linear system over GF(q) by elimination."""
    n = len(matrix)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if a[r][col] % q != 0)
        a[col], a[pivot] = a[pivot], a[col]
        inv = pow(a[col][col], -1, q)
        a[col] = [(x * inv) % q for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] % q != 0:
                f = a[r][col]
                a[r] = [(x - f * y) % q for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def interpolate_coeffs(points, values, q):
    """Solve the Vandermonde system for the polynomial coefficients."""
    vm = [[pow(p, j, q) for j in range(len(points))] for p in points]
    return gaussian_solve(vm, values, q)


class TestFieldParams:
    def test_byte_width(self):
        assert FieldParams(11).byte_width == 1
        assert FieldParams(257).byte_width == 2
        assert FieldParams(33554467).byte_width == 4  # ~2^25

    def test_rejects_composite(self):
        with pytest.raises(InvalidArgument):
            FieldParams(2**25)  # not prime

    def test_rejects_tiny(self):
        with pytest.raises(InvalidArgument):
            FieldParams(1)

    def test_element_roundtrip(self):
        fp = FieldParams(257)
        for v in [0, 1, 255, 256]:
            assert fp.decode_elem(fp.encode_elem(v)) == v

    def test_element_encoding_is_little_endian(self):
        fp = FieldParams(257)
        assert fp.encode_elem(256) == b"\x00\x01"


class TestInverse:
    def test_identity(self):
        assert fe_inv(1, F11) == 1

    def test_two(self):
        assert fe_inv(2, F11) == 6  # 2*6 = 12 = 1 mod 11

    def test_zero_rejected(self):
        with pytest.raises(InvalidArgument):
            fe_inv(0, F11)

    @pytest.mark.parametrize("q", [2, 3, 5, 7, 11, 13, 97, 101])
    def test_exhaustive_small_fields(self, q):
        fp = FieldParams(q)
        for a in range(1, q):
            assert fe_inv(a, fp) * a % q == 1


class TestPolyEval:
    def test_constant_term(self):
        assert poly_eval([5, 7, 1], 0, F11) == 5

    def test_hand_value(self):
        assert poly_eval([5, 7, 1], 2, F11) == 1  # 5 + 14 + 4 = 23 = 1 mod 11

    def test_zero_poly(self):
        assert poly_eval([0, 0, 0], 9, F11) == 0

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgument):
            poly_eval([], 3, F11)

    def test_against_power_sum(self):
        rng = random.Random(2024)
        fp = FieldParams(101)
        for _ in range(1000):
            deg = rng.randrange(1, 8)
            coeffs = [rng.randrange(101) for _ in range(deg)]
            x = rng.randrange(101)
            naive = sum(c * pow(x, i, 101) for i, c in enumerate(coeffs)) % 101
            assert poly_eval(coeffs, x, fp) == naive


class TestReconMatrix:
    def test_lagrange_at_zero_pair(self):
        m = build_recon_matrix([1, 2], 1, F11)
        assert m.rows == ((2, 10),)

    def test_two_coefficients(self):
        # f(x) = 5 + 7x + x^2, evaluated at 1, 2, 3.
        shares = [poly_eval([5, 7, 1], x, F11) for x in (1, 2, 3)]
        assert shares == [2, 1, 2]
        m = build_recon_matrix([1, 2, 3], 2, F11)
        assert m.apply(shares) == [5, 7]
        assert m.apply(shares) == interpolate_coeffs([1, 2, 3], shares, 11)[:2]

    def test_zero_polynomial(self):
        m = build_recon_matrix([2, 5, 7], 3, F11)
        assert m.apply([0, 0, 0]) == [0, 0, 0]

    def test_duplicate_points_rejected(self):
        with pytest.raises(InvalidArgument):
            build_recon_matrix([1, 1], 1, F11)

    def test_zero_point_rejected(self):
        with pytest.raises(InvalidArgument):
            build_recon_matrix([0, 1], 1, F11)

    def test_d_exceeds_t_rejected(self):
        with pytest.raises(InvalidArgument):
            build_recon_matrix([1, 2], 3, F11)

    @pytest.mark.parametrize("q", [11, 13, 101])
    def test_matches_gaussian_oracle(self, q):
        rng = random.Random(q)
        fp = FieldParams(q)
        for t in range(1, 7):
            for d in range(1, t + 1):
                points = rng.sample(range(1, q), t)
                coeffs = [rng.randrange(q) for _ in range(t)]
                shares = [poly_eval(coeffs, p, fp) for p in points]
                m = build_recon_matrix(points, d, fp)
                assert m.apply(shares) == interpolate_coeffs(points, shares, q)[:d]
                assert m.apply(shares) == coeffs[:d]


class TestFindFieldModulus:
    def test_minimal(self):
        assert find_field_modulus(1, 2).q == 2

    def test_paper_scale(self):
        fp = find_field_modulus(500, 2**16)
        R = 500 * (2**16 - 1) + 1
        assert fp.q >= R == 32767501
        # smallest prime >= R: nothing prime in between
        import sympy

        assert sympy.isprime(fp.q)
        assert sympy.nextprime(R - 1) == fp.q

    def test_hundred_clients(self):
        fp = find_field_modulus(100, 2**16)
        assert fp.q >= 100 * 65535 + 1

    def test_overflow_rejected(self):
        with pytest.raises(InvalidArgument):
            find_field_modulus(2**40, 2**40)


@settings(max_examples=200, deadline=None)
@given(
    q=st.sampled_from([11, 13, 17, 101]),
    data=st.data(),
)
def test_recon_matrix_property(q, data):
    fp = FieldParams(q)
    t = data.draw(st.integers(1, 6))
    d = data.draw(st.integers(1, t))
    points = data.draw(
        st.lists(st.integers(1, q - 1), min_size=t, max_size=t, unique=True)
    )
    coeffs = data.draw(st.lists(st.integers(0, q - 1), min_size=t, max_size=t))
    shares = [poly_eval(coeffs, p, fp) for p in points]
    assert build_recon_matrix(points, d, fp).apply(shares) == coeffs[:d]
