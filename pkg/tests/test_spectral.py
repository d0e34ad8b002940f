import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from aus.groups import enumerate_irreps, haar_grid, irrep_matrix, label, parse_group, trivial_label
from aus.spectral import (
    GridFunction,
    SpectralCoeffs,
    analyze,
    entrywise_l1_sum,
    fourier_coeff,
    kunze_sup_bound,
    random_coeffs,
    synthesize,
    synthesize_grid,
    trace_norm,
    zero_on_set,
)

CIRCLE, TORUS2, SU2 = parse_group("circle"), parse_group("torus:2"), parse_group("su2")
CASES = [(CIRCLE, 6), (TORUS2, 3), (parse_group("torus:3"), 2), (SU2, 3.0)]


def test_fourier_coeff_of_constant():
    for g, B in CASES:
        grid = haar_grid(g, B)
        f = GridFunction(grid, np.ones(grid.size))
        assert np.allclose(fourier_coeff(f, trivial_label(g)), [[1.0]])
        for lab in enumerate_irreps(g, B)[1:]:
            assert np.abs(fourier_coeff(f, lab)).max() < 1e-12


def test_square_wave_coefficient():
    n = 1 << 16
    grid = haar_grid(CIRCLE, 0, counts=(n,))
    t = grid.points[:, 0] / (2 * np.pi)
    wave = np.where(t < 0.5, 1.0, -1.0)
    wave[[0, n // 2]] = 0.0  # jump nodes take the mean value
    c = fourier_coeff(GridFunction(grid, wave), label(CIRCLE, 1))[0, 0]
    assert abs(c - (-2j / np.pi)) < 1e-8


def test_analyze_matrix_coefficient_lands_at_dual_position():
    grid = haar_grid(SU2, 2)
    lab = label(SU2, 3)
    D = irrep_matrix(SU2, lab, grid.points)
    for i in range(4):
        for j in range(4):
            A = analyze(GridFunction(grid, lab.degree * D[:, i, j]), 2)
            expected = np.zeros((4, 4))
            expected[j, i] = 1.0
            assert np.abs(A[lab] - expected).max() < 1e-12
            assert A.support() == [lab]


def test_analyze_zero_has_empty_support():
    grid = haar_grid(SU2, 2)
    assert analyze(GridFunction(grid, np.zeros(grid.size)), 2).support() == []


@pytest.mark.parametrize("group,B", CASES, ids=lambda v: str(v))
def test_round_trip_and_parseval(group, B):
    rng = np.random.default_rng(0)
    for _ in range(5):
        A = random_coeffs(group, B, rng)
        grid = haar_grid(group, B)
        vals = synthesize_grid(A, grid)
        assert np.allclose(vals, synthesize(A, grid.points), atol=1e-11)
        back = analyze(GridFunction(grid, vals), B)
        assert max(np.abs(back[lab] - A[lab]).max() for lab in A.labels()) < 1e-9
        l2 = grid.integrate(np.abs(vals) ** 2).real
        assert abs(l2 - A.hs_norm_sq()) < 1e-9 * A.hs_norm_sq()


def test_synthesize_constant_and_single_point():
    A = SpectralCoeffs(SU2, {trivial_label(SU2): [[2.5 - 1j]]})
    pts = SU2.random_points(7, np.random.default_rng(1))
    assert np.allclose(synthesize(A, pts), 2.5 - 1j)
    assert isinstance(synthesize(A, pts[0]), complex)


def test_fejer_smoothed_square_wave_converges():
    n = 1 << 14
    fine = haar_grid(CIRCLE, 0, counts=(n,))
    t = fine.points[:, 0] / (2 * np.pi)
    wave = np.where(t < 0.5, 1.0, -1.0)
    wave[[0, n // 2]] = 0.0
    full = analyze(GridFunction(fine, wave), 512)
    errs = []
    for B in (8, 32, 128):
        # Fejer means of the square wave converge uniformly away from the jumps
        A = SpectralCoeffs(CIRCLE, {lab: (1 - abs(lab.index[0]) / (B + 1)) * full[lab]
                                    for lab in enumerate_irreps(CIRCLE, B)})
        away = (np.abs(t - 0.25) < 0.2) | (np.abs(t - 0.75) < 0.2)
        errs.append(np.abs(synthesize_grid(A, fine) - wave)[away].max())
    assert errs[0] > errs[1] > errs[2]


def test_zero_on_set_examples():
    rng = np.random.default_rng(2)
    A = random_coeffs(SU2, 2.0, rng)
    assert zero_on_set(A, []).labels() == A.labels()
    assert zero_on_set(A, A.labels()).support() == []
    lam = A.labels()[::2]
    pts = SU2.random_points(100, rng)
    lhs = synthesize(zero_on_set(A, lam), pts)
    rhs = synthesize(A, pts) - synthesize(A.restricted(lam), pts)
    assert np.abs(lhs - rhs).max() < 1e-12
    assert not set(zero_on_set(A, lam).support()) & set(lam)


def test_support_threshold():
    A = SpectralCoeffs(CIRCLE, {label(CIRCLE, 0): [[1.0]], label(CIRCLE, 1): [[1e-13]],
                                label(CIRCLE, 2): [[1e-11]]})
    assert A.support() == [label(CIRCLE, 0), label(CIRCLE, 2)]
    assert A.normalized().labels() == A.support()
    big = A.scaled(1e4)
    assert big.tau_supp == pytest.approx(1e-8)


def test_json_round_trip():
    rng = np.random.default_rng(3)
    for g, B in CASES:
        A = random_coeffs(g, min(B, 2), rng)
        obj = json.loads(json.dumps(A.to_json()))
        back = SpectralCoeffs.from_json(obj)
        assert back.labels() == A.labels()
        assert all(np.array_equal(back[lab], A[lab]) for lab in A.labels())
    obj = SpectralCoeffs(SU2, {label(SU2, 1): [[1, 2j], [3, 4]]}).to_json()
    assert obj["coeffs"]["j=1/2"] == [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]
    with pytest.raises(ValueError):
        SpectralCoeffs.from_json({"group": "su2", "coeffs": {"j=1": [[1, 0]]}})


def test_trace_norm_examples():
    assert trace_norm(np.eye(2)) == pytest.approx(2.0)
    assert trace_norm([[0, 1], [0, 0]]) == pytest.approx(1.0)
    assert trace_norm(np.zeros((0, 0))) == 0.0


@settings(max_examples=100, deadline=None)
@given(arrays(np.complex128, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)))
def test_trace_norm_below_entrywise_l1(M):
    assert trace_norm(M) <= np.abs(M).sum() * (1 + 1e-12) + 1e-12
    assert trace_norm(M) >= np.linalg.norm(M, 2) * (1 - 1e-12) - 1e-12


def test_kunze_examples():
    c = 0.3 - 0.4j
    assert kunze_sup_bound(SpectralCoeffs(SU2, {trivial_label(SU2): [[c]]})) == pytest.approx(0.5)
    grid = haar_grid(SU2, 1)
    lab = label(SU2, 1)
    A = analyze(GridFunction(grid, irrep_matrix(SU2, lab, grid.points)[:, 0, 0]), 1)
    dense = haar_grid(SU2, 8)
    assert kunze_sup_bound(A) >= np.abs(synthesize_grid(A, dense)).max() - 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(range(len(CASES))))
def test_kunze_bound_property(seed, which):
    g, B = CASES[which]
    A = random_coeffs(g, min(B, 2), np.random.default_rng(seed))
    dense = haar_grid(g, 4 * min(B, 2))
    assert np.abs(synthesize_grid(A, dense)).max() <= kunze_sup_bound(A) + 1e-10


def test_entrywise_l1_sum():
    A = SpectralCoeffs(SU2, {label(SU2, 1): [[1, -1j], [0, 2]], label(SU2, 0): [[3]]})
    assert entrywise_l1_sum(A, [label(SU2, 1)]) == pytest.approx(2 * 4)
    assert entrywise_l1_sum(A, [label(SU2, 2)]) == 0.0


def test_grid_mismatch_rejected():
    grid = haar_grid(CIRCLE, 2)
    with pytest.raises(ValueError):
        GridFunction(grid, np.zeros(grid.size + 1))
