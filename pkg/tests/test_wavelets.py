import numpy as np
import pytest

from varlp import (
    ConfigurationError,
    DomainError,
    GridFunction,
    ResolutionError,
    WaveletCoefficients,
    analyze,
    build_daubechies,
    dilate_translate,
    gram_matrix,
    indicator,
    integrate,
    make_grid,
    pairing,
    square_functions,
    synthesize,
    translate_range,
)
from varlp.operators import m_loc


def l2(f):
    return float(np.sqrt(f.grid.h * np.sum(f.samples**2)))


def test_haar_filters_and_box(haar):
    assert np.allclose(haar.lowpass, [1 / np.sqrt(2)] * 2)
    # phi is the box on [0, 1)
    assert np.allclose(haar.phi_samples[:-1], 1.0)
    assert haar.phi_samples[-1] == pytest.approx(0.0)


def test_db3_filter_identities(db3):
    assert db3.lowpass.size == 6
    assert np.sum(db3.lowpass) == pytest.approx(np.sqrt(2), abs=1e-12)
    assert np.sum(db3.lowpass**2) == pytest.approx(1.0, abs=1e-12)


def test_db3_cascade_normalizations(db3):
    step = 2.0 ** (-db3.cascade_resolution)
    assert step * np.sum(db3.phi_samples) == pytest.approx(1.0, abs=1e-4)
    assert step * np.sum(db3.phi_samples**2) == pytest.approx(1.0, abs=1e-4)
    # quadrature orthogonality of integer translates on the cascade lattice
    shift = 1 << db3.cascade_resolution
    inner = step * np.sum(db3.phi_samples[shift:] * db3.phi_samples[:-shift])
    assert abs(inner) <= 1e-4


def test_build_daubechies_guards():
    with pytest.raises(ConfigurationError):
        build_daubechies(5, 12)
    with pytest.raises(ConfigurationError):
        build_daubechies(3, 4)


def test_dilate_translate_identity(db3):
    g = make_grid(8, 8)
    f = dilate_translate(db3, "phi", 0, 0, g)
    u = g.midpoints
    direct = db3.evaluate("phi", u)
    assert np.allclose(f.samples, direct)


def test_dilate_translate_l2_invariance(db3):
    # levels with at least 2**6 cells per unit support keep quadrature error
    # below the 1e-4 normalization tolerance
    g = make_grid(4, 10)
    for j, k in [(0, -2), (1, -4), (2, 1), (4, -30)]:
        atom = dilate_translate(db3, "psi", j, k, g)
        assert l2(atom) == pytest.approx(1.0, abs=1e-4)


def test_support_length(db3):
    g = make_grid(8, 9)
    for J in (0, 1):
        atom = dilate_translate(db3, "phi", J, 0, g)
        nz = np.nonzero(np.abs(atom.samples) > 0)[0]
        length = (nz[-1] - nz[0] + 1) * g.h
        assert length == pytest.approx(2.0 ** (-J) * (2 * db3.N - 1), abs=2 * g.h)


def test_dilate_translate_resolution_guard(db3):
    g = make_grid(2, 14)
    with pytest.raises(ResolutionError):
        dilate_translate(db3, "phi", 1, 0, g)  # r_c = 12 < 14 - 1


def test_analyze_reproduces_phi_atom(db3, grid_l4_r10):
    f = dilate_translate(db3, "phi", 0, -2, grid_l4_r10)
    c = analyze(f, db3, 0, 4)
    assert c.a[-2] == pytest.approx(1.0, abs=1e-4)
    assert max(abs(v) for k, v in c.a.items() if k != -2) <= 1e-3
    assert max(abs(v) for v in c.d.values()) <= 1e-3


def test_analyze_reproduces_psi_atom(db3, grid_l4_r10):
    f = dilate_translate(db3, "psi", 2, 1, grid_l4_r10)
    c = analyze(f, db3, 0, 4)
    assert c.d[(2, 1)] == pytest.approx(1.0, abs=1e-4)
    others = [abs(v) for jk, v in c.d.items() if jk != (2, 1)]
    assert max(others) <= 1e-3
    assert max(abs(v) for v in c.a.values()) <= 1e-3


def test_parseval_on_gaussian(db3, grid_l4_r10):
    f = GridFunction.from_callable(grid_l4_r10, lambda x: np.exp(-3 * (x - 0.3) ** 2))
    c = analyze(f, db3, 0, grid_l4_r10.resolution - 2)
    assert c.energy() == pytest.approx(l2(f) ** 2, rel=1e-3)


def test_synthesize_zero(db3, grid_l4_r10):
    c = WaveletCoefficients(J=0, j_max=3)
    assert np.all(synthesize(c, db3, grid_l4_r10).samples == 0)


def test_round_trip_atom(db3, grid_l4_r10):
    f = dilate_translate(db3, "phi", 0, -1, grid_l4_r10)
    rec = synthesize(analyze(f, db3, 0, 4), db3, grid_l4_r10)
    assert l2(GridFunction(grid_l4_r10, rec.samples - f.samples)) <= 1e-3


def test_round_trip_smooth_bump(db3, grid_l4_r10):
    f = GridFunction.from_callable(grid_l4_r10, lambda x: np.exp(-4 * x**2) * np.cos(2 * x))
    errs = {}
    for j_max in (4, 5):
        rec = synthesize(analyze(f, db3, 0, j_max), db3, grid_l4_r10)
        errs[j_max] = l2(GridFunction(grid_l4_r10, rec.samples - f.samples)) / l2(f)
    assert errs[4] <= 1e-3
    assert errs[5] <= errs[4]  # tail energy only shrinks


def test_analyze_synthesize_coefficient_identity(db3, grid_l4_r10):
    rng = np.random.default_rng(5)
    c = WaveletCoefficients(J=0, j_max=3)
    for k in range(-4, 0):  # atoms fully inside [-4, 4]
        c.a[k] = rng.normal()
    for j in range(0, 4):
        for k in list(translate_range(db3, j, grid_l4_r10))[5:8]:
            c.d[(j, k)] = rng.normal()
    f = synthesize(c, db3, grid_l4_r10)
    c2 = analyze(f, db3, 0, 3)
    for k, v in c.a.items():
        assert c2.a[k] == pytest.approx(v, abs=1e-3)
    for jk, v in c.d.items():
        assert c2.d[jk] == pytest.approx(v, abs=1e-3)


def test_margin_flag_and_error(db3, grid_l4_r10):
    # an off-centre bump at L=4 cannot honour the 2**-J*(2N-1) margin
    f = indicator(grid_l4_r10, 3.0, 3.5)
    c = analyze(f, db3, 0, 4)
    assert not c.margin_ok
    with pytest.raises(DomainError):
        analyze(f, db3, 0, 4, require_margin=True)
    # with J = 2 the margin is 1.25 and a central bump satisfies it
    g = GridFunction.from_callable(grid_l4_r10, lambda x: np.where(np.abs(x) < 1, (1 - x**2) ** 2, 0.0))
    c2 = analyze(g, db3, 2, 4, require_margin=True)
    assert c2.margin_ok


def test_square_functions_phi_atom(db3, grid_l4_r10):
    f = dilate_translate(db3, "phi", 0, -2, grid_l4_r10)
    sq = square_functions(analyze(f, db3, 0, 4), db3, grid_l4_r10)
    assert np.max(np.abs(sq.v.samples - np.abs(f.samples))) <= 2e-3
    assert l2(sq.w1) <= 2e-3
    assert l2(sq.w2) <= 2e-3


def test_square_functions_psi_atom(db3, grid_l4_r10):
    j0, k0 = 1, 2
    f = dilate_translate(db3, "psi", j0, k0, grid_l4_r10)
    sq = square_functions(analyze(f, db3, 0, 4), db3, grid_l4_r10)
    assert np.max(np.abs(sq.w1.samples - np.abs(f.samples))) <= 2e-3
    expected_w2 = np.where(
        (grid_l4_r10.midpoints > k0 * 2.0**-j0) & (grid_l4_r10.midpoints < (k0 + 1) * 2.0**-j0),
        2.0 ** (j0 / 2),
        0.0,
    )
    assert np.max(np.abs(sq.w2.samples - expected_w2)) <= 2e-3
    assert l2(sq.v) <= 2e-3


def test_square_function_l2_identity(db3, grid_l4_r10):
    f = GridFunction.from_callable(grid_l4_r10, lambda x: np.exp(-2 * (x + 0.4) ** 2))
    c = analyze(f, db3, 0, 5)
    sq = square_functions(c, db3, grid_l4_r10)
    d_energy = np.sqrt(sum(v * v for v in c.d.values()))
    assert l2(sq.w1) == pytest.approx(d_energy, abs=1e-3)
    assert l2(sq.w2) == pytest.approx(d_energy, abs=1e-3)


def test_w2_piecewise_constant_on_fine_cells(db3, grid_l4_r10):
    f = GridFunction.from_callable(grid_l4_r10, lambda x: np.exp(-2 * x**2))
    j_max = 4
    sq = square_functions(analyze(f, db3, 0, j_max), db3, grid_l4_r10)
    block = 1 << (grid_l4_r10.resolution - j_max)
    blocks = sq.w2.samples.reshape(-1, block)
    assert np.max(np.abs(blocks - blocks[:, :1])) == 0.0


def test_gram_identity_small(db3):
    g = make_grid(4, 10)
    G, labels = gram_matrix(db3, g, 0, 3)
    assert np.max(np.abs(G - np.eye(len(labels)))) <= 1e-3


def test_filter_bank_consistency(db3, grid_l4_r10):
    # two-scale identities: <f, phi_{0,k}> = sum_m h_m <f, phi_{1,2k+m}>
    #                       <f, psi_{0,k}> = sum_m g_m <f, phi_{1,2k+m}>
    f = GridFunction.from_callable(grid_l4_r10, lambda x: np.exp(-3 * (x - 0.2) ** 2))
    a1 = {
        k: pairing(f, dilate_translate(db3, "phi", 1, k, grid_l4_r10))
        for k in translate_range(db3, 1, grid_l4_r10)
    }
    for k in (-2, -1, 0):
        phi0 = pairing(f, dilate_translate(db3, "phi", 0, k, grid_l4_r10))
        psi0 = pairing(f, dilate_translate(db3, "psi", 0, k, grid_l4_r10))
        via_h = sum(h * a1.get(2 * k + m, 0.0) for m, h in enumerate(db3.lowpass))
        via_g = sum(gg * a1.get(2 * k + m, 0.0) for m, gg in enumerate(db3.highpass))
        assert phi0 == pytest.approx(via_h, abs=1e-6)
        assert psi0 == pytest.approx(via_g, abs=1e-6)


def test_coefficients_json_round_trip():
    c = WaveletCoefficients(J=0, j_max=2, a={-1: 0.5, 3: -1.25}, d={(0, 1): 0.75, (2, -4): 0.1})
    c2 = WaveletCoefficients.from_json(c.to_json())
    assert c2.J == c.J and c2.j_max == c.j_max and c2.a == c.a and c2.d == c.d


def test_v_dominated_by_iterated_maximal(db3):
    # V f <= C (M^loc)^(4N+10) f with a corpus-calibrated C (observed ~0.9)
    g = make_grid(4, 9)
    f = GridFunction.from_callable(g, lambda x: np.exp(-2 * (x - 0.5) ** 2))
    sq = square_functions(analyze(f, db3, 0, 4), db3, g)
    M = m_loc(f, 4 * db3.N + 10)
    mask = M.samples > 1e-10
    assert np.max(sq.v.samples[mask] / M.samples[mask]) <= 2.0


def test_chi_dominated_by_iterated_maximal_of_phi(db3):
    g = make_grid(4, 9)
    for j, k in [(0, 0), (2, 3)]:
        phi = dilate_translate(db3, "phi", j, k, g)
        M = m_loc(phi, 4 * db3.N + 10)
        lo, hi = k * 2.0**-j, (k + 1) * 2.0**-j
        chi = np.where((g.midpoints > lo) & (g.midpoints < hi), 2.0 ** (j / 2), 0.0)
        mask = chi > 0
        assert np.max(chi[mask] / M.samples[mask]) <= 2.0
