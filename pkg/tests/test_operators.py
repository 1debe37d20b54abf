import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varlp import (
    ConfigurationError,
    DyadicCube,
    GridFunction,
    SparseDecompositionError,
    indicator,
    integrate,
    make_grid,
)
from varlp.operators import (
    LocalCZKernel,
    apply_local_cz,
    decreasing_rearrangement,
    full_maximal,
    hilbert_cut_kernel,
    m_loc,
    make_kernel,
    mean_oscillation,
    median,
    rearrangement_value,
    sparse_decompose,
    sparse_family_exists,
    verify_kernel_conditions,
)


def brute_window_max(f, xi, max_window):
    grid = f.grid
    i = grid.index_of(xi)
    best = 0.0
    csum = np.concatenate(([0.0], np.cumsum(np.abs(f.samples))))
    for length in range(1, max_window + 1):
        for s in range(max(0, i - length + 1), min(i, grid.count - length) + 1):
            best = max(best, (csum[s + length] - csum[s]) / length)
    return best


# -- maximal operators -------------------------------------------------------


def test_mloc_constant():
    g = make_grid(2, 6)
    one = GridFunction(g, np.ones(g.count))
    for it in (1, 3):
        assert np.allclose(m_loc(one, it).samples, 1.0)


def test_mloc_indicator_window_oracle():
    g = make_grid(2, 7)
    f = indicator(g, 0.0, 1.0)
    M = m_loc(f)
    for xi in (1.5, 0.25, -0.6, 1.99):
        i = g.index_of(xi)
        assert M.samples[i] == pytest.approx(brute_window_max(f, xi, 1 << g.resolution), abs=1e-12)
    assert M.samples[g.index_of(1.5)] == pytest.approx(0.5, abs=2 * g.h)


def test_mloc_iteration_monotone():
    g = make_grid(2, 6)
    rng = np.random.default_rng(1)
    f = GridFunction(g, rng.normal(size=g.count))
    m1 = m_loc(f, 1)
    m2 = m_loc(f, 2)
    assert np.all(m2.samples >= m1.samples - 1e-14)
    assert np.all(m1.samples >= np.abs(f.samples) - 1e-14)


def test_mloc_sublinearity():
    g = make_grid(2, 6)
    rng = np.random.default_rng(2)
    f = GridFunction(g, rng.normal(size=g.count))
    h = GridFunction(g, rng.normal(size=g.count))
    lhs = m_loc(GridFunction(g, f.samples + h.samples)).samples
    rhs = m_loc(f).samples + m_loc(h).samples
    assert np.all(lhs <= rhs + 1e-12)


def test_mloc_locality():
    g = make_grid(4, 7)
    f = indicator(g, 2.5, 3.0)  # vanishes on [-4, 2.5]
    M = m_loc(f)
    inside = np.abs(g.midpoints - (-1.0)) < 0.5  # [-1.5,-0.5]: 1 away from support
    assert np.all(M.samples[inside] == 0.0)


def test_full_maximal_oracle_and_domination():
    g = make_grid(4, 7)
    f = indicator(g, 0.0, 1.0)
    Mf = full_maximal(f)
    i = g.index_of(3.0)
    assert Mf.samples[i] == pytest.approx(1.0 / 3.0, abs=3 * g.h)
    assert np.all(Mf.samples >= m_loc(f).samples - 1e-14)


# -- rearrangement, median, oscillation --------------------------------------


def test_rearrangement_indicator():
    g = make_grid(1, 6)
    E = g.cell_slice(0.0, 1.0)
    f = indicator(g, 0.0, 1.0)
    assert np.all(decreasing_rearrangement(f, E) == 1.0)


def test_rearrangement_linear_reflection():
    g = make_grid(1, 8)
    E = g.cell_slice(0.0, 1.0)
    f = GridFunction(g, np.where((g.midpoints > 0) & (g.midpoints < 1), g.midpoints, 0.0))
    r = decreasing_rearrangement(f, E)
    for t in (0.1, 0.5, 0.9):
        assert rearrangement_value(r, t, g.h) == pytest.approx(1 - t, abs=2 * g.h)


def test_rearrangement_preserves_integral():
    g = make_grid(1, 7)
    rng = np.random.default_rng(4)
    f = GridFunction(g, rng.normal(size=g.count))
    E = g.cell_slice(-0.5, 1.0)
    r = decreasing_rearrangement(f, E)
    assert g.h * np.sum(r) == pytest.approx(g.h * np.sum(np.abs(f.samples[E])), rel=1e-12)


def test_median_constant_and_halves():
    g = make_grid(1, 8)
    Q = DyadicCube(0, 0)
    assert median(GridFunction(g, np.full(g.count, 3.25)), Q) == 3.25
    assert median(indicator(g, 0.0, 0.5), Q) == 0.0  # lower convention
    f = GridFunction(g, np.where(g.midpoints > 0, g.midpoints, 0.0))
    assert median(f, Q) == pytest.approx(0.5, abs=2 * g.h)


@settings(max_examples=30, deadline=None)
@given(shift=st.floats(-5, 5), scale=st.floats(0.01, 10), seed=st.integers(0, 1000))
def test_median_covariance(shift, scale, seed):
    g = make_grid(1, 5)
    Q = DyadicCube(1, 0)
    f = GridFunction(g, np.random.default_rng(seed).normal(size=g.count))
    m = median(f, Q)
    assert median(GridFunction(g, f.samples + shift), Q) == pytest.approx(m + shift, rel=1e-12, abs=1e-12)
    assert median(GridFunction(g, scale * f.samples), Q) == pytest.approx(scale * m, rel=1e-12, abs=1e-12)


def test_oscillation_examples():
    g = make_grid(1, 8)
    Q = DyadicCube(0, 0)
    const = GridFunction(g, np.full(g.count, 2.0))
    for lam in (0.1, 0.5, 0.9):
        assert mean_oscillation(const, Q, lam) == 0.0
    f = indicator(g, 0.0, 0.5)
    assert mean_oscillation(f, Q, 0.125) == pytest.approx(0.5)
    assert mean_oscillation(f, Q, 0.75) == 0.0


def test_oscillation_lam_guard():
    g = make_grid(1, 6)
    with pytest.raises(ConfigurationError):
        mean_oscillation(indicator(g, 0, 1), DyadicCube(0, 0), 0.0)


# -- sparse decomposition -----------------------------------------------------


def corpus_function(grid, rng):
    x = grid.midpoints
    vals = sum(
        rng.normal(0, 1) * np.sin((k + 1) * np.pi * x + rng.uniform(0, 2 * np.pi)) * (k + 1) ** -2.0
        for k in range(8)
    )
    for _ in range(rng.integers(0, 3)):
        vals = vals + rng.uniform(0.2, 0.6) * rng.choice([-1.0, 1.0]) * (x > rng.uniform(0.05, 0.95))
    return GridFunction(grid, vals)


def test_sparse_constant():
    g = make_grid(1, 8)
    fam = sparse_decompose(GridFunction(g, np.full(g.count, 1.5)), DyadicCube(0, 0))
    assert len(fam.members) == 1
    assert fam.members[0].oscillation == 0.0
    assert all(fam.check_invariants(g).values())


def test_sparse_linear_ramp():
    g = make_grid(1, 9)
    Q = DyadicCube(0, 0)
    f = GridFunction.from_callable(g, lambda x: x)
    fam = sparse_decompose(f, Q)
    assert all(fam.check_invariants(g).values())
    assert fam.check_domination(f, median(f, Q)) <= 1e-9


def test_sparse_random_corpus():
    g = make_grid(1, 9)
    Q = DyadicCube(0, 0)
    rng = np.random.default_rng(10)
    built = 0
    for _ in range(25):
        f = corpus_function(g, rng)
        if not sparse_family_exists(f, Q):
            continue
        fam = sparse_decompose(f, Q)
        inv = fam.check_invariants(g)
        assert all(inv.values()), inv
        assert fam.check_domination(f, median(f, Q)) <= 1e-9
        built += 1
    assert built >= 20


def test_sparse_reports_infeasible():
    # three-level staircase whose far level sits beyond every chain budget
    g = make_grid(1, 8)
    Q = DyadicCube(0, 0)
    x = g.midpoints
    vals = np.where(x < 0.45, 0.0, np.where(x < 0.9, 10.0, 100.0))
    f = GridFunction(g, vals)
    assert not sparse_family_exists(f, Q)
    with pytest.raises(SparseDecompositionError):
        sparse_decompose(f, Q)


# -- Calderon-Zygmund kernels -------------------------------------------------


def test_odd_kernel_on_constant_interior():
    g = make_grid(4, 8)
    K = hilbert_cut_kernel(1)
    f = indicator(g, -3.5, 3.5)
    Tf = apply_local_cz(K, f)
    interior = np.abs(g.midpoints) < 2.0
    assert np.max(np.abs(Tf.samples[interior])) <= 1e-12


def test_apply_linearity():
    g = make_grid(2, 7)
    K = hilbert_cut_kernel(1)
    rng = np.random.default_rng(6)
    f = GridFunction(g, rng.normal(size=g.count))
    T2 = apply_local_cz(K, GridFunction(g, 2.0 * f.samples))
    T1 = apply_local_cz(K, f)
    assert np.allclose(T2.samples, 2.0 * T1.samples, rtol=0, atol=0)


def test_hilbert_refined_grid_oracle():
    K = hilbert_cut_kernel(1)
    vals = {}
    for r in (10, 12):
        g = make_grid(2, r)
        f = GridFunction.from_callable(g, lambda x: np.exp(-3 * x * x))
        vals[r] = apply_local_cz(K, f).samples
    coarse_of_fine = vals[12].reshape(-1, 4).mean(axis=1)
    rel = np.sqrt(np.sum((vals[10] - coarse_of_fine) ** 2) / np.sum(coarse_of_fine**2))
    assert rel <= 1e-3


def test_verify_hilbert_kernel_passes():
    rep = verify_kernel_conditions(hilbert_cut_kernel(1), 20000, seed=1)
    assert rep.passed
    assert rep.empirical_d1 <= 1.05
    assert np.isfinite(rep.empirical_d2)


def test_verify_rejects_uncut_kernel():
    K = LocalCZKernel(
        kernel=lambda x, y: 1.0 / np.abs(np.asarray(x) - np.asarray(y)),
        gamma=1, d1=2.0, d2=64.0, name="uncut",
    )
    rep = verify_kernel_conditions(K, 20000, seed=3)
    assert not rep.support_ok


def test_verify_rejects_sgn_kernel():
    K = LocalCZKernel(
        kernel=lambda x, y: np.sign(np.asarray(x) - np.asarray(y))
        * (np.abs(np.asarray(x) - np.asarray(y)) <= 1.0),
        gamma=1, d1=2.0, d2=64.0, name="sgn",
    )
    rep = verify_kernel_conditions(K, 20000, seed=3)
    assert not rep.hormander_ok


def test_verify_budget_guard():
    with pytest.raises(ConfigurationError):
        verify_kernel_conditions(hilbert_cut_kernel(1), 100)


def test_wavelet_projection_kernel_matches_direct(db3):
    from varlp import analyze
    from varlp.wavelets import _atom_values

    g = make_grid(4, 7)
    K = make_kernel("wavelet-proj:0", db3)
    f = GridFunction.from_callable(g, lambda x: np.exp(-2 * (x + 0.3) ** 2))
    Tf = apply_local_cz(K, f)
    c = analyze(f, db3, 0, 5)
    proj = np.zeros(g.count)
    for (j, k), d in c.d.items():
        if j == 0:
            s, vals = _atom_values(db3, "psi", 0, k, g)
            proj[s : s + vals.size] += d * vals
    rel = np.sqrt(np.sum((Tf.samples - proj) ** 2) / np.sum(proj**2))
    assert rel <= 5e-3


def test_kernel_catalog():
    assert make_kernel("hilbert-cut:2").gamma == 2
    with pytest.raises(ConfigurationError):
        make_kernel("mystery:1")
    with pytest.raises(ConfigurationError):
        make_kernel("wavelet-proj:0")  # needs a system


def test_oscillation_of_tf_bounded_by_iterated_maximal():
    # the mean oscillation of Tf over small cubes against inf_Q (M^loc)^5 f
    g = make_grid(4, 9)
    K = hilbert_cut_kernel(1)
    rng = np.random.default_rng(8)
    ratios = []
    for _ in range(10):
        a, b = rng.uniform(0.3, 3.0), rng.uniform(-1.5, 1.5)
        f = GridFunction.from_callable(g, lambda x: np.exp(-a * (x - b) ** 2))
        Tf = apply_local_cz(K, f)
        M5 = m_loc(f, 5)
        for _ in range(5):
            j = int(rng.integers(0, 3))
            k = int(rng.integers(-2 << j, 2 << j))
            Q = DyadicCube(j, k)
            osc = mean_oscillation(Tf, Q, 0.125)
            denom = float(np.min(M5.samples[Q.cell_slice(g)]))
            if denom > 1e-12:
                ratios.append(osc / denom)
    assert ratios and np.isfinite(max(ratios))
