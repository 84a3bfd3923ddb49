import numpy as np
import pytest

from rabisim import (
    BareCoefficients,
    FieldStateSpec,
    IntegratorConfig,
    ModelParams,
    RateParams,
    SpectralDensity,
    TruncationScheme,
    bare_to_dressed,
    build_dressed_basis,
    build_hamiltonian,
    build_operators,
    compute_rates,
    compute_w_tensors,
    diagonalize,
    dme_rhs_dressed,
    dressed_matrix_elements,
    dressed_to_bare,
    evolve_dme_bare,
    evolve_dme_dressed,
    generate_field_state,
    parity_operator,
    project_to_dressed,
)
from rabisim.dressed import DMEBareSystem
from rabisim.errors import DimensionMismatch

from _oracles import exact_unitary_states, random_coefficients, trace_distance


def _basis(Omega, g, q1):
    tr = TruncationScheme(q1)
    ops = build_operators(tr)
    H = build_hamiltonian(ModelParams(Omega0=Omega, g=g), ops)
    return tr, H, build_dressed_basis(H, tr)


# -- diagonalization ---------------------------------------------------------

def test_decoupled_spectrum_and_eigenvectors():
    tr, H, basis = _basis(Omega=1.5, g=0.0, q1=2)
    expected = sorted([0.0, 1.0, 2.0, 1.5, 2.5, 3.5])
    assert np.allclose(basis.eigenvalues, expected, atol=1e-14)
    # eigenvectors are (phase-fixed) unit basis vectors
    mags = np.abs(basis.coefficients)
    assert np.allclose(np.sort(mags, axis=0)[-1], 1.0, atol=1e-14)
    assert np.allclose(np.sum(mags, axis=0), 1.0, atol=1e-12)


def test_ground_energy_below_zero_in_usc():
    _, _, basis = _basis(Omega=1.0, g=0.5, q1=10)
    assert basis.eigenvalues[0] < 0.0
    # second-order scale estimate -g^2/(omega+Omega) = -0.125
    assert basis.eigenvalues[0] == pytest.approx(-0.125, abs=0.06)


def test_eigen_residuals_and_orthonormality():
    tr, H, basis = _basis(Omega=6.4121, g=0.5, q1=9)
    V = basis.coefficients
    norm = np.max(np.abs(basis.eigenvalues))
    res = H @ V - V * basis.eigenvalues[None, :]
    assert np.max(np.abs(res)) < 1e-10 * norm
    assert np.max(np.abs(V.conj().T @ V - np.eye(tr.dim))) < 1e-12
    assert np.all(np.diff(basis.eigenvalues) >= 0)


def test_degenerate_levels_resolved_by_parity():
    # g = 0, Omega = omega: |g,f_{m+1}> and |e,f_m> are exactly degenerate
    tr, H, basis = _basis(Omega=1.0, g=0.0, q1=4)
    P = parity_operator(tr)
    for n in range(tr.dim):
        v = basis.coefficients[:, n]
        pv = P @ v
        overlap = abs(v.conj() @ pv)
        assert overlap == pytest.approx(1.0, abs=1e-12)  # parity eigenstate


def test_eigenvector_phases_deterministic():
    tr, H, basis1 = _basis(Omega=2.9, g=0.8, q1=6)
    basis2 = build_dressed_basis(H, tr)
    assert np.array_equal(basis1.coefficients, basis2.coefficients)
    lead = np.abs(basis1.coefficients).argmax(axis=0)
    vals = basis1.coefficients[lead, np.arange(tr.dim)]
    assert np.all(vals.real > 0)
    assert np.max(np.abs(vals.imag)) < 1e-14


def test_dimension_mismatch_rejected():
    tr = TruncationScheme(3)
    with pytest.raises(DimensionMismatch):
        diagonalize(np.eye(5), tr)


# -- matrix elements ---------------------------------------------------------

def test_matrix_elements_match_congruence_oracle():
    tr, H, basis = _basis(Omega=4.7736, g=0.3, q1=8)
    ops = build_operators(tr)
    V = basis.coefficients
    for elems, op in ((basis.sigma_z_elems, ops.sigma_z),
                      (basis.sigma_x_elems, ops.sigma_x),
                      (basis.X_elems, ops.X)):
        oracle = V.conj().T @ op @ V
        assert np.max(np.abs(elems - oracle)) < 1e-12


def test_matrix_elements_bare_limit():
    tr, H, basis = _basis(Omega=2.5, g=0.0, q1=3)
    X = basis.X_elems
    lam = basis.eigenvalues
    for n in range(tr.dim):
        for m in range(tr.dim):
            v = abs(X[n, m])
            if v > 1e-12:
                # only +-1 photon transitions within a qubit branch survive
                assert abs(abs(lam[n] - lam[m]) - 1.0) < 1e-12


def test_hermiticity_and_diagonal_range():
    _, _, basis = _basis(Omega=1.5, g=0.5, q1=6)
    X = basis.X_elems
    sz = basis.sigma_z_elems
    assert np.max(np.abs(X - X.conj().T)) < 1e-13
    d = np.diag(sz).real
    assert np.all(d >= -1 - 1e-12) and np.all(d <= 1 + 1e-12)
    assert np.max(np.abs(np.diag(sz).imag)) < 1e-14


def test_parity_selection_rules():
    tr, H, basis = _basis(Omega=2.9, g=0.8, q1=8)
    P = parity_operator(tr)
    V = basis.coefficients
    parities = np.real(np.einsum("in,ij,jn->n", V.conj(), P, V))
    same = np.abs(parities[:, None] - parities[None, :]) < 1e-6
    # X and sigma_x flip parity; sigma_z preserves it
    assert np.max(np.abs(basis.X_elems[same])) < 1e-10
    assert np.max(np.abs(basis.sigma_x_elems[same])) < 1e-10
    assert np.max(np.abs(basis.sigma_z_elems[~same])) < 1e-10


# -- spectral densities and rates --------------------------------------------

def _sd(kind, model, k0=1e-3, g0=1e-3, gp=1e-3):
    return SpectralDensity.from_rates(kind, RateParams(k0, g0, gp), model)


def test_rate_negative_frequency_is_zero():
    model = ModelParams(Omega0=1.5, g=0.3)
    for kind in ("white", "ohmic"):
        sd = _sd(kind, model)
        for ch in ("kappa", "gamma", "gamma_phi"):
            assert sd.rate(ch, -0.7) == 0.0


def test_white_rate_inclusive_at_zero():
    sd = _sd("white", ModelParams(Omega0=1.5, g=0.3))
    assert sd.rate("kappa", 0.0) == 1e-3
    assert sd.rate("gamma_phi", 0.0) == 1e-3


def test_ohmic_rate_values():
    sd = _sd("ohmic", ModelParams(Omega0=1.5, g=0.3), k0=2e-3)
    # kappa(omega) = kappa0 * 1 * exp(-1/10)
    assert sd.rate("kappa", 1.0) == pytest.approx(2e-3 * 0.9048374180359595, rel=1e-12)
    assert sd.rate("kappa", 0.0) == 0.0
    assert sd.rate("gamma_phi", 0.5) == 1e-3  # dephasing stays flat


def test_ohmic_default_cutoffs():
    model = ModelParams(Omega0=2.5, g=0.3)
    sd = _sd("ohmic", model)
    assert sd.Omega_c == 25.0
    assert sd.omega_c == 10.0


def test_rates_all_zero():
    tr, H, basis = _basis(Omega=1.5, g=0.4, q1=5)
    sd = SpectralDensity.from_rates("white", RateParams(), ModelParams(Omega0=1.5, g=0.4))
    tbl = compute_rates(basis, sd)
    for M in (tbl.Phi, tbl.Gamma, tbl.Theta, tbl.Upsilon):
        assert np.max(np.abs(M)) == 0.0


def test_bare_limit_cascade_rates():
    # g = 0 with white noise: cavity channel gives kappa0 * m between
    # |q, f_m> -> |q, f_{m-1}>
    q1 = 4
    tr, H, basis = _basis(Omega=5.5, g=0.0, q1=q1)
    model = ModelParams(Omega0=5.5, g=0.0)
    k0 = 2e-3
    sd = _sd("white", model, k0=k0, g0=0.0, gp=0.0)
    tbl = compute_rates(basis, sd)
    lam = basis.eigenvalues
    nvec = np.arange(tr.n_fock)
    # locate eigenstates by energy: |g,f_m> has energy m, |e,f_m> has 5.5+m
    for m in range(1, q1 + 1):
        j = int(np.argmin(np.abs(lam - (m - 1))))
        k = int(np.argmin(np.abs(lam - m)))
        assert tbl.Gamma[j, k] == pytest.approx(k0 * m, rel=1e-12)


def test_channel_sum_and_upsilon_theta_identities():
    tr, H, basis = _basis(Omega=1.5, g=0.5, q1=6)
    sd = _sd("ohmic", ModelParams(Omega0=1.5, g=0.5))
    tbl = compute_rates(basis, sd)
    assert np.max(np.abs(tbl.Gamma - (tbl.Gamma_phi + tbl.Gamma_kappa
                                      + tbl.Gamma_gamma))) < 1e-18
    assert np.all(tbl.Gamma >= 0)
    ups_diag = tbl.Gamma.sum(axis=0)
    assert np.max(np.abs(np.diag(tbl.Upsilon) - ups_diag)) == 0.0
    assert np.all(tbl.Theta - tbl.Upsilon >= -1e-18)
    assert np.max(np.abs(tbl.Upsilon - 0.5 * (ups_diag[:, None] + ups_diag[None, :]))) == 0.0


def test_gamma_matches_rate_times_element_formula():
    # Gamma^{jk} must equal rate(Delta_kj) * |element|^2 channel by channel
    # for every pair, including degenerate ones (white keeps the flat rate
    # at Delta = 0, Ohmic relaxation vanishes linearly there).
    tr, H, basis = _basis(Omega=1.0, g=0.5, q1=4)
    model = ModelParams(Omega0=1.0, g=0.5)
    lam = basis.eigenvalues
    dE = lam[None, :] - lam[:, None]
    upper = np.triu(np.ones((tr.dim, tr.dim), dtype=bool), k=1)
    for kind in ("white", "ohmic"):
        sd = _sd(kind, model, k0=1e-3, g0=2e-3, gp=4e-3)
        tbl = compute_rates(basis, sd)
        for ch, elems, got in (("kappa", basis.X_elems, tbl.Gamma_kappa),
                               ("gamma", basis.sigma_x_elems, tbl.Gamma_gamma)):
            expected = sd.rate(ch, dE) * np.abs(elems) ** 2
            assert np.max(np.abs(got[upper] - expected[upper])) < 1e-18
        expected_phi = 0.5 * sd.rate("gamma_phi", dE) * np.abs(basis.sigma_z_elems) ** 2
        assert np.max(np.abs(tbl.Gamma_phi[upper] - expected_phi[upper])) < 1e-18
    # formula evaluation at Delta = 0: flat channels keep the base rate,
    # Ohmic relaxation is suppressed by the linear prefactor
    white = _sd("white", model)
    ohmic = _sd("ohmic", model)
    assert white.rate("gamma", 0.0) == 1e-3
    assert white.rate("gamma_phi", 0.0) == 1e-3
    assert ohmic.rate("gamma", 0.0) == 0.0
    assert ohmic.rate("kappa", 0.0) == 0.0


def test_white_vs_ohmic_ratio():
    tr, H, basis = _basis(Omega=1.5, g=0.5, q1=6)
    model = ModelParams(Omega0=1.5, g=0.5)
    white = compute_rates(basis, _sd("white", model))
    ohmic = compute_rates(basis, _sd("ohmic", model))
    lam = basis.eigenvalues
    dE = lam[None, :] - lam[:, None]
    mask = (white.Gamma_kappa > 1e-15) & (dE > 1e-12)
    expected = (dE / 1.0) * np.exp(-dE / 10.0)
    ratio = np.zeros_like(dE)
    ratio[mask] = ohmic.Gamma_kappa[mask] / white.Gamma_kappa[mask]
    assert np.max(np.abs(ratio[mask] - expected[mask])) < 1e-12


# -- dressed-basis dynamics ---------------------------------------------------

def test_dressed_ground_state_is_fixed_point():
    tr, H, basis = _basis(Omega=1.5, g=0.5, q1=6)
    tbl = compute_rates(basis, _sd("white", ModelParams(Omega0=1.5, g=0.5)))
    r = np.zeros((tr.dim, tr.dim), dtype=complex)
    r[0, 0] = 1.0
    assert np.max(np.abs(dme_rhs_dressed(r, basis, tbl))) == 0.0


def test_single_level_cascade_bookkeeping():
    tr, H, basis = _basis(Omega=1.5, g=0.5, q1=4)
    tbl = compute_rates(basis, _sd("ohmic", ModelParams(Omega0=1.5, g=0.5)))
    k = 5
    r = np.zeros((tr.dim, tr.dim), dtype=complex)
    r[k, k] = 1.0
    dr = dme_rhs_dressed(r, basis, tbl)
    assert dr[k, k].real == pytest.approx(-tbl.Upsilon[k, k], rel=1e-12)
    for j in range(k):
        assert dr[j, j].real == pytest.approx(tbl.Gamma[j, k], rel=1e-12, abs=1e-20)
    assert abs(np.trace(dr)) < 1e-18


def test_rhs_trace_preservation_random():
    rng = np.random.default_rng(8)
    tr, H, basis = _basis(Omega=2.9, g=0.8, q1=5)
    tbl = compute_rates(basis, _sd("white", ModelParams(Omega0=2.9, g=0.8)))
    for _ in range(10):
        R = rng.normal(size=(tr.dim, tr.dim)) + 1j * rng.normal(size=(tr.dim, tr.dim))
        r = R @ R.conj().T
        r /= np.trace(r).real
        assert abs(np.trace(dme_rhs_dressed(r, basis, tbl))) < 1e-14


def test_two_level_amplitude_damping_closed_form():
    # Q1 = 0: two dressed levels; populations relax at Gamma^{01}
    tr, H, basis = _basis(Omega=1.5, g=0.2, q1=0)
    tbl = compute_rates(basis, _sd("white", ModelParams(Omega0=1.5, g=0.2)))
    gamma01 = tbl.Gamma[0, 1]
    assert gamma01 > 0
    r0 = np.zeros((2, 2), dtype=complex)
    r0[1, 1] = 1.0
    grid = np.linspace(0.0, 3.0 / gamma01, 7)
    traj = evolve_dme_dressed(r0, basis, tbl, grid)
    for i, t in enumerate(grid):
        assert traj.r(i)[1, 1].real == pytest.approx(np.exp(-gamma01 * t), abs=1e-9)


def test_exact_and_ode_paths_agree():
    tr, H, basis = _basis(Omega=1.5, g=0.4, q1=5)
    tbl = compute_rates(basis, _sd("ohmic", ModelParams(Omega0=1.5, g=0.4)))
    st = generate_field_state(FieldStateSpec(kind="coherent", alpha=1.0), tr,
                              tail_tol=1e-2, strict=False)
    r0 = project_to_dressed(st, False, basis)
    grid = np.linspace(0.0, 25.0, 11)
    exact = evolve_dme_dressed(r0, basis, tbl, grid, method="exact")
    ode = evolve_dme_dressed(r0, basis, tbl, grid, method="ode",
                             cfg=IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13))
    assert np.max(np.abs(exact.r_samples - ode.r_samples)) < 1e-9


def test_unitary_limit_pure_rotation():
    tr, H, basis = _basis(Omega=1.5, g=0.4, q1=4)
    tbl = compute_rates(basis, SpectralDensity.from_rates(
        "white", RateParams(), ModelParams(Omega0=1.5, g=0.4)))
    rng = np.random.default_rng(4)
    R = rng.normal(size=(tr.dim, tr.dim)) + 1j * rng.normal(size=(tr.dim, tr.dim))
    r0 = R @ R.conj().T
    r0 /= np.trace(r0).real
    grid = np.array([0.0, 3.7])
    traj = evolve_dme_dressed(r0, basis, tbl, grid)
    lam = basis.eigenvalues
    phases = np.exp(-1j * (lam[:, None] - lam[None, :]) * grid[1])
    assert np.max(np.abs(traj.r(1) - r0 * phases)) < 1e-12


def test_cascade_reaches_dressed_ground():
    tr, H, basis = _basis(Omega=1.5, g=0.5, q1=4)
    tbl = compute_rates(basis, _sd("white", ModelParams(Omega0=1.5, g=0.5)))
    rates_pos = tbl.Gamma[tbl.Gamma > 1e-15]
    t_end = 20.0 / rates_pos.min()
    r0 = np.zeros((tr.dim, tr.dim), dtype=complex)
    r0[4, 4] = 1.0
    traj = evolve_dme_dressed(r0, basis, tbl, np.array([0.0, t_end]))
    assert traj.r(1)[0, 0].real > 0.999


def test_trace_constant_along_samples():
    tr, H, basis = _basis(Omega=2.9, g=0.8, q1=5)
    tbl = compute_rates(basis, _sd("ohmic", ModelParams(Omega0=2.9, g=0.8)))
    st = generate_field_state(FieldStateSpec(kind="thermal", alpha=0.5), tr,
                              strict=False)
    r0 = project_to_dressed(st, False, basis)
    tr0 = np.trace(r0).real
    traj = evolve_dme_dressed(r0, basis, tbl, np.linspace(0.0, 100.0, 21))
    for i in range(21):
        assert abs(np.trace(traj.r(i)).real - tr0) < 1e-12


def test_energy_rank_lyapunov_monotone():
    # total dressed population weighted by energy rank never increases
    # for diagonal initial states at T = 0
    tr, H, basis = _basis(Omega=1.5, g=0.5, q1=4)
    tbl = compute_rates(basis, _sd("white", ModelParams(Omega0=1.5, g=0.5)))
    rng = np.random.default_rng(13)
    pops = rng.uniform(size=tr.dim)
    pops /= pops.sum()
    r0 = np.diag(pops).astype(complex)
    traj = evolve_dme_dressed(r0, basis, tbl, np.linspace(0.0, 400.0, 41))
    ranks = np.arange(tr.dim)
    series = [float(ranks @ np.diag(traj.r(i)).real) for i in range(41)]
    assert np.all(np.diff(series) <= 1e-10)


# -- basis conversion ---------------------------------------------------------

def test_dressed_to_bare_identity_at_g0():
    tr, H, basis = _basis(Omega=2.5, g=0.0, q1=3)
    rng = np.random.default_rng(17)
    R = rng.normal(size=(tr.dim, tr.dim)) + 1j * rng.normal(size=(tr.dim, tr.dim))
    r = R @ R.conj().T
    r /= np.trace(r).real
    coeffs = dressed_to_bare(r, basis)
    V = basis.coefficients
    oracle = V @ r @ V.conj().T
    assert np.max(np.abs(coeffs.to_density() - oracle)) < 1e-13


def test_dressed_bare_roundtrip():
    tr, H, basis = _basis(Omega=4.7736, g=0.3, q1=5)
    st = generate_field_state(FieldStateSpec(kind="coherent", alpha=0.8), tr,
                              tail_tol=1e-4, strict=False)
    r = project_to_dressed(st, False, basis)
    back = bare_to_dressed(dressed_to_bare(r, basis), basis)
    assert np.max(np.abs(back - r)) < 1e-12


def test_dressed_to_bare_congruence_oracle_random():
    tr, H, basis = _basis(Omega=1.5, g=0.5, q1=5)
    rng = np.random.default_rng(23)
    R = rng.normal(size=(tr.dim, tr.dim)) + 1j * rng.normal(size=(tr.dim, tr.dim))
    r = 0.5 * (R + R.conj().T)
    coeffs = dressed_to_bare(r, basis)
    V = basis.coefficients
    oracle = V @ r @ V.conj().T
    n1 = tr.n_fock
    assert np.max(np.abs(coeffs.A - oracle[:n1, :n1])) < 1e-12
    assert np.max(np.abs(coeffs.B - oracle[n1:, n1:])) < 1e-12
    assert np.max(np.abs(coeffs.C - oracle[:n1, n1:])) < 1e-12


# -- W tensors and the bare-basis solver --------------------------------------

def test_w_tensors_empty_at_zero_rates():
    tr, H, basis = _basis(Omega=1.5, g=0.4, q1=4)
    tbl = compute_rates(basis, SpectralDensity.from_rates(
        "white", RateParams(), ModelParams(Omega0=1.5, g=0.4)))
    w = compute_w_tensors(basis, tbl)
    assert w.max_abs == 0.0
    assert all(blk.nnz == 0 for blk in w.blocks.values())


def _explicit_w_reference(basis, tbl, dest, src, q1):
    """Literal term-by-term sums for one W table (slow loops)."""
    n1 = q1 + 1
    V = basis.coefficients
    D = 2 * n1
    Phi = tbl.Phi
    Gamma = tbl.Gamma

    def c(i, n):  # 1-based bare index into eigenvector n
        return V[i - 1, n]

    def row(block, idx):
        return idx if block == "g" else idx + n1

    d1, d2 = {"A": ("g", "g"), "B": ("e", "e"), "C": ("g", "e"), "D": ("e", "g")}[dest]
    s1, s2 = {"A": ("g", "g"), "B": ("e", "e"), "C": ("g", "e"), "D": ("e", "g")}[src]
    W = np.zeros((n1, n1, n1, n1), dtype=complex)
    for N in range(1, n1 + 1):
        for M in range(1, n1 + 1):
            for n in range(1, n1 + 1):
                for m in range(1, n1 + 1):
                    val = 0j
                    for j in range(D):
                        for k in range(D):
                            val += (Phi[j] * Phi[k]
                                    * np.conj(c(row(s1, n), j)) * c(row(s2, m), k)
                                    * c(row(d1, N), j) * np.conj(c(row(d2, M), k)))
                    if s2 == d2 and m == M:
                        for k in range(D):
                            val -= 0.5 * Phi[k] ** 2 * c(row(d1, N), k) \
                                * np.conj(c(row(s1, n), k))
                    if s1 == d1 and n == N:
                        for k in range(D):
                            val -= 0.5 * Phi[k] ** 2 * np.conj(c(row(d2, M), k)) \
                                * c(row(s2, m), k)
                    for j in range(D):
                        for k in range(j + 1, D):
                            G = Gamma[j, k]
                            if G == 0.0:
                                continue
                            val += G * (c(row(d1, N), j) * np.conj(c(row(d2, M), j))
                                        * np.conj(c(row(s1, n), k)) * c(row(s2, m), k))
                            if s2 == d2 and m == M:
                                val -= 0.5 * G * c(row(d1, N), k) \
                                    * np.conj(c(row(s1, n), k))
                            if s1 == d1 and n == N:
                                val -= 0.5 * G * np.conj(c(row(d2, M), k)) \
                                    * c(row(s2, m), k)
                    W[N - 1, M - 1, n - 1, m - 1] = val
    return W.reshape(n1 * n1, n1 * n1)


@pytest.mark.parametrize("dest,src", [("A", "A"), ("A", "B"), ("A", "D"),
                                      ("B", "D"), ("C", "C")])
def test_w_blocks_match_explicit_sums(dest, src):
    q1 = 2
    tr, H, basis = _basis(Omega=1.5, g=0.4, q1=q1)
    tbl = compute_rates(basis, _sd("white", ModelParams(Omega0=1.5, g=0.4)))
    w = compute_w_tensors(basis, tbl, epsilon_prune=0.0)
    ref = _explicit_w_reference(basis, tbl, dest, src, q1)
    got = np.asarray(w.blocks[(dest, src)].todense())
    assert np.max(np.abs(got - ref)) < 1e-16


@pytest.mark.parametrize("kind", ["white", "ohmic"])
def test_cross_representation_rhs_equivalence(kind):
    # W-tensor RHS must equal the dressed-basis RHS transformed to bare
    rng = np.random.default_rng(31)
    tr, H, basis = _basis(Omega=1.5, g=0.4, q1=5)
    model = ModelParams(Omega0=1.5, g=0.4)
    tbl = compute_rates(basis, _sd(kind, model, k0=1e-3, g0=2e-3, gp=5e-4))
    w = compute_w_tensors(basis, tbl, epsilon_prune=0.0)
    system = DMEBareSystem(model, w)
    coeffs = random_coefficients(rng, tr)
    Y = system.packing.pack(coeffs.A, coeffs.B, coeffs.C)
    dA, dB, dC = system.packing.unpack(system.rhs(0.0, Y))
    r = bare_to_dressed(coeffs, basis)
    dc = dressed_to_bare(dme_rhs_dressed(r, basis, tbl), basis)
    assert np.max(np.abs(dA - dc.A)) < 1e-9
    assert np.max(np.abs(dB - dc.B)) < 1e-9
    assert np.max(np.abs(dC - dc.C)) < 1e-9


def test_w_rhs_preserves_hermiticity_and_trace():
    rng = np.random.default_rng(37)
    tr, H, basis = _basis(Omega=2.9, g=0.8, q1=4)
    model = ModelParams(Omega0=2.9, g=0.8)
    tbl = compute_rates(basis, _sd("ohmic", model))
    w = compute_w_tensors(basis, tbl, epsilon_prune=0.0)
    n1 = tr.n_fock
    wc = w.combined()
    for _ in range(5):
        coeffs = random_coefficients(rng, tr)
        src = np.concatenate([coeffs.A.ravel(), coeffs.B.ravel(),
                              coeffs.C.ravel(), coeffs.C.conj().T.ravel()])
        out = wc @ src
        dA = out[:n1 * n1].reshape(n1, n1)
        dB = out[n1 * n1:2 * n1 * n1].reshape(n1, n1)
        assert np.max(np.abs(dA - dA.conj().T)) < 1e-15
        assert np.max(np.abs(dB - dB.conj().T)) < 1e-15
        assert abs(np.trace(dA) + np.trace(dB)) < 1e-15


def test_pruning_reports_and_thresholds():
    tr, H, basis = _basis(Omega=1.5, g=0.4, q1=4)
    tbl = compute_rates(basis, _sd("white", ModelParams(Omega0=1.5, g=0.4)))
    full = compute_w_tensors(basis, tbl, epsilon_prune=0.0)
    assert compute_w_tensors(basis, tbl, epsilon_rel=1e-6).epsilon \
        == pytest.approx(1e-6 * full.max_abs)
    # prune at the median magnitude: roughly half the entries must go
    mags = np.concatenate([np.abs(b.data) for b in full.blocks.values()])
    cut = float(np.median(mags))
    pruned = compute_w_tensors(basis, tbl, epsilon_prune=cut)
    assert pruned.fill_ratio < full.fill_ratio
    for blk in pruned.blocks.values():
        if blk.nnz:
            assert np.min(np.abs(blk.data)) >= cut


def test_evolve_dme_bare_unitary_limit():
    tr, H, basis = _basis(Omega=4.7736, g=0.3, q1=6)
    model = ModelParams(Omega0=4.7736, g=0.3)
    tbl = compute_rates(basis, SpectralDensity.from_rates("white", RateParams(), model))
    w = compute_w_tensors(basis, tbl)
    st = generate_field_state(FieldStateSpec(kind="coherent", alpha=0.7), tr,
                              tail_tol=1e-5)
    rho0 = BareCoefficients.from_field_state(st, False)
    grid = np.linspace(0.0, 30.0, 4)
    traj = evolve_dme_bare(rho0, model, w, grid, positivity_check=False)
    exact = exact_unitary_states(H, rho0.to_density(), grid)
    for i in range(len(grid)):
        assert trace_distance(traj.coefficients(i).to_density(), exact[i]) < 1e-7


def test_solver_representations_agree_short_run():
    tr, H, basis = _basis(Omega=1.5, g=0.5, q1=8)
    model = ModelParams(Omega0=1.5, g=0.5)
    tbl = compute_rates(basis, _sd("white", model))
    w = compute_w_tensors(basis, tbl)
    st = generate_field_state(FieldStateSpec(kind="coherent", alpha=1.0), tr,
                              tail_tol=1e-3, strict=False)
    rho0 = BareCoefficients.from_field_state(st, False)
    r0 = project_to_dressed(st, False, basis)
    grid = np.linspace(0.0, 50.0, 11)
    bare = evolve_dme_bare(rho0, model, w, grid, positivity_check=False)
    dressed = evolve_dme_dressed(r0, basis, tbl, grid).to_bare()
    nvec = np.arange(tr.n_fock)
    for i in range(len(grid)):
        cb = bare.coefficients(i)
        cd = dressed.coefficients(i)
        nb = float(nvec @ np.diag(cb.A + cb.B).real)
        nd = float(nvec @ np.diag(cd.A + cd.B).real)
        assert abs(nb - nd) < 1e-7
        assert abs(np.trace(cb.B).real - np.trace(cd.B).real) < 1e-7
