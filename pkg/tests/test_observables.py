import math

import numpy as np
import pytest

from flp.ed import StateVector, build_basis, dense_ground_state, ground_manifold, ground_state_lanczos
from flp.errors import BasisMismatch, ImaginaryResidue
from flp.model import FillingSpec, ModelParams, Sector
from flp.observables import (
    ObservableSet,
    charge_gap,
    commensurate_polarizations,
    density_correlations,
    ed_observables,
    measure,
    pair_density,
    peak_momentum,
    structure_factor,
)

from oracles import free_ring_energy

CORRELATED = ModelParams(delta_g=-0.8, delta_t=0.0, delta=0.0)
FREE = ModelParams(delta_g=0.0, delta_t=0.0, delta=0.0)


def basis_state(basis, mu, md):
    v = np.zeros(basis.dimension)
    v[basis.index(mu, md)] = 1.0
    return StateVector(v, basis)


def brute_correlations(basis, amplitudes, j):
    # density matrix diagonal, one basis state at a time
    L = basis.L
    n = np.zeros(L)
    nn = np.zeros((L, L))
    for idx, a in enumerate(amplitudes):
        mu, md = basis.masks(idx)
        occ = np.array([((mu >> i) & 1) + ((md >> i) & 1) for i in range(L)], dtype=float)
        n += a * a * occ
        nn += a * a * np.outer(occ, occ)
    return np.array([nn[j, (j + r) % L] - n[j] * n[(j + r) % L] for r in range(L)])


def test_all_doublon_state():
    basis = build_basis(Sector(4, 4, 4))
    assert pair_density(basis_state(basis, 0b1111, 0b1111)) == 1.0


def test_no_minority_atoms():
    basis = build_basis(Sector(6, 3, 0))
    v = np.random.default_rng(1).standard_normal(basis.dimension)
    assert pair_density(StateVector(v / np.linalg.norm(v), basis)) == 0.0


def test_pair_density_counts_shared_sites():
    basis = build_basis(Sector(4, 2, 2))
    assert pair_density(basis_state(basis, 0b0011, 0b0110)) == pytest.approx(0.25)


def test_basis_mismatch():
    a, b = build_basis(Sector(4, 2, 1)), build_basis(Sector(4, 1, 2))
    state = basis_state(a, 0b0011, 0b0001)
    with pytest.raises(BasisMismatch):
        pair_density(state, b)


def test_correlations_dense_oracle():
    basis = build_basis(Sector(6, 3, 3))
    _, vecs = dense_ground_state(CORRELATED, basis)
    state = StateVector(vecs[:, 0], basis)
    for j in range(6):
        corr = density_correlations(state, j=j)
        assert np.allclose(corr, brute_correlations(basis, vecs[:, 0], j), atol=1e-10)
        assert corr[0] >= 0.0
        assert abs(corr.sum()) < 1e-10


def test_correlations_default_site():
    basis = build_basis(Sector(6, 3, 2))
    _, state = ground_state_lanczos(CORRELATED, basis)
    assert np.array_equal(density_correlations(state), density_correlations(state, j=3))
    with pytest.raises(ValueError):
        density_correlations(state, j=6)


def test_structure_factor_of_delta():
    corr = np.zeros(8)
    corr[0] = 1.0
    assert np.allclose(structure_factor(corr), 1.0, atol=1e-15)


def test_structure_factor_sum_rule():
    corr = np.array([0.5, -0.2, -0.1, -0.2])
    nq = structure_factor(corr)
    assert abs(nq[0]) < 1e-15
    assert nq[1] == pytest.approx(nq[3], abs=1e-15)


def test_structure_factor_imaginary_residue():
    with pytest.raises(ImaginaryResidue):
        structure_factor(np.array([0.5, -0.3, 0.0, -0.2]))


def test_peak_momentum_decreasing():
    nq = np.array([0.0, 0.9, 0.5, 0.3, 0.2, 0.3, 0.5, 0.9])
    assert peak_momentum(nq) == pytest.approx(2 * math.pi / 8)


def test_peak_momentum_tie_goes_to_smaller_q():
    nq = np.array([0.0, 0.4, 0.7, 0.1, 0.7, 0.1, 0.7, 0.4])
    assert peak_momentum(nq) == pytest.approx(2 * math.pi * 2 / 8)


def test_peak_momentum_excludes_zero():
    nq = np.array([5.0, 0.1, 0.3, 0.1])
    assert peak_momentum(nq) == pytest.approx(math.pi)


def test_observable_set_invariants():
    with pytest.raises(ValueError):
        ObservableSet(0.1, (0.0,) * 4, (0.1, 0.2, 0.3, 0.2), math.pi, 2)
    with pytest.raises(ValueError):
        ObservableSet(0.1, (0.0,) * 4, (0.0, 0.2, 0.3, 0.25), math.pi, 2)


@pytest.mark.parametrize("sector", [Sector(6, 3, 3), Sector(6, 4, 2), Sector(8, 4, 3)])
def test_measure_sum_rules_and_round_trip(sector):
    basis = build_basis(sector)
    _, states = ground_manifold(CORRELATED, basis)
    obs = measure(states)
    assert abs(obs.nq[0]) < 1e-10 and abs(sum(obs.corr)) < 1e-10
    assert np.allclose(obs.nq[1:], obs.nq[1:][::-1], atol=1e-10)
    assert ObservableSet.from_dict(obs.to_dict()) == obs


def test_single_chiral_state_is_rejected():
    # (8, 4, 3) has a +-k ground doublet; one member alone breaks reflection symmetry
    basis = build_basis(Sector(8, 4, 3))
    assert len(ground_manifold(CORRELATED, basis)[0]) == 2
    _, state = ground_state_lanczos(CORRELATED, basis)
    with pytest.raises(ImaginaryResidue):
        measure(state)


def test_species_swap():
    params = ModelParams(delta_g=-0.7, delta_t=0.3, delta=0.5)
    a = measure(ground_manifold(params, build_basis(Sector(8, 5, 3)))[1])
    b = measure(ground_manifold(params, build_basis(Sector(8, 3, 5)))[1])
    assert a.n_d == pytest.approx(b.n_d, abs=1e-10)
    assert np.allclose(a.nq, b.nq, atol=1e-10)


def test_site_invariance():
    basis = build_basis(Sector(8, 4, 4))
    _, state = ground_state_lanczos(CORRELATED, basis)
    ref = structure_factor(density_correlations(state, j=4))
    for j in range(8):
        assert np.allclose(structure_factor(density_correlations(state, j=j)), ref, atol=1e-10)


@pytest.mark.parametrize("sector", [Sector(8, 4, 4), Sector(8, 5, 3), Sector(10, 4, 3)])
def test_integrable_point_quantizes_pairs(sector):
    basis = build_basis(sector)
    _, state = ground_state_lanczos(ModelParams(delta_g=-1.0, delta_t=0.4, delta=0.0), basis)
    n_d = pair_density(state)
    assert abs(n_d * sector.L - round(n_d * sector.L)) < 1e-8


def test_commensurate_polarizations():
    assert commensurate_polarizations(12, 1.0) == pytest.approx([0, 1 / 6, 1 / 3, 0.5, 2 / 3, 5 / 6, 1])
    assert commensurate_polarizations(6, 0.5) == pytest.approx([1 / 3, 1.0])


def test_ed_observables_degenerate_manifold_is_symmetric():
    # free fermions at n=1, L=8 have an open shell: a degenerate ground space
    reports, obs = ed_observables(FREE, 8, FillingSpec(1.0, 0.0))
    assert len(reports) > 1
    assert all(abs(r.e0 - reports[0].e0) < 1e-8 for r in reports)
    assert np.allclose(obs.nq[1:], obs.nq[1:][::-1], atol=1e-10)


def _free_gap(L, N):
    def energy(count):
        return free_ring_energy(L, (count + 1) // 2) + free_ring_energy(L, count // 2)

    return energy(N + 1) + energy(N - 1) - 2.0 * energy(N)


@pytest.mark.parametrize("L", [6, 8])
def test_free_gap_half_filling(L):
    assert charge_gap(FREE, L, L) == pytest.approx(_free_gap(L, L), abs=1e-8)


def test_free_gap_below_half_filling_shrinks():
    for L in (6, 8, 10, 12):
        gap = charge_gap(FREE, L, L // 2)
        assert gap == pytest.approx(_free_gap(L, L // 2), abs=1e-8)
        # level spacing of the cosine band is at most 4 pi / L
        assert gap <= 2 * 4 * math.pi / L


def test_gap_grows_with_detuning():
    deltas = [2.0, 4.0, 6.0, 8.0]
    gaps = []
    for delta in deltas:
        params = CORRELATED.replace(delta=delta)
        gap = charge_gap(params, 6, 6)
        energies = []
        for sector in (Sector(6, 3, 2), Sector(6, 3, 3), Sector(6, 4, 3)):
            energies.append(dense_ground_state(params, build_basis(sector))[0][0])
        assert gap == pytest.approx(energies[0] + energies[2] - 2 * energies[1], abs=1e-8)
        gaps.append(gap)
    assert all(b > a for a, b in zip(gaps, gaps[1:]))


def test_gap_needs_room():
    with pytest.raises(ValueError):
        charge_gap(FREE, 4, 8)
