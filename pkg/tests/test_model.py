import pytest
from hypothesis import given, strategies as st

from flp.errors import NonIntegerSector
from flp.model import FillingSpec, ModelParams, Sector, derive_couplings, sector_for


@pytest.mark.parametrize(
    "delta_g, delta_t, expected",
    [
        (-1.0, 0.4, (0.0, -0.6)),
        (-0.8, 0.0, (0.2, -0.6)),
        (0.0, 0.0, (1.0, 1.0)),
    ],
)
def test_derive_couplings(delta_g, delta_t, expected):
    g, t_ad = derive_couplings(ModelParams(delta_g=delta_g, delta_t=delta_t))
    assert g == pytest.approx(expected[0], abs=1e-15)
    assert t_ad == pytest.approx(expected[1], abs=1e-15)


def test_properties_follow_shifts():
    params = ModelParams(delta_g=-0.8, delta_t=0.1)
    assert params.g == pytest.approx(0.2)
    assert params.t_ad == pytest.approx(0.1 + 0.4 - 1.0)
    assert params.replace(delta_g=-1.0).g == 0.0


def test_hop_amplitudes_match_couplings():
    params = ModelParams(delta_g=-0.8, delta_t=0.0)
    direct, single, double = params.hop_amplitudes()
    assert direct == -1.0
    assert single == pytest.approx(-params.g)
    assert double == pytest.approx(-params.t_ad)


def test_t_must_be_positive():
    with pytest.raises(ValueError):
        ModelParams(t=0.0)


finite = st.floats(-5, 5, allow_nan=False)


@given(finite, finite)
def test_couplings_round_trip(delta_g, delta_t):
    params = ModelParams(delta_g=delta_g, delta_t=delta_t)
    back = ModelParams.from_couplings(params.g, params.t_ad)
    assert back.delta_g == pytest.approx(delta_g, abs=1e-15)
    assert back.delta_t == pytest.approx(delta_t, abs=1e-14)


@pytest.mark.parametrize(
    "L, n, p, expected",
    [(16, 1.0, 0.0, (16, 8, 8)), (12, 1.0, 1 / 3, (12, 8, 4))],
)
def test_sector_for(L, n, p, expected):
    assert sector_for(L, FillingSpec(n, p)) == Sector(*expected)


def test_sector_for_rejects_incommensurate():
    with pytest.raises(NonIntegerSector):
        sector_for(10, FillingSpec(1.0, 0.05))
    with pytest.raises(NonIntegerSector):
        sector_for(10, FillingSpec(0.55, 0.0))


def test_negative_polarization_folds():
    assert FillingSpec(1.0, -0.5).p == 0.5
    assert sector_for(8, FillingSpec(1.0, -0.5)) == Sector(8, 6, 2)


def test_filling_spec_bounds():
    with pytest.raises(ValueError):
        FillingSpec(2.5)
    with pytest.raises(ValueError):
        FillingSpec(1.5, 0.5)  # 1.125 majority atoms per site


@st.composite
def commensurate(draw):
    L = draw(st.integers(2, 24))
    N = draw(st.integers(1, 2 * L))
    N_up = draw(st.integers(max(N - L, (N + 1) // 2), min(N, L)))
    return L, N, N_up


@given(commensurate())
def test_sector_round_trip(case):
    L, N, N_up = case
    spec = FillingSpec(N / L, (2 * N_up - N) / N)
    sector = sector_for(L, spec)
    assert sector.filling == pytest.approx(spec.n, abs=1e-12)
    assert sector.polarization == pytest.approx(spec.p, abs=1e-12)


@given(st.integers(2, 20).flatmap(lambda L: st.tuples(st.just(L), st.integers(0, L), st.integers(0, L))))
def test_spin_swap_sectors(case):
    L, a, b = case
    s, t = Sector(L, a, b), Sector(L, b, a)
    assert s.swapped() == t
    assert s.polarization == t.polarization
