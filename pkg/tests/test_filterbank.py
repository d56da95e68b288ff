import math

import numpy as np
import pytest

from frscat.filterbank import (
    FilterBankSpec,
    build_morlet_bank,
    gabor_2d,
    gaussian_2d,
    littlewood_paley,
    lp_disc,
    lp_sum,
    morlet_2d,
    reflect,
)
from frscat.frwt import frwt


def gabor_reference(h, w, sigma, theta, xi, slant, r, c, reach=6):
    """Direct periodized sum at one pixel."""
    cth, sth = math.cos(theta), math.sin(theta)
    total = 0j
    ry = int(math.ceil(reach * sigma * max(1, 1 / slant) / h)) + 1
    rx = int(math.ceil(reach * sigma * max(1, 1 / slant) / w)) + 1
    for ty in range(-ry, ry + 1):
        for tx in range(-rx, rx + 1):
            y = (r if r < (h + 1) // 2 else r - h) + ty * h
            x = (c if c < (w + 1) // 2 else c - w) + tx * w
            along = cth * x + sth * y
            across = -sth * x + cth * y
            env = math.exp(-(along**2 + slant**2 * across**2) / (2 * sigma**2))
            total += env * complex(math.cos(xi * along), math.sin(xi * along))
    return total * slant / (2 * math.pi * sigma**2)


@pytest.mark.parametrize("theta", [0.0, math.pi / 8, 3 * math.pi / 4])
def test_gabor_matches_pointwise_sum(theta):
    g = gabor_2d(16, 12, 2.0, theta, 1.1, 0.5)
    for r, c in [(0, 0), (1, 3), (15, 11), (8, 6), (5, 9)]:
        assert abs(g[r, c] - gabor_reference(16, 12, 2.0, theta, 1.1, 0.5, r, c)) < 1e-12


def test_morlet_has_zero_mean():
    m = morlet_2d(32, 32, 1.5, 0.3, 1.2, 0.5)
    assert abs(m.sum()) < 1e-12


def test_gaussian_unit_sum():
    assert gaussian_2d(20, 24, 3.0).sum() == pytest.approx(1.0, abs=1e-13)


def test_bank_shapes(bank64):
    assert bank64.phi_hat.shape == (64, 64)
    assert bank64.psi_hat.shape == (5, 8, 64, 64)
    assert bank64.num_scales == 5 and bank64.num_angles == 8
    assert np.all(bank64.psi_hat[:, :, 0, 0] == 0)
    assert not bank64.psi_hat.flags.writeable


def test_lp_bounds_default_bank(bank64):
    rep = littlewood_paley(bank64)
    assert rep.max_sum <= 1 + 1e-9
    assert rep.max_sum == pytest.approx(1.0, abs=1e-12)
    assert rep.epsilon <= 0.98
    assert rep.epsilon == pytest.approx(1 - rep.min_sum)


@pytest.mark.parametrize("size", [32, 48, 64, 96])
def test_lp_bounds_other_grids(size):
    spec = FilterBankSpec(num_scales=3 if size < 64 else 5, grid_width=size, grid_height=size)
    rep = littlewood_paley(build_morlet_bank(spec))
    assert rep.max_sum <= 1 + 1e-9
    assert rep.epsilon < 1


def test_lp_disc_radius():
    disc = lp_disc((64, 64))
    assert disc[0, 0]
    # horizontal frequency 2 pi k / 64 inside iff k <= 28
    assert disc[0, 28] and not disc[0, 29]


def test_reflect_is_involution(rng):
    h = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
    np.testing.assert_array_equal(reflect(reflect(h)), h)
    x = rng.standard_normal((6, 5))
    # the DFT of a real signal is conjugate-symmetric
    X = np.fft.fft2(x)
    np.testing.assert_allclose(reflect(X), np.conj(X), atol=1e-12)


def test_frame_bounds_on_signals(bank64, rng):
    lp = lp_sum(bank64.phi_hat, bank64.psi_hat)
    disc = lp_disc(bank64.shape)
    eps = littlewood_paley(bank64).epsilon
    for _ in range(5):
        x = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        out = frwt(x, bank64, (1, 1))
        assert out.energy() <= np.sum(np.abs(x) ** 2) * (1 + 1e-9)
        # band-limit to the disc for the lower bound
        xb = np.fft.ifft2(np.fft.fft2(x) * disc)
        outb = frwt(xb, bank64, (1, 1))
        assert outb.energy() >= (1 - eps) * np.sum(np.abs(xb) ** 2) * (1 - 1e-9)
    assert lp.max() <= 1 + 1e-9


def _peak_frequency(psi_hat):
    h, w = psi_hat.shape
    power = np.abs(psi_hat) ** 2
    r, c = np.unravel_index(np.argmax(power), power.shape)
    wy = 2 * math.pi * (r if r < h // 2 else r - h) / h
    wx = 2 * math.pi * (c if c < w // 2 else c - w) / w
    return wy, wx


@pytest.mark.parametrize("j", [0, 1, 2])
def test_atom_orientation_and_center(bank64, j):
    """Spectral peak of psi_jk lies at angle k pi / K, radius about 3 pi / 4 / 2^j."""
    K = bank64.num_angles
    for k in range(K):
        wy, wx = _peak_frequency(bank64.psi_hat[j, k])
        angle = math.atan2(wy, wx) % math.pi
        expected = k * math.pi / K
        diff = min(abs(angle - expected), math.pi - abs(angle - expected))
        assert diff < 0.25
        assert math.hypot(wy, wx) == pytest.approx(3 * math.pi / 4 / 2**j, rel=0.35)


def test_rotated_atoms_are_rotations(bank64):
    # on a square grid, the k = K/2 atom is the k = 0 atom turned by 90 degrees
    K = bank64.num_angles
    a = np.abs(bank64.psi_hat[1, 0])
    b = np.abs(bank64.psi_hat[1, K // 2])
    n = a.shape[0]
    neg = (-np.arange(n)) % n
    # b(wx, wy) = a(wy, -wx), i.e. b[r, c] = a[-c, r]
    turned = a[neg, :].T
    np.testing.assert_allclose(b, turned, atol=1e-12)


def test_spec_errors():
    with pytest.raises(ValueError, match="2\\*\\*\\(S-1\\)"):
        FilterBankSpec(num_scales=6, grid_width=32, grid_height=32).check_grid()
    with pytest.raises(ValueError):
        FilterBankSpec(num_scales=0)
    with pytest.raises(ValueError):
        FilterBankSpec(sigma_phi=0)
    with pytest.raises(ValueError):
        build_morlet_bank(FilterBankSpec(num_scales=5, grid_width=32, grid_height=64))


def test_atom_accessor(bank64):
    np.testing.assert_array_equal(bank64.atom(2, 3), bank64.psi_hat[2, 3])


@pytest.mark.parametrize("S,size", [(3, 32), (5, 64)])
def test_grid_doubling_is_stable(S, size):
    a = littlewood_paley(build_morlet_bank(FilterBankSpec(num_scales=S, grid_width=size, grid_height=size)))
    b = littlewood_paley(build_morlet_bank(FilterBankSpec(num_scales=S, grid_width=2 * size, grid_height=2 * size)))
    assert abs(a.min_sum - b.min_sum) < 0.05 * a.min_sum


def test_lowpass_only_bank(bank64):
    phi = bank64.phi_hat / np.abs(bank64.phi_hat).max()
    lp = lp_sum(phi, None)
    disc = lp_disc(bank64.shape)
    expected = min(abs(phi[r, c]) ** 2 for r, c in zip(*np.nonzero(disc)))
    assert lp[disc].min() == pytest.approx(expected, rel=1e-12)
    assert lp.max() == pytest.approx(1.0)


def test_each_atom_has_single_peak_off_dc(bank64):
    for j in range(bank64.num_scales):
        for k in range(bank64.num_angles):
            mag = np.abs(bank64.psi_hat[j, k])
            top = np.flatnonzero(mag == mag.max())
            assert len(top) == 1 and top[0] != 0
            assert np.isfinite(mag).all()
