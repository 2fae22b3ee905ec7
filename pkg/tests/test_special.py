import numpy as np
import pytest
from scipy import special as sps

from rvfilter.special import gamma_ratio, loggamma


def _grid(re_lo, re_hi):
    re = np.linspace(re_lo, re_hi, 41)
    im = np.concatenate([-np.logspace(-3, 3, 30), [0.0], np.logspace(-3, 3, 30)])
    return (re[:, None] + 1j * im[None, :]).ravel()


def test_right_half_plane_matches_scipy():
    z = _grid(0.5, 30.0)
    ours, ref = loggamma(z), sps.loggamma(z)
    assert np.max(np.abs(ours - ref) / np.maximum(1.0, np.abs(ref))) < 1e-12


def test_left_half_plane_via_reflection():
    z = _grid(-9.7, 0.45)
    z = z[np.abs(z - np.round(z.real)) > 1e-3]
    ours, ref = loggamma(z), sps.loggamma(z)
    # exp of the difference: the branch of the imaginary part is irrelevant here
    diff = np.abs(np.expm1(ours - ref))
    assert np.max(diff / np.maximum(1.0, np.abs(ref))) < 1e-12


def test_large_imaginary_part_stays_finite():
    z = np.array([0.5 + 1e4j, -3.5 - 2e3j])
    val = loggamma(z)
    assert np.all(np.isfinite(val))
    assert np.allclose(val.real, sps.loggamma(z).real, rtol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_integers_give_factorials(n):
    assert loggamma(complex(n)).real == pytest.approx(np.log(float(np.prod(np.arange(1, n)))), abs=1e-13)


def test_gamma_ratio_shift_identity():
    z = np.array([0.7 + 2j, 3 - 1j, 12 + 40j])
    assert np.allclose(gamma_ratio(z + 1, z), z, rtol=1e-12)
