import numpy as np
import scipy.linalg

from holonomy_lab.matexp import expm_stack


def test_matches_scipy_small_norm():
    rng = np.random.default_rng(0)
    a = 0.05 * (rng.standard_normal((200, 2, 2))
                + 1j * rng.standard_normal((200, 2, 2)))
    ref = np.array([scipy.linalg.expm(m) for m in a])
    err = np.abs(expm_stack(a) - ref).max() / np.abs(ref).max()
    assert err < 1e-13


def test_matches_scipy_large_norm_triggers_scaling():
    rng = np.random.default_rng(1)
    a = 3.0 * (rng.standard_normal((50, 3, 3))
               + 1j * rng.standard_normal((50, 3, 3)))
    ref = np.array([scipy.linalg.expm(m) for m in a])
    err = max(np.linalg.norm(expm_stack(a)[i] - ref[i]) / np.linalg.norm(ref[i])
              for i in range(len(a)))
    assert err < 1e-12


def test_scalar_case_uses_exp():
    a = np.array([[[0.3 + 1.2j]], [[-2.0 - 0.5j]]])
    np.testing.assert_allclose(expm_stack(a), np.exp(a), rtol=1e-15)


def test_anti_hermitian_gives_unitary():
    rng = np.random.default_rng(2)
    g = rng.standard_normal((100, 2, 2)) + 1j * rng.standard_normal((100, 2, 2))
    a = 0.5 * (g - np.conj(np.swapaxes(g, 1, 2)))
    u = expm_stack(a)
    defect = u @ np.conj(np.swapaxes(u, 1, 2)) - np.eye(2)
    assert np.abs(defect).max() < 1e-13
