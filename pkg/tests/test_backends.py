"""Cross-checks between the compiled kernels and the numpy fallback."""

import subprocess
import sys

import numpy as np
import pytest

from construal_irl import backend

from conftest import random_mdp

pytestmark = pytest.mark.skipif(
    "compiled" not in backend.available_backends(),
    reason="compiled kernels not built",
)


def _kernel_pair(name):
    backends = backend.available_backends()
    return getattr(backends["python"], name), getattr(backends["compiled"], name)


def test_backend_name_reports_active():
    assert backend.backend_name() in backend.available_backends()


def test_hard_kernels_agree():
    py_kernel, cy_kernel = _kernel_pair("hard_value_iteration")
    for seed in range(15):
        mdp = random_mdp(np.random.default_rng(seed), n_states=7, n_actions=4, gamma=0.9)
        v0 = np.zeros(mdp.n_states)
        py = py_kernel(mdp.dynamics, mdp.reward, mdp.discount, 1e-10, 100_000, v0)
        cy = cy_kernel(mdp.dynamics, mdp.reward, mdp.discount, 1e-10, 100_000, v0)
        assert py[2] == cy[2]
        assert np.allclose(py[0], cy[0], atol=1e-13)
        assert np.allclose(py[1], cy[1], atol=1e-13)
        assert np.allclose(py[3], cy[3], atol=1e-13)


def test_soft_kernels_agree():
    py_kernel, cy_kernel = _kernel_pair("soft_value_iteration")
    for seed in range(15):
        mdp = random_mdp(np.random.default_rng(50 + seed), n_states=7, n_actions=4, gamma=0.9)
        v0 = np.zeros(mdp.n_states)
        for beta in (0.5, 0.1, 1e-3):
            py = py_kernel(mdp.dynamics, mdp.reward, mdp.discount, beta, 1e-10, 100_000, v0)
            cy = cy_kernel(mdp.dynamics, mdp.reward, mdp.discount, beta, 1e-10, 100_000, v0)
            assert py[2] == cy[2]
            assert np.allclose(py[0], cy[0], atol=1e-12)
            assert np.allclose(py[1], cy[1], atol=1e-12)


def test_soft_kernel_survives_sharp_beta():
    # a max shift keeps exp() finite even when Q gaps dwarf beta
    _, cy_kernel = _kernel_pair("soft_value_iteration")
    mdp = random_mdp(np.random.default_rng(99), gamma=0.8)
    v0 = np.zeros(mdp.n_states)
    V, Q, _, _ = cy_kernel(mdp.dynamics, mdp.reward, mdp.discount, 1e-6, 1e-10, 100_000, v0)
    assert np.all(np.isfinite(V))
    assert np.all(np.isfinite(Q))


def _run_with_env(value):
    code = "import construal_irl; print(construal_irl.backend_name())"
    return subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "CONSTRUAL_IRL_BACKEND": value},
    )


def test_env_var_forces_backend():
    for value in ("python", "compiled"):
        proc = _run_with_env(value)
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.strip() == value


def test_env_var_rejects_unknown():
    proc = _run_with_env("fortran")
    assert proc.returncode != 0
    assert "CONSTRUAL_IRL_BACKEND" in proc.stderr
