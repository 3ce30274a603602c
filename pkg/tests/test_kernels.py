import os
import subprocess
import sys

import numpy as np
import pytest

from lhvprobe import _jit
from lhvprobe._fused import MARGINALS, admixture_threshold
from lhvprobe.lhv import critical_admixture, marginal_matrix
from lhvprobe.measurements import _su3_kernel, haar_random_settings
from lhvprobe.states import CANONICAL_ANGLES, bound_entangled_state, canonical_psi

needs_numba = pytest.mark.skipif(not _jit.NUMBA_AVAILABLE, reason="numba not installed")


def test_fused_marginals_match():
    assert np.array_equal(MARGINALS, marginal_matrix())


@needs_numba
def test_su3_paths_agree():
    rng = np.random.default_rng(0)
    for _ in range(50):
        phi = rng.uniform(-7, 7, 8)
        assert np.max(np.abs(_su3_kernel.py(phi) - _su3_kernel.jit(phi))) <= 1e-14


@needs_numba
def test_fused_threshold_paths_agree():
    rho = np.ascontiguousarray(bound_entangled_state().matrix, dtype=complex)
    mix = np.ascontiguousarray(canonical_psi().projector())
    for seed in range(10):
        angles = haar_random_settings(seed).as_array()
        s1, f1, x1 = admixture_threshold.py(angles, rho, mix, MARGINALS, 20_000)
        s2, f2, x2 = admixture_threshold.jit(angles, rho, mix, MARGINALS, 20_000)
        assert s1 == s2 == 0
        assert abs(f1 - f2) <= 1e-12


def test_fused_threshold_matches_modular_path():
    rho = np.ascontiguousarray(bound_entangled_state().matrix, dtype=complex)
    mix = np.ascontiguousarray(canonical_psi().projector())
    for seed in range(10):
        settings = haar_random_settings(seed)
        status, value, _ = admixture_threshold(settings.as_array(), rho, mix, MARGINALS, 20_000)
        assert status == 0
        assert value == pytest.approx(critical_admixture(settings, CANONICAL_ANGLES).value, abs=1e-10)


def test_environment_flag_disables_compilation():
    code = "from lhvprobe import _jit; print(_jit.JIT_ENABLED)"
    env = dict(os.environ, LHVPROBE_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


def test_interpreted_path_end_to_end():
    code = (
        "from lhvprobe.lhv import critical_admixture;"
        "from lhvprobe.measurements import haar_random_settings;"
        "from lhvprobe.states import CANONICAL_ANGLES;"
        "print(repr(critical_admixture(haar_random_settings(5), CANONICAL_ANGLES).value))"
    )
    env = dict(os.environ, LHVPROBE_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) == pytest.approx(critical_admixture(haar_random_settings(5), CANONICAL_ANGLES).value, abs=1e-10)
