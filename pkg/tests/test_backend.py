import os
import subprocess
import sys

import pytest

from mrcarray import _backend


def _selected(env_value):
    env = {k: v for k, v in os.environ.items() if k != "MRCARRAY_PURE_PYTHON"}
    if env_value is not None:
        env["MRCARRAY_PURE_PYTHON"] = env_value
    out = subprocess.run(
        [sys.executable, "-c", "from mrcarray import _backend; print(_backend.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    return out.stdout.strip()


def test_fallback_is_always_available():
    assert "python" in _backend.KERNELS
    assert _backend.get_kernel("python") is _backend.KERNELS["python"]


def test_env_var_forces_python():
    assert _selected("1") == "python"


@pytest.mark.skipif("cython" not in _backend.KERNELS, reason="extension not built")
def test_compiled_kernel_is_default_when_built():
    assert _selected(None) == "cython"
