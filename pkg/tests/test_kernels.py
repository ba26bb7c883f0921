import numpy as np
import pytest

import switchfit as sf
from switchfit import kernels
from switchfit.filters import init_filter

from conftest import make_instance


def run_with(backend_name, model, series):
    backend = kernels.get_backend(backend_name)
    state = init_filter(model, series.initial_window())
    scales = np.empty(series.t_emissions)
    q_trace = np.empty((series.t_emissions, model.n_regimes))
    log_inc, status = backend.run_filter(
        state.data,
        model.transition,
        model.coeff_matrix,
        model.sigmas,
        state.lag,
        np.ascontiguousarray(series.emissions),
        scales,
        q_trace,
    )
    assert status == -1
    return state.data, log_inc, scales, q_trace


def test_python_backend_always_available():
    assert "py" in kernels.available_backends()
    assert kernels.get_backend("py").IS_COMPILED is False


def test_unknown_backend_rejected():
    with pytest.raises(ValueError, match="unknown kernel backend"):
        kernels.get_backend("fortran")


def test_env_override_selects_python(monkeypatch):
    monkeypatch.setenv("SWITCHFIT_KERNEL", "py")
    assert kernels.get_backend().IS_COMPILED is False


@pytest.mark.skipif("c" not in kernels.available_backends(), reason="extension not built")
@pytest.mark.parametrize("n,p,t", [(1, 0, 50), (2, 1, 200), (4, 3, 300), (3, 2, 120)])
def test_backend_parity(n, p, t):
    """Both kernels run the same recursion; outputs may differ only by
    floating-point association."""
    model, series = make_instance(100 + n + p, n, p, t)
    data_py, log_py, scales_py, q_py = run_with("py", model, series)
    data_c, log_c, scales_c, q_c = run_with("c", model, series)
    np.testing.assert_allclose(data_c, data_py, rtol=1e-9, atol=1e-12)
    assert log_c == pytest.approx(log_py, rel=1e-12, abs=1e-10)
    np.testing.assert_allclose(scales_c, scales_py, rtol=1e-10)
    np.testing.assert_allclose(q_c, q_py, rtol=1e-9, atol=1e-13)


@pytest.mark.skipif("c" not in kernels.available_backends(), reason="extension not built")
def test_full_pipeline_invariant_to_backend(monkeypatch):
    model, series = make_instance(42, n=2, p=1, t=400)
    results = {}
    for name in ("py", "c"):
        monkeypatch.setenv("SWITCHFIT_KERNEL", name)
        stats, ll = sf.e_step(model, series)
        results[name] = (stats, ll)
    s_py, ll_py = results["py"]
    s_c, ll_c = results["c"]
    assert ll_c == pytest.approx(ll_py, rel=1e-12)
    for name, arr in s_c.families().items():
        np.testing.assert_allclose(arr, s_py.families()[name], rtol=1e-9, atol=1e-12)
