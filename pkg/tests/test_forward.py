import numpy as np
import pytest

from oracles import naive_forward, naive_forward_general

from fibercap import forward
from fibercap.channel import DEFAULT_PARAMS, simulate
from fibercap.forward import (ForwardRecursion, PowerClasses, available_backends,
                              forward_log_lambdas)
from fibercap.quantize import QuantizedDistribution, quantized_complex_gaussian

BACKENDS = available_backends()


def small_case(params, n=40, seed=3):
    d = quantized_complex_gaussian(5e-4, 4, 1e-2).trim(1e-4)
    x = d.sample(n + params.memory, seed)
    y = simulate(x, params, seed + 2, n=n).y
    return d, y


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("eta", [0.0, 7244.0])
def test_matches_naive_recursion(backend, eta):
    params = DEFAULT_PARAMS.replace(eta=eta)
    d, y = small_case(params)
    ref = naive_forward(y, d, params)
    out = forward_log_lambdas(y, PowerClasses.build(d, params), backend)
    assert np.max(np.abs(out - ref)) < 1e-12


@pytest.mark.parametrize("memory", [0, 2])
def test_general_memory_matches_naive(memory):
    params = DEFAULT_PARAMS.replace(memory=memory)
    d = quantized_complex_gaussian(5e-4, 3, 1e-2).trim(1e-3)
    x = d.sample(25 + memory, 1)
    y = simulate(x, params, 2, n=25).y
    ref = naive_forward_general(y, d, params)
    out = forward_log_lambdas(y, PowerClasses.build(d, params), "python")
    assert np.max(np.abs(out - ref)) < 1e-12


def test_backends_agree_on_larger_alphabet():
    if "cython" not in BACKENDS:
        pytest.skip("compiled kernel not built")
    d = quantized_complex_gaussian(6e-4, 10, 1e-5).trim(1e-12)
    x = d.sample(301, 9)
    y = simulate(x, DEFAULT_PARAMS, 10, n=300).y
    c = PowerClasses.build(d, DEFAULT_PARAMS)
    a = forward_log_lambdas(y, c, "cython")
    b = forward_log_lambdas(y, c, "python")
    assert np.max(np.abs(a - b)) < 1e-10


def test_message_normalised_every_step():
    d, y = small_case(DEFAULT_PARAMS, n=30)
    rec = ForwardRecursion(PowerClasses.build(d, DEFAULT_PARAMS))
    total = 0.0
    for k, v in enumerate(y):
        total += rec.step(v)
        assert rec.state.message.sum() == pytest.approx(1.0, abs=1e-13)
        assert np.all(rec.state.message >= 0)
        assert rec.state.step == k + 1
    assert rec.state.log_scale_sum == pytest.approx(total)


def test_power_classes_merge_equal_powers():
    atoms = np.array([1, -1, 1j, -1j, 0.5, 0.0]) * 0.01
    probs = np.array([0.1, 0.1, 0.1, 0.1, 0.2, 0.4])
    c = PowerClasses.build(QuantizedDistribution(atoms, probs), DEFAULT_PARAMS)
    assert c.n_classes == 3
    assert np.allclose(c.weights, [0.4, 0.2, 0.4])
    # u indexes sums of two neighbour powers, including the padding class
    assert c.uidx.shape == (4, 4)


def test_table_guard():
    d = quantized_complex_gaussian(5e-4, 20, 1e-5)
    with pytest.raises(ValueError, match="message table"):
        PowerClasses.build(d, DEFAULT_PARAMS.replace(memory=3))


def test_single_atom_is_exact():
    a = 0.02 + 0.01j
    d = QuantizedDistribution.point(a)
    x = np.full(101, a)
    y = simulate(x, DEFAULT_PARAMS, 0).y
    out = forward_log_lambdas(y, PowerClasses.build(d, DEFAULT_PARAMS))
    # only the true input is possible, so lambda_k is the channel density itself
    v = DEFAULT_PARAMS.sigma_a2 + DEFAULT_PARAMS.eta * np.abs(a) ** 6
    s_first = DEFAULT_PARAMS.sigma_a2 + DEFAULT_PARAMS.eta * (2 * abs(a) ** 2 / 3) ** 3
    ref = -np.abs(y - a) ** 2 / v - np.log(np.pi * v)
    ref[0] = -abs(y[0] - a) ** 2 / s_first - np.log(np.pi * s_first)
    assert np.allclose(out, ref, rtol=1e-12)


def test_fallback_when_extension_missing(monkeypatch):
    d, y = small_case(DEFAULT_PARAMS, n=10)
    c = PowerClasses.build(d, DEFAULT_PARAMS)
    ref = forward_log_lambdas(y, c, "python")
    monkeypatch.setattr(forward, "_forward_ext", None)
    assert np.array_equal(forward_log_lambdas(y, c), ref)
    with pytest.raises(RuntimeError):
        forward_log_lambdas(y, c, "cython")
    with pytest.raises(ValueError):
        forward_log_lambdas(y, c, "fortran")


def test_far_outputs_stay_finite():
    # a plain-domain recursion would underflow to zero here
    d = QuantizedDistribution(np.array([0.0, 0.01]), np.array([0.5, 0.5]))
    c = PowerClasses.build(d, DEFAULT_PARAMS.replace(eta=0.0))
    y = np.array([0.0, 1.0 + 0j, 0.005])
    for backend in BACKENDS:
        out = forward_log_lambdas(y, c, backend)
        assert np.all(np.isfinite(out))
        assert out[1] < -1e4
    with pytest.raises(ValueError):
        forward_log_lambdas(np.array([0.0, np.inf]), c)
