import math

import numpy as np
import pytest

import gasnetsim as gn
from gasnetsim.gas import EffortField, PipeField


def test_sound_speed_benchmark_parameters():
    gas = gn.GasProperties(530.0, 276.25, 1.0, 1.4)
    assert gn.sound_speed(gas) == pytest.approx(math.sqrt(530.0 * 276.25), rel=1e-14)
    assert gn.sound_speed(gas) == pytest.approx(382.64, rel=1e-4)
    assert gas.c2 == pytest.approx(146412.5, rel=1e-14)


def test_sound_speed_unit_parameters():
    assert gn.sound_speed(gn.GasProperties(1.0, 1.0, 1.0, 1.4)) == 1.0


def test_sound_speed_compressibility_scaling():
    base = gn.sound_speed(gn.GasProperties(530.0, 276.25, 1.0, 1.4))
    quad = gn.sound_speed(gn.GasProperties(530.0, 276.25, 4.0, 1.4))
    assert quad == pytest.approx(2.0 * base, rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    dict(specific_gas_constant=-1.0, temperature=276.25),
    dict(specific_gas_constant=530.0, temperature=0.0),
    dict(specific_gas_constant=530.0, temperature=276.25, compressibility=-2.0),
    dict(specific_gas_constant=530.0, temperature=276.25, isentropic_exponent=1.0),
])
def test_gas_validation(kwargs):
    with pytest.raises(gn.ConfigurationError):
        gn.GasProperties(**kwargs)


def test_effort_benchmark_pressure():
    gas = gn.GasProperties(530.0, 276.25, 1.0, 1.4)
    fld = PipeField(np.array([54.64, 54.64]), np.array([0.0, 0.0]))
    e = gn.effort(fld, gas)
    assert isinstance(e, EffortField)
    assert e.p[0] == pytest.approx(8.0e6, rel=1e-4)


def test_effort_is_linear():
    gas = gn.GasProperties(530.0, 276.25, 1.0, 1.4)
    rng = np.random.default_rng(0)
    rho = rng.uniform(10.0, 80.0, 6)
    mom = rng.normal(0.0, 200.0, 6)
    e1 = gn.effort(PipeField(rho, mom), gas)
    e2 = gn.effort(PipeField(2.0 * rho, mom), gas)
    assert np.allclose(e2.p, 2.0 * e1.p, rtol=1e-14)
    assert np.allclose(e2.m, e1.m)
    tiny = gn.effort(PipeField(np.full(3, 1e-12), np.zeros(3)), gas)
    assert np.all(tiny.p < 1e-6)


def test_effort_rejects_nonpositive_density():
    gas = gn.GasProperties(530.0, 276.25, 1.0, 1.4)
    with pytest.raises(gn.StateError):
        gn.effort(PipeField(np.array([1.0, -1.0]), np.zeros(2)), gas)


def test_hamiltonian_trivial_values():
    gas = gn.GasProperties(1.0, 1.0, 1.0, 1.4)
    assert gn.hamiltonian(PipeField(np.zeros(4), np.zeros(4)), gas, 1.0) == 0.0
    assert gn.hamiltonian(PipeField(np.array([1.0]), np.array([0.0])), gas, 1.0) == 0.5


def fd_gradient(gas, rho, mom, dx):
    # central finite differences of H, step 1e-6 * component scale
    n = rho.size
    state = np.concatenate([rho, mom])
    grad = np.empty_like(state)
    for i in range(state.size):
        h = 1e-6 * max(abs(state[i]), 1.0)
        up, dn = state.copy(), state.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (gn.hamiltonian(PipeField(up[:n], up[n:]), gas, dx)
                   - gn.hamiltonian(PipeField(dn[:n], dn[n:]), gas, dx)) / (2.0 * h)
    return grad


def test_hamiltonian_gradient_matches_effort_componentwise():
    # order-one scales keep the FD oracle well conditioned at 1e-6 relative
    gas = gn.GasProperties(1.0, 1.0, 1.0, 1.4)
    rng = np.random.default_rng(7)
    rho = rng.uniform(0.5, 2.0, 5)
    mom = rng.normal(0.0, 1.0, 5)
    e = gn.effort(PipeField(rho, mom), gas)
    expected = 1.7 * np.concatenate([e.p, e.m])
    assert np.allclose(fd_gradient(gas, rho, mom, 1.7), expected, rtol=1e-6)


def test_hamiltonian_gradient_matches_effort_benchmark_scale():
    # at 80 bar scales the density terms dominate H; compare norm-wise
    gas = gn.GasProperties(530.0, 276.25, 1.0, 1.4)
    rng = np.random.default_rng(8)
    rho = rng.uniform(20.0, 80.0, 5)
    mom = rng.normal(0.0, 300.0, 5)
    e = gn.effort(PipeField(rho, mom), gas)
    expected = 11343.75 * np.concatenate([e.p, e.m])
    grad = fd_gradient(gas, rho, mom, 11343.75)
    assert np.abs(grad - expected).max() <= 1e-6 * np.abs(expected).max()


def test_hamiltonian_is_quadratic():
    gas = gn.GasProperties(530.0, 276.25, 1.0, 1.4)
    rng = np.random.default_rng(3)
    rho = rng.uniform(20.0, 80.0, 8)
    mom = rng.normal(0.0, 300.0, 8)
    H1 = gn.hamiltonian(PipeField(rho, mom), gas, 500.0)
    for alpha in (0.5, 2.0, 3.7):
        H = gn.hamiltonian(PipeField(alpha * rho, alpha * mom), gas, 500.0)
        assert H == pytest.approx(alpha ** 2 * H1, rel=1e-12)


def test_pipe_field_length_mismatch():
    with pytest.raises(gn.ConfigurationError):
        PipeField(np.zeros(3), np.zeros(4))
