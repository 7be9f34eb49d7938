import math

import numpy as np
import pytest

import rbmcert

R_EX = np.array([[1.0, 0.5], [0.5, 1.0]])
Q_EX = np.array([[1.0, -0.6], [-0.6, 1.0]])
MU_EX = np.array([-1.0, -1.0])


def example_spec():
    return rbmcert.SrbmSpec(rbmcert.PolyhedralCone.orthant(2), R_EX, MU_EX, np.eye(2))


def test_matrix_classes():
    rep = rbmcert.classify(R_EX)
    assert rep["completely_s"]["value"]
    assert not rep["reflection_nonsingular_m"]
    assert rbmcert.is_z_matrix(Q_EX @ R_EX)
    assert rbmcert.is_strictly_copositive(Q_EX)
    assert not rbmcert.is_s_matrix(-np.eye(2))
    with pytest.raises(rbmcert.CapabilityError):
        rbmcert.classify(np.eye(25))


def test_certificate():
    spec = example_spec()
    out = rbmcert.certify(spec, Q_EX)
    assert out["certificate"]["Lambda"] > 0
    assert out["conditions"]["all_hold"]
    lam, argmin = rbmcert.compute_lambda_max(spec, Q_EX)
    assert lam == pytest.approx(out["certificate"]["Lambda"])
    assert np.linalg.norm(argmin) == pytest.approx(1.0)
    bad = rbmcert.certify(rbmcert.SrbmSpec(rbmcert.PolyhedralCone.orthant(2), R_EX, np.zeros(2), np.eye(2)), Q_EX)
    assert bad["certificate"] is None
    assert "(iii)" in bad["failure"]


def test_u_and_v_derivatives():
    x = np.array([1.3, 0.4])
    u, g, h = rbmcert.u_eval(Q_EX, x)
    assert u == pytest.approx(math.sqrt(x @ Q_EX @ x))
    eps = 1e-6
    fd = [(rbmcert.u_eval(Q_EX, x + eps * e)[0] - rbmcert.u_eval(Q_EX, x - eps * e)[0]) / (2 * eps) for e in np.eye(2)]
    assert np.allclose(g, fd, rtol=1e-7)
    v, _, _ = rbmcert.v_eval(Q_EX, 0.3, 5 * x)
    assert v > 1.0
    with pytest.raises(rbmcert.DomainError):
        rbmcert.u_eval(Q_EX, np.zeros(2))


def test_skorohod_and_simulation():
    x = -np.arange(5.0).reshape(1, 5)
    z, l = rbmcert.skorohod_solve_orthant(np.eye(1), x)
    assert np.all(z == 0.0)
    assert np.allclose(l, np.arange(5.0))
    one = rbmcert.SrbmSpec(rbmcert.PolyhedralCone.orthant(1), np.eye(1), np.array([-1.0]), np.array([[2.0]]))
    samples, ok, warnings = rbmcert.sample_stationary(one, steps=200000, seed=3)
    assert ok and not warnings
    assert abs(samples.mean() - 1.0) < 0.15
    rate, se = rbmcert.fit_tail_rate(list(np.abs(samples[0])))
    assert abs(rate - 1.0) < 0.2


def test_particles():
    st = rbmcert.stability_check([2.0, 1.0, 0.0], [1.0, 1.0, 1.0])
    assert st["stable"]
    assert st["rho0"] == pytest.approx(2.0 / (27.0 * math.pi ** 2))
    r, mu, a = rbmcert.gap_system([2.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.5, 0.3, 0.3])
    assert np.allclose(r, [[1.0, -0.7], [-0.3, 1.0]])
    ev, inv = rbmcert.r_spectrum(5)
    assert np.allclose(ev, np.linalg.eigvalsh(r_sym(5)))
    val, _ = rbmcert.minimize_quadratic_on_simplex(np.linalg.inv(r_sym(6)))
    assert val == pytest.approx(1.0, abs=1e-6)


def r_sym(n):
    return np.eye(n - 1) - 0.5 * (np.eye(n - 1, k=1) + np.eye(n - 1, k=-1))


def test_philox_known_answer():
    assert rbmcert.philox4x32([0, 0, 0, 0], [0, 0]) == [0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8]


def test_command_layer():
    assert "tailcheck" in rbmcert.command_names()
    code, result, summary = rbmcert.run_command(
        "certify", {"R": R_EX.tolist(), "mu": [-1, -1], "A": [[1, 0], [0, 1]], "Q": Q_EX.tolist()}
    )
    assert code == 0
    assert result["certificate"]["rho_max"] > 0
    assert summary
    with pytest.raises(rbmcert.InputError):
        rbmcert.run_command("certify", {"unknown": 1})
