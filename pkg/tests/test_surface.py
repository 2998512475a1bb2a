import numpy as np
import pytest

from metrocross.channels import DEPOLARIZING, cptp_conditions_hold
from metrocross.errors import MetrocrossError
from metrocross.optimizer import OptimizerOptions
from metrocross.phase_covariant_surface import (
    admissible_params,
    default_grid,
    eta_perp_choice,
    surface,
    surface_point,
)
from metrocross.strategies import StrategyConfig, evaluate

OPT = OptimizerOptions(n_starts=8)


def test_eta_perp_rule():
    assert np.isclose(eta_perp_choice(0.0, 1.0), np.sqrt(2) / 2)
    assert np.isclose(eta_perp_choice(0.6, 0.4), np.sqrt(1 + 0.16 - 0.36) / 2)


def test_default_grid_shape():
    k, e = default_grid()
    assert k.size == e.size == 41
    assert k[0] == -1 and k[-1] == 1 and e[0] == 0 and e[-1] == 1


@pytest.mark.parametrize("kappa", np.linspace(-1, 1, 9))
@pytest.mark.parametrize("eta_par", np.linspace(0, 1, 9))
def test_admissible_points_are_cptp(kappa, eta_par):
    try:
        p = admissible_params(kappa, eta_par)
    except MetrocrossError:
        assert eta_par + abs(kappa) > 1
        return
    assert cptp_conditions_hold(p.kappa, p.eta_par, p.eta_perp)


def test_noiseless_corner_value():
    point = surface_point(0.0, 1.0, OPT)
    assert point.difference < 0
    assert np.isclose(point.difference, -0.125, atol=1e-6)


def test_isotropic_depolarization_consistency():
    eta_par = 1 / np.sqrt(3)
    point = surface_point(0.0, eta_par, OPT)
    assert np.isclose(point.eta_perp, eta_par)
    eta = 1 - eta_par
    anc = evaluate(StrategyConfig.make("ancilla", 2), DEPOLARIZING, eta, OPT)
    par = evaluate(StrategyConfig.make("parallel", 2), DEPOLARIZING, eta, OPT)
    assert abs(point.difference - (anc.total_qfi - par.total_qfi)) <= 1e-5


@pytest.mark.parametrize("kappa,eta_par", [(0.5, 0.3), (0.3, 0.6), (0.8, 0.1)])
def test_mirror_symmetry(kappa, eta_par):
    a = surface_point(kappa, eta_par, OPT)
    b = surface_point(-kappa, eta_par, OPT)
    assert abs(a.difference - b.difference) <= 1e-6


def test_coarse_surface():
    res = surface(np.linspace(-1, 1, 5), np.linspace(0, 1, 5), OPT)
    assert len(res.points) + len(res.skipped) + len(res.failed) == 25
    assert not res.failed
    m = res.minimum()
    assert (m.kappa, m.eta_par) == (0.0, 1.0)
    assert any(p.difference > 0 for p in res.points)
    # ordering by kappa index, then eta_par index
    keys = [(p.kappa, p.eta_par) for p in res.points]
    assert keys == sorted(keys)
    assert res.lookup(0.0, 1.0) is m
    assert res.lookup(0.123, 0.5) is None
