import math

import numpy as np
import pytest

from radial_ns.errors import QuadratureError, UsageError
from radial_ns.grid import build_grid
from radial_ns.params import ModelParams
from radial_ns.solver import SchemeConfig
from radial_ns.verification import (CONSTANT_CASE, ConvergenceResult, ManufacturedCase, adaptive_quadrature,
                                    convergence_study, fd6, _sources_closed_form, mms_run, mms_sources, mms_sources_fd)


def test_quadrature_examples():
    assert adaptive_quadrature(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert adaptive_quadrature(lambda s: (s * s - 1) / (s * s), 1.0, 2.0, tol=1e-12) == pytest.approx(0.5, abs=1e-10)
    assert adaptive_quadrature(lambda x: x, 1.0, 0.0) == pytest.approx(-0.5, abs=1e-12)
    assert adaptive_quadrature(math.sin, 2.0, 2.0) == 0.0
    # truncated half-line integral of r exp(-r/2)
    val = adaptive_quadrature(lambda r: r * math.exp(-r / 2), 0.0, 120.0, tol=1e-12)
    assert val == pytest.approx(4.0, abs=1e-8)


def test_quadrature_budget_error_carries_estimate():
    with pytest.raises(QuadratureError) as info:
        adaptive_quadrature(lambda x: math.sin(1.0 / x) if x else 0.0, 0.0, 1.0, tol=1e-14, max_evals=2000)
    assert math.isfinite(info.value.estimate)
    with pytest.raises(UsageError):
        adaptive_quadrature(math.exp, 0.0, math.inf)


def test_fd6_is_sixth_order():
    errs = [abs(fd6(np.sin, 1.0, h) - math.cos(1.0)) for h in (0.1, 0.05)]
    assert math.log2(errs[0] / errs[1]) > 5.5


def test_sources_vanish_for_constant_case():
    g = build_grid(32, 6.0, 3)
    s_mass, s_mom = mms_sources(CONSTANT_CASE, g, 0.5, ModelParams(3, 0.7, 1.4))
    assert np.all(s_mass == 0.0) and np.all(s_mom == 0.0)


def test_density_only_source_at_initial_time():
    g = build_grid(32, 6.0, 2)
    case = ManufacturedCase(amplitude=0.1, velocity_amplitude=0.0)
    s_mass, _ = mms_sources(case, g, 0.0, ModelParams(2, 0.7, 1.4))
    np.testing.assert_allclose(s_mass, -0.1 * np.exp(-g.r**2), rtol=1e-14, atol=0)


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("alpha,gamma,a", [(0.7, 1.4, 1.0), (0.8, 2.0, 2.5), (1.0, 1.1, 0.0)])
def test_closed_form_sources_match_fd_oracle(dim, alpha, gamma, a):
    case = ManufacturedCase()
    p = ModelParams(dim, alpha, gamma, pressure_coeff=a)
    r = np.linspace(0.2, 4.0, 60)
    for t in (0.1, 0.7, 2.0):
        cm, cu = _sources_closed_form(case, r, t, p, dim)
        fm, fu = mms_sources_fd(case, r, t, p, dim)
        assert np.abs(cm - fm).max() < 1e-7
        assert np.abs(cu - fu).max() < 1e-7


def test_time_window():
    g = build_grid(8, 1.0, 2)
    with pytest.raises(UsageError):
        mms_sources(ManufacturedCase(), g, -0.1, ModelParams(2, 0.7, 1.4))
    with pytest.raises(UsageError):
        ManufacturedCase(amplitude=-0.6)


def test_constant_case_reports_exact():
    p = ModelParams(3, 0.7, 1.4)
    res = convergence_study(CONSTANT_CASE, p, SchemeConfig(), (16, 32, 64), r_max=4.0, t_end=0.05)
    assert res.exact and res.passes()
    assert "# fitted_order,exact" in res.to_csv()


def test_grid_sizes_must_double():
    p = ModelParams(3, 0.7, 1.4)
    for sizes in ((16, 32, 48), (16, 32)):
        with pytest.raises(UsageError):
            convergence_study(CONSTANT_CASE, p, SchemeConfig(), sizes)


def test_mms_run_error_decreases():
    p = ModelParams(2, 0.8, 1.4)
    case = ManufacturedCase()
    errs = []
    for n in (32, 64):
        g, s = mms_run(case, p, SchemeConfig(), n, t_end=0.1)
        errs.append(np.abs(s.rho - case.rho(g.r, 0.1)).max())
    assert errs[1] < errs[0]


def test_convergence_result_flags_and_csv():
    res = ConvergenceResult("upwind1", [64, 128, 256], [0.1, 0.05, 0.025], [4e-3, 2e-3, 3e-3],
                            [4e-3, 2e-3, 1e-3], 1.0, 1.0)
    assert res.pair_orders(res.err_u)[1:] == pytest.approx([1.0, 1.0])
    res.reliable = False
    assert not res.passes()
    lines = res.to_csv().splitlines()
    assert lines[0] == "n_cells,dr,err_rho,err_u,order_rho,order_u"
    assert lines[1].startswith("64,0.10000000000000001,")
    assert lines[-1] == "# reliable,false"

