import numpy as np
import pytest

from fracuc.fracops import fracdiff
from fracuc.gausscov import ThetaParams
from fracuc.mc import McDesign, rep_seed, run_cell, run_study, simulate_dgp, table_header, table_rows


def test_design_cells_order_and_validation():
    design = McDesign(d0_values=(0.75, 1.25), rho_values=(1.0,), n_values=(100, 200))
    assert design.cells() == [(100, 1.0, 0.75), (100, 1.0, 1.25), (200, 1.0, 0.75),
                              (200, 1.0, 1.25)]
    with pytest.raises(ValueError):
        McDesign(replications=0)
    with pytest.raises(ValueError):
        McDesign(n_values=())


def test_dgp_structure():
    th = ThetaParams(1.25, 2.0, 1.0)
    y, x = simulate_dgp(th, 200, 1)
    eta = fracdiff(x, 1.25)
    assert np.var(eta) == pytest.approx(2.0, rel=0.3)
    assert np.var(y - x) == pytest.approx(1.0, rel=0.3)


def test_seeds_independent_of_order():
    a = rep_seed(0, 100, 1.0, 1.25, 3).generate_state(4)
    b = rep_seed(0, 100, 1.0, 1.25, 3).generate_state(4)
    c = rep_seed(0, 100, 1.0, 1.25, 4).generate_state(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_cell_is_deterministic_and_tabulates():
    design = McDesign(replications=3, seed=5, bandwidth_exponents=(0.5, 0.65))
    r1 = run_cell(100, 1.0, 1.25, design)
    r2 = run_study(design, [(100, 1.0, 1.25)])[0]
    assert r1 == r2
    assert r1.replications == 3 and not r1.failed
    assert 0 < r1.r2_x <= 1
    header = table_header((0.5, 0.65))
    rows = table_rows([r1])
    assert len(rows[0]) == len(header)
    assert header[4:6] == ["mse_d_elw_0.50", "mse_d_elw_0.65"]
