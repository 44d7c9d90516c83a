import math

import pytest

import lifshitz_lab as ll


def test_lattice_constant():
    assert ll.lattice_constant() == pytest.approx(0.5054620197, abs=1e-9)


def test_self_energy_round_trip():
    ctx = ll.context_from_estar(0.3, 0.2)
    assert ctx.fixed_point_residual() < 1e-12
    back = ll.solve_self_energy(ctx.energy, 0.2)
    assert back.estar == pytest.approx(0.3, abs=1e-10)


def test_green_decay():
    estar = 0.1
    g20 = ll.green_free(20, 0, 0, estar)
    g40 = ll.green_free(40, 0, 0, estar)
    rate = math.log(g20 * 20 / (g40 * 40)) / 20
    assert rate == pytest.approx(ll.axis_decay_rate(estar), rel=2e-2)


def test_pairings_and_terms():
    p = ll.gate_free_pairings(2)
    assert len(p) == 2
    assert all(ll.superficially_convergent(s, 2) for s in p)
    assert len(ll.expansion_terms(2)) == 5


def test_run_command(tmp_path):
    res = ll.run_command("selfenergy", {"points": "3"}, str(tmp_path))
    assert res["exit_code"] == 0
    assert (tmp_path / "manifest.json").exists()
    with pytest.raises(ll.ConfigError):
        ll.run_command("selfenergy", {"bogus": "1"}, str(tmp_path))
