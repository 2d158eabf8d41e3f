import numpy as np
import pytest

from sfrc import experiments as ex
from sfrc import fem
from sfrc.errors import DomainError


def test_fixed_window_generation():
    g = ex.fixed_window_generation(250)
    assert (g.width, g.height) == (250, 250)
    assert g.clip and g.stop_rule == "nearest"
    assert (g.length, g.diameter, g.orientation) == (260.0, 10.9, 0.0)


@pytest.mark.parametrize("name, sampled", [("fixed", ()), ("length", ("length",)),
                                           ("diameter", ("diameter",)),
                                           ("orientation", ("orientation",))])
def test_single_property_scenarios(name, sampled):
    g = ex.scenario_generation(name, 500)
    assert g.width == 500 and g.clip
    for prop in ("length", "diameter", "orientation"):
        assert (getattr(g, prop) is None) == (prop in sampled)


def test_large_domain_scenarios():
    frac = ex.scenario_generation("fraction", 250)
    every = ex.scenario_generation("all", 250)
    assert frac.width == every.width == ex.LARGE_DOMAIN
    assert not frac.clip and not every.clip
    assert frac.length == 260.0 and every.length is None
    with pytest.raises(DomainError):
        ex.scenario_generation("all", 3000)
    with pytest.raises(DomainError):
        ex.scenario_generation("porosity", 250)


def test_mass_fraction_of_nominal_volume_fraction():
    assert ex.mass_fraction(0.1822) == pytest.approx(0.30, abs=5e-4)


def test_laminate_window():
    g = ex.laminate_window(10, 3)
    assert g[:, 7:].all() and not g[:, :7].any()
    h = ex.laminate_window(10, 3, vertical=False)
    np.testing.assert_array_equal(h, g.T)


def test_summarize_population_std():
    from test_corranalysis import synthetic_table
    t = synthetic_table(R=20)
    s = ex.summarize(t, placement=0)
    z = t.coefficient("11", fem.KUBC, 0)
    assert s[fem.KUBC].get("11") == pytest.approx(z.mean())
    assert s[fem.KUBC].get("11", "std") == pytest.approx(z.std())
    assert s[fem.SUBC].n == 20
    assert s[fem.KUBC].fraction == pytest.approx(0.18)
