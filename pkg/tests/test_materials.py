import math

import pytest
from hypothesis import given, strategies as st

from stackthermal.materials import Material, builtin_library, effective_tsv_medium

lib = builtin_library()


def test_hbn_table_values():
    hbn = lib.get("hbn")
    assert hbn.k_xx == 751.0
    assert hbn.k_yy == 751.0
    assert hbn.k_zz == 20.0
    assert hbn.cp == 800.0


def test_silicon_isotropic():
    si = lib.get("silicon")
    assert si.k_xx == si.k_zz == si.k_yy == 140.0
    assert si.is_isotropic


def test_defaults_for_auxiliary_materials():
    expected = {"copper": (400, 385, 8960), "tim": (5, 1000, 2500), "mold": (1.0, 900, 1900),
                "organic_substrate": (0.5, 1000, 1850)}
    for name, (k, cp, rho) in expected.items():
        m = lib[name]
        assert (m.k_xx, m.cp, m.density) == (k, cp, rho)


def test_every_builtin_is_valid():
    for name in lib:
        m = lib[name]
        assert m.name == name
        assert min(m.k_xx, m.k_yy, m.k_zz, m.density, m.cp) > 0


def test_unknown_material():
    with pytest.raises(KeyError, match="unobtainium"):
        lib["unobtainium"]
    with pytest.raises(KeyError):
        lib.get("unobtainium")
    assert lib.get("unobtainium", "fallback") == "fallback"


@pytest.mark.parametrize("field", ["k_xx", "density", "cp"])
def test_material_rejects_nonpositive(field):
    kwargs = dict(name="x", k_xx=1.0, k_yy=1.0, k_zz=1.0, density=1.0, cp=1.0)
    kwargs[field] = 0.0
    with pytest.raises(ValueError):
        Material(**kwargs)


def test_overrides_do_not_mutate():
    new = lib.with_overrides({"hbn": {"k_zz": 2.0}, "diamond": {"k": 2000, "density": 3500, "cp": 500}})
    assert new["hbn"].k_zz == 2.0
    assert lib["hbn"].k_zz == 20.0
    assert new["diamond"].k_yy == 2000
    with pytest.raises(TypeError):
        lib.with_overrides({"unknown": {"k": 1.0}})


def test_tsv_endpoints():
    si, cu = lib["silicon"], lib["copper"]
    assert effective_tsv_medium(si, cu, 0.0) is si
    assert effective_tsv_medium(si, cu, 1.0) is cu


def test_tsv_parallel_rule_hand_value():
    eff = effective_tsv_medium(lib["silicon"], lib["copper"], 0.1)
    assert eff.k_zz == pytest.approx(166.0, rel=1e-12)


def test_tsv_heat_capacity_volume_average():
    si, cu = lib["silicon"], lib["copper"]
    eff = effective_tsv_medium(si, cu, 0.25)
    expected = 0.25 * cu.volumetric_heat_capacity + 0.75 * si.volumetric_heat_capacity
    assert eff.volumetric_heat_capacity == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("phi", [-0.01, 1.01, math.nan])
def test_tsv_fraction_domain(phi):
    with pytest.raises(ValueError):
        effective_tsv_medium(lib["silicon"], lib["copper"], phi)


conductivity = st.floats(0.1, 2000.0)


@given(k_m=conductivity, k_v=conductivity, phi=st.floats(0.0, 1.0))
def test_tsv_bounds(k_m, k_v, phi):
    m = Material("m", k_m, k_m, k_m / 3, 1000.0, 500.0)
    v = Material.isotropic("v", k_v, 8000.0, 400.0)
    eff = effective_tsv_medium(m, v, phi)
    for axis in range(3):
        lo = min(m.conductivity(axis), v.conductivity(axis))
        hi = max(m.conductivity(axis), v.conductivity(axis))
        assert lo * (1 - 1e-12) <= eff.conductivity(axis) <= hi * (1 + 1e-12)


@given(k_m=st.floats(0.1, 500.0), ratio=st.floats(1.01, 100.0),
       a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0))
def test_tsv_monotone_in_fraction(k_m, ratio, a, b):
    lo, hi = sorted((a, b))
    m = Material.isotropic("m", k_m, 1000.0, 500.0)
    v = Material.isotropic("v", k_m * ratio, 8000.0, 400.0)
    e_lo, e_hi = effective_tsv_medium(m, v, lo), effective_tsv_medium(m, v, hi)
    for axis in range(3):
        assert e_lo.conductivity(axis) <= e_hi.conductivity(axis) * (1 + 1e-12)
