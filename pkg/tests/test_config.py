import json

import pytest
from hypothesis import given, strategies as st

from stackthermal.config import RunConfig, config_to_dict, emit_config, parse_config
from stackthermal.errors import ConfigError

MINIMAL = {"footprint_mm": [24, 24], "interposer": {"material": "hbn", "thickness_um": 300},
           "hbm": {"total": 20, "per_layer": 5}, "gpu": {"tdp_w": 256}}


def test_minimal_config_fills_defaults():
    cfg = parse_config(json.dumps(MINIMAL))
    s = cfg.stack
    assert s.footprint_x == pytest.approx(24e-3)
    assert s.interposer_thickness == pytest.approx(300e-6)
    assert s.hbm.n_layers == 4
    assert s.gpu_total_power == 256.0
    assert s.h_bottom == 10.0 and 150 <= s.h_top <= 350
    assert cfg.sweep is None
    assert cfg.solver.rel_tol == 1e-8


def test_non_divisor_rejected():
    data = dict(MINIMAL, hbm={"total": 20, "per_layer": 6})
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(data))
    assert err.value.key == "hbm.per_layer"


def test_unknown_key_named():
    data = dict(MINIMAL, thiccness=3)
    with pytest.raises(ConfigError, match="thiccness") as err:
        parse_config(json.dumps(data))
    assert err.value.key == "thiccness"
    data = dict(MINIMAL, interposer={"material": "hbn", "thiccness_um": 3})
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(data))
    assert err.value.key == "interposer.thiccness_um"


def test_syntax_error_has_position():
    with pytest.raises(ConfigError) as err:
        parse_config('{\n  "footprint_mm": [24, 24],\n  "gpu": {"tdp_w": }\n}')
    assert err.value.line == 3
    assert err.value.column is not None


@pytest.mark.parametrize("text, key", [
    ('{"gpu": {"tdp_w": 1, "power_density_w_cm2": 2}}', "gpu.tdp_w"),
    ('{"interposer": {"material": "unobtainium"}}', "interposer.material"),
    ('{"interposer": {"thickness_um": "thick"}}', "interposer.thickness_um"),
    ('{"materials": {"hbn": {"k": 10, "k_zz": 2}}}', "materials.hbn.k"),
    ('{"materials": {"diamond": {"k": 2000}}}', "materials.diamond"),
    ('{"materials": {"hbn": {"k_zz": -2}}}', "materials.hbn.k_zz"),
    ('{"sweep": {"thicknesses_um": "all"}}', "sweep.thicknesses_um"),
])
def test_semantic_errors_name_key(text, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.key == key


def test_not_an_object():
    with pytest.raises(ConfigError):
        parse_config("[1, 2]")


def test_material_override_applies():
    cfg = parse_config('{"materials": {"hbn": {"k_zz": 2}}}')
    assert cfg.library()["hbn"].k_zz == 2.0
    assert cfg.library()["hbn"].k_xx == 751.0


def test_sweep_section():
    cfg = parse_config('{"sweep": {"family": "interposer_thickness", "thicknesses_um": [300, 50],'
                       ' "parallelism": 2}, "grid": {"cell_um": 500}}')
    assert cfg.sweep.thicknesses == pytest.approx((300e-6, 50e-6))
    assert cfg.sweep.parallelism == 2
    assert cfg.sweep.grid.target_cell == pytest.approx(500e-6)


def test_roundtrip_default():
    cfg = RunConfig()
    assert parse_config(emit_config(cfg)) == cfg


thick_um = st.floats(1.0, 2000.0, allow_nan=False)


@given(interposer=thick_um, hbm=thick_um, per_layer=st.sampled_from([1, 2, 4, 5, 10, 20]),
       h_top=st.floats(150, 350), tdp=st.floats(1.0, 1000.0), mat=st.sampled_from(["hbn", "silicon"]),
       cell=st.floats(100.0, 1000.0), dt=st.floats(1e-3, 1.0), k_zz=st.floats(2.0, 20.0),
       family=st.sampled_from(["hbm_distribution", "interposer_thickness", "tdp_transient"]),
       thicknesses=st.lists(thick_um, min_size=1, max_size=4))
def test_roundtrip_property(interposer, hbm, per_layer, h_top, tdp, mat, cell, dt, k_zz, family, thicknesses):
    data = {"interposer": {"material": mat, "thickness_um": interposer},
            "hbm": {"total": 20, "per_layer": per_layer, "thickness_um": hbm},
            "gpu": {"tdp_w": tdp}, "boundary": {"h_top": h_top},
            "grid": {"cell_um": cell}, "transient": {"dt_s": dt, "t_end_s": 30.0},
            "materials": {"hbn": {"k_zz": k_zz}},
            "sweep": {"family": family, "thicknesses_um": thicknesses}}
    cfg = parse_config(json.dumps(data))
    again = parse_config(emit_config(cfg))
    assert again == cfg
    assert config_to_dict(again) == config_to_dict(cfg)
