import json
import math

import pytest

from uvoclab.errors import ConfigurationError, UnknownEventError
from uvoclab.record import EventKind
from uvoclab.scenario_reader import (
    ScenarioReader, check_path, load_design, load_raw, load_scenario, parse_override, scenario_from_dict,
    set_path,
)


def _bundled(scenarios_dir):
    return sorted(p for p in scenarios_dir.glob("*.json") if p.stem != "table2_design")


def test_all_bundled_scenarios_load(scenarios_dir):
    paths = _bundled(scenarios_dir)
    assert len(paths) >= 9
    for path in paths:
        s = load_scenario(path)
        assert s.name == path.stem
        assert s.duration > 0


def test_design_spec_loads(scenarios_dir):
    design = load_design(scenarios_dir / "table2_design.json")
    assert design.spec.delta_V_max == pytest.approx(6.0)
    assert design.plant is not None
    assert design.plant.grid.V_gp == pytest.approx(design.spec.ratings.V_p0)
    assert (design.map.v_points, design.map.w_points) == (21, 21)


def test_per_unit_conversion(scenarios_dir):
    s = load_scenario(scenarios_dir / "fig10_fault_scr5.json")
    r = s.ratings
    assert s.plant.L_a == pytest.approx(0.0778 * r.l_base)
    assert s.plant.grid.L_N == pytest.approx(0.2 * r.l_base)
    assert s.controller.svo.P0 == pytest.approx(5000.0)
    assert s.controller.fault.I_m == pytest.approx(r.i_base_peak)
    assert s.controller.fault.V_T == pytest.approx(0.9 * math.sqrt(2.0) * 120.0)
    sag = s.events[0]
    assert sag.kind is EventKind.GRID_VOLTAGE
    assert sag.value == pytest.approx(0.3 * r.V_p0)


def test_inductive_evi_in_fault_scenario(scenarios_dir):
    s = load_scenario(scenarios_dir / "fig10_fault_scr5.json")
    assert s.controller.evi.R_vir == pytest.approx(0.21)
    assert s.controller.evi.L_vir == pytest.approx(0.001)
    assert s.plant.r_c == pytest.approx(3.0)


def test_default_ocl_resistance(scenarios_dir):
    doc = load_raw(scenarios_dir / "fig10_fault_scr5.json")
    del doc["controller"]["fault"]["R_0"]
    s = scenario_from_dict(doc)
    p = s.plant
    assert s.controller.fault.R_0 == pytest.approx(2 * math.pi * 500 * (p.L_a + p.L_g))


def test_unknown_top_level_key(scenarios_dir):
    doc = load_raw(scenarios_dir / "gfl_q0_step.json")
    doc["bogus"] = 1
    with pytest.raises(ConfigurationError) as info:
        scenario_from_dict(doc)
    assert info.value.context["path"] == "bogus"


def test_unknown_nested_key(scenarios_dir):
    doc = load_raw(scenarios_dir / "gfl_q0_step.json")
    doc["plant"]["L_x"] = 1e-3
    with pytest.raises(ConfigurationError) as info:
        scenario_from_dict(doc)
    assert info.value.context["path"] == "plant.L_x"


def test_per_unit_rejected_for_dimensionless(scenarios_dir):
    doc = load_raw(scenarios_dir / "gfl_q0_step.json")
    doc["controller"]["svo"]["eta"] = {"pu": 1.0}
    with pytest.raises(ConfigurationError):
        scenario_from_dict(doc)


def test_unknown_event_kind(scenarios_dir):
    doc = load_raw(scenarios_dir / "gfl_q0_step.json")
    doc["events"].append({"t": 0.3, "kind": "meteor"})
    with pytest.raises(UnknownEventError):
        scenario_from_dict(doc)


def test_events_sorted_by_time(scenarios_dir):
    doc = load_raw(scenarios_dir / "gfl_q0_step.json")
    doc["events"].insert(0, {"t": 0.5, "kind": "setpoint_p", "value": 1000.0})
    s = scenario_from_dict(doc)
    assert [e.t for e in s.events] == [0.2, 0.5]


def test_overrides(scenarios_dir):
    s = load_scenario(scenarios_dir / "table3_gfm_stiff.json",
                      ["controller.svo.mu=0", "duration=0.2", "controller.evi.R_vir.pu=0.005"])
    assert s.controller.svo.mu == 0.0
    assert s.duration == 0.2
    assert s.controller.evi.R_vir == pytest.approx(0.005 * s.ratings.z_base)


def test_bad_override_path(scenarios_dir):
    with pytest.raises(ConfigurationError):
        load_scenario(scenarios_dir / "gfl_q0_step.json", ["controller.svo.nope=1"])
    with pytest.raises(ConfigurationError):
        check_path("duration.pu")


def test_parse_override():
    assert parse_override("duration=0.5") == ("duration", 0.5)
    assert parse_override("initial.mode=zero") == ("initial.mode", "zero")
    with pytest.raises(ConfigurationError):
        parse_override("duration")


def test_set_path_copies():
    doc = {"plant": {"L_a": 1e-3}}
    out = set_path(doc, "plant.r_a", 0.1)
    assert out["plant"]["r_a"] == 0.1
    assert "r_a" not in doc["plant"]


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_scenario(tmp_path / "absent.json")


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\"name\": ", encoding="utf-8")
    with pytest.raises(ConfigurationError) as info:
        load_scenario(path)
    assert "line" in info.value.context


def test_reader_requires_context(scenarios_dir):
    reader = ScenarioReader(scenarios_dir / "gfl_q0_step.json")
    with pytest.raises(ValueError):
        reader.read()


def test_missing_required_section(tmp_path):
    path = tmp_path / "partial.json"
    path.write_text(json.dumps({"name": "x", "ratings": {"S_rated": 1, "P_rated": 1, "Q_rated": 0, "V0": 1}}),
                    encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_scenario(path)
