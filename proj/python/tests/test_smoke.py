import json
import math
from pathlib import Path

import pytest

import clockreg

FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def test_magic_field():
    b = clockreg.magic_field()
    assert abs(b * 1e6 - 322.9) < 0.5
    s = clockreg.field_sensitivity("working", b) * 1e-6
    assert abs(s - 37.0) < 3.7


def test_storage_resonance_and_labels():
    f = clockreg.transition_frequency("storage", 322.9e-6)
    assert abs(f - 6834.677975e6) < 1e3
    assert clockreg.transition_frequency("|1,-1>->|2,1>", 322.9e-6) == f
    with pytest.raises(clockreg.InputError):
        clockreg.transition_frequency("|1,-1>->|1,1>", 322.9e-6)


def test_settings_override():
    with pytest.raises(clockreg.InputError):
        clockreg.magic_field({"no.such.key": "1"})
    with pytest.raises(clockreg.NoSolutionError):
        clockreg.magic_field({"magic.lo": "400e-6"})


def test_closed_forms():
    assert abs(clockreg.solve_zero_response_rabi(23e3, 1) - 13279.056) < 1e-3
    assert clockreg.crosstalk_figure(25.0, 15e3) == pytest.approx(1 / 600)
    assert clockreg.shift_phase_deg(35.0, 1.5e-3) == pytest.approx(18.9)
    w = 2 * math.pi * 10e3
    assert clockreg.rabi_transfer(w, 0.2 * w, math.pi / w) == pytest.approx(0.9606, abs=5e-4)


def test_sequence_check_and_format():
    text = (FIXTURES / "valid" / "modified_ramsey.pseq").read_text()
    r = clockreg.check_sequence(text, "modified_ramsey.pseq")
    assert r["ok"] and r["diagnostics"] == []
    again = clockreg.check_sequence(r["canonical"])
    assert again["canonical"] == r["canonical"]

    bad = clockreg.check_sequence("channel c freq 6.8 GHz\npulse c area 90 kg rabi 1 kHz\n", "bad.pseq")
    assert not bad["ok"]
    assert bad["diagnostics"][0]["code"] == "E-UNIT"
    assert bad["diagnostics"][0]["text"].startswith("bad.pseq:2:")


def test_run_sequence_fringe():
    text = (FIXTURES / "valid" / "modified_ramsey.pseq").read_text()
    r = clockreg.run_sequence(text)
    assert r["A"]["contrast"] >= 0.999
    assert len(r["A"]["scan"]) == len(r["A"]["signal"])
    with pytest.raises(clockreg.InputError):
        clockreg.run_sequence("pulse x area 90 deg rabi 1 kHz\n")


def test_mapping_metrics():
    m = clockreg.evaluate_mapping(23e3 / math.sqrt(3), 23e3 / math.sqrt(35), 23e3)
    assert m["a_leakage"] <= 0.03
    assert m["b_disturbance"] <= 0.03


def test_t2star_small_ensemble_is_deterministic():
    delays = [i * 12e-3 for i in range(10)]
    a = clockreg.storage_t2star(2.61, delays, samples=100, seed=5, jobs=2)
    b = clockreg.storage_t2star(2.61, delays, samples=100, seed=5, jobs=1)
    assert a == b
    assert 0.05 < a["t2star"] < 0.075


def test_cli_in_process(tmp_path):
    code, out, err = clockreg.cli(["magic-field"])
    assert code == 0
    assert abs(json.loads(out)["magic_field_uT"] - 322.9) < 0.5
    code, _, err = clockreg.cli(["run", str(FIXTURES / "invalid" / "dup_field.pseq")])
    assert code == 2 and "E-DUP" in err
    code, _, _ = clockreg.cli(["run", str(FIXTURES / "valid" / "modified_ramsey.pseq"), "--output-dir", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "modified_ramsey.csv").read_text().startswith("# manifest ")
