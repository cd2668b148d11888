"""Derived-values ledger regeneration."""

import json

from cfirs import repro


def test_ledger_file_matches_registry():
    with open(repro.LEDGER_PATH) as fh:
        records = json.load(fh)
    assert set(records) == set(repro.REGISTRY)


def test_regenerate_all_pass():
    report = repro.regenerate_derived_values()
    failures = [e for e in report if e["status"] != "pass"]
    assert failures == []


def test_tampered_ledger_detected(tmp_path):
    with open(repro.LEDGER_PATH) as fh:
        records = json.load(fh)
    records["path_loss_100m_alpha2.2"]["value"] *= 2.0
    path = tmp_path / "ledger.json"
    path.write_text(json.dumps(records))
    report = repro.regenerate_derived_values(path)
    bad = {e["id"]: e["status"] for e in report}
    assert bad["path_loss_100m_alpha2.2"] == "fail"
    assert bad["steering_ula_M2_endfire"] == "pass"


def test_generate_ledger_round_trip(tmp_path):
    path = tmp_path / "fresh.json"
    records = repro.generate_ledger(path)
    assert path.exists()
    assert set(records) == set(repro.REGISTRY)
    report = repro.regenerate_derived_values(path)
    assert all(e["status"] == "pass" for e in report)
