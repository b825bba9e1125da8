import json
import math

import pytest

import vcsim

SMALL = {
    "synth_vehicles": "40",
    "synth_duration": "10",
    "rsu_count": "6",
    "n_core": "2",
    "placement": "core0",
    "seed": "3",
}


def test_cpa_crossing():
    t, d, kind = vcsim.cpa((0, 0), (10, 0), (100, -100), (0, 10))
    assert kind == "approaching"
    assert t == pytest.approx(10.0)
    assert d == pytest.approx(0.0, abs=1e-9)


def test_cpa_parallel():
    t, d, kind = vcsim.cpa((0, 0), (5, 0), (0, 3), (5, 0))
    assert (t, kind) == (0.0, "parallel")
    assert d == pytest.approx(3.0)


def test_access_delay_examples():
    assert vcsim.access_delay(0.0075, seed=1) >= 0.0004
    assert vcsim.access_delay(0.075, seed=1) == pytest.approx(0.0254, abs=0.0021)
    with pytest.raises(vcsim.VcsimError):
        vcsim.access_delay(-1.0)


def test_run_summary_counts():
    out = vcsim.run(SMALL, records=True)
    counts = out["summary"]["counts"]
    assert counts["generated"] == len(out["records"])
    assert counts["success"] + counts["late"] + counts["lost"] + counts["uncovered"] == counts["generated"]
    for r in out["records"]:
        if r["outcome"] in ("success", "late"):
            parts = r["d_air_up"] + r["d_up"] + r["d_proc"] + r["d_down"] + r["d_air_down"]
            assert parts == pytest.approx(r["total"], abs=1e-12)
        else:
            assert math.isnan(r["total"])


def test_run_is_deterministic():
    assert vcsim.run(SMALL)["summary"] == vcsim.run(SMALL)["summary"]


def test_refine_log():
    settings = dict(SMALL)
    settings.pop("placement")
    out = vcsim.refine(settings, n=1, iters=4)
    assert 1 <= len(out["log"]) <= 4
    assert out["best_objective"] == max(e[2] for e in out["log"])


def test_topology_json():
    doc = json.loads(vcsim.topology_json(SMALL))
    assert sum(n["kind"] == "core" for n in doc["nodes"]) == 2
    assert len(doc["links"]) == 6 + 1


def test_bad_config_and_cli():
    with pytest.raises(vcsim.VcsimError):
        vcsim.run({"no_such_key": "1"})
    code, _, err = vcsim.cli(["run", "--bogus"])
    assert code == 2 and err
    assert "synth_vehicles" in vcsim.config_defaults()
