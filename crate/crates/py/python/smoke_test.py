"""Smoke test for the compiled extension: run after `maturin develop` or `pip install`."""

import csv
import io
import json
import math

import bose_complexity_py as bc


def main():
    assert abs(bc.gamma_easy(1e6, 2.0, 2) - 0.5) < 1e-5
    value, kind = bc.gamma_hard(4.0, 2.0, 2, "constant")
    assert kind == "I" and value >= bc.gamma_easy(4.0, 2.0, 2)
    assert bc.classify(8.0, 2.0, 2, "constant", 0.01)[0] == "easy"

    cdf, bound = bc.max_entry_cdf(0.25, 16)
    assert 0.0 <= bound <= cdf <= 1.0

    tuned = bc.tuned_entangling_params(10.0)
    assert tuned["leakage"] <= 1e-10 and math.isclose(tuned["t"], 2 * math.pi / tuned["J"])

    cfg = {
        "experiment": "transfer",
        "seed": 0,
        "lattice": {"dimension": 1, "shape": [11]},
        "hamiltonian": {"alpha": 0.0, "V": 0.0},
        "transfer": {"source": 0, "target": 10},
    }
    out = bc.run(json.dumps(cfg))
    trace = json.loads(out["output"])
    assert math.isclose(trace["total_time"], math.pi / 3, abs_tol=1e-12)
    assert trace["fidelity"] > 1 - 1e-9

    cfg = {
        "experiment": "phase_grid",
        "seed": 0,
        "phase": {
            "dimension": 2,
            "beta": 2.0,
            "v_regime": "constant",
            "alpha": {"min": 0.0, "max": 10.0, "points": 5},
            "gamma": {"min": 0.0, "max": 2.0, "points": 5},
        },
        "sweep": {"param": "phase.beta", "values": [1.5, 2.0]},
    }
    rows = list(csv.DictReader(io.StringIO(bc.sweep(json.dumps(cfg), 2)["output"])))
    assert len(rows) == 50 and rows[-1]["point"] == "1"

    try:
        bc.run(json.dumps({"experiment": "gates", "seed": 0, "bogus": 1}))
    except ValueError as e:
        assert "bogus" in str(e)
    else:
        raise AssertionError("unknown field accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
