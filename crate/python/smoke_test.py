"""Smoke test for the `ndp` extension module.

Build and install first, e.g.

    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/ndp-*.whl
    python python/smoke_test.py
"""

import math
import os
import sys
import tempfile

import ndp


def check(cond, msg):
    if not cond:
        print(f"FAIL {msg}")
        sys.exit(1)
    print(f"ok   {msg}")


def main():
    check(len(ndp.scenario_names()) == 7, "seven built-in scenarios")

    pennies = ndp.load_scenario("pennies")
    data, config = pennies.data, pennies.config
    check(data.num_rows == 7 and data.num_states == 2, "pennies shape")

    oracle = ndp.Oracle(data, config)
    exact = oracle.expect("new_agent_component 1")
    check(oracle.num_partitions == 877, "Bell(7) partitions")
    check(abs(exact - 0.6319) < 1e-3, f"exact new-coin heads probability {exact:.4f}")

    batch = ndp.run(data, config, 10_000, seed=1)
    est = batch.expect("new_agent_component 1")
    se = batch.standard_error("new_agent_component 1")
    check(abs(est - exact) < 5 * se, f"engine {est:.4f} within 5 se of exact")
    ess1, ess2 = batch.ess()
    check(5000 < ess1 <= 10_000 and ess2 > 0, f"ESS {ess1:.0f}")
    check(abs(sum(batch.normalized_weights()) - 1) < 1e-12, "weights normalized")

    again = ndp.run(data, config, 10_000, seed=1, threads=1)
    check(again.normalized_weights() == batch.normalized_weights(), "seeded runs agree across thread counts")

    law = batch.law("component 5 1")
    p = law.probability_below(0.5)
    check(abs(p - batch.expect("lt component 5 1 0.5")) < 1e-12, "probability_below matches indicator query")
    grid, dens, h = law.kde(clip=(0.0, 1.0), points=256)
    check(len(grid) == 256 and h > 0 and all(d >= 0 for d in dens), "kde curve")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "batch.json")
        batch.save(path)
        loaded = ndp.Batch.load(path)
        check(loaded.normalized_weights() == batch.normalized_weights(), "batch round trip")

    g = ndp.Gamer()
    probs = g.discretize(500)
    check(abs(sum(probs) - 1) < 1e-12, "discretized gamer base sums to 1")
    xs = g.sample(2000, seed=3)
    check(all(x > 0 and math.isfinite(x) for x in xs), "gamer samples positive")
    check(g.sample(5, seed=3) == xs[:5], "gamer sampler seeded")

    toy = ndp.Data.from_rows([[0, 1, 1], [1, 1], [0]], 2)
    cfg = ndp.ModelConfig(1.0, 2.0, [0.5, 0.5])
    check(toy.counts() == [[1, 2], [0, 2], [1, 0]], "row counting")
    check(0 < ndp.Oracle(toy, cfg).expect("cocluster 1 2") < 1, "cocluster probability")

    for bad in (lambda: ndp.Data.from_rows([[2]], 2), lambda: ndp.ModelConfig(-1, 1, [1.0])):
        try:
            bad()
        except ValueError:
            continue
        check(False, "invalid input raises ValueError")
    check(True, "invalid input raises ValueError")
    try:
        ndp.load_scenario("nope")
        check(False, "unknown scenario raises KeyError")
    except KeyError:
        check(True, "unknown scenario raises KeyError")
    print("smoke test passed")


if __name__ == "__main__":
    main()
