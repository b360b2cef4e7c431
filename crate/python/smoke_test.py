"""Smoke test for the `amlcp` extension module.

Build and install with `maturin develop -m crates/python/Cargo.toml`, or
build the shared library by hand and put it on the path as `amlcp.so`:

    PYO3_BUILD_EXTENSION_MODULE=1 cargo build --release -p amlcp-python
    cp target/release/libamlcp_py.so python/amlcp.so
    python3 python/smoke_test.py
"""

import math
import sys

import amlcp


def close(a, b, tol):
    return max(abs(x - y) for x, y in zip(a, b)) <= tol


def main():
    # one TR stage of a butterfly on a coarse grid
    grid = amlcp.SpaceGrid.uniform(0.0, 300.0, 15)
    m = amlcp.assemble_matrix(grid, 0.01, 0.01, 1.0, 0.25 / 3)
    payoff = amlcp.payoff_values(grid, "butterfly", 90.0, 110.0)
    v = amlcp.first_stage_rhs(m, payoff)

    exact = amlcp.brute_force_lcp(m, v)
    assert close(amlcp.solve_policy_iteration(m, v), exact, 1e-12)
    assert close(amlcp.solve_psor(m, v, tol=1e-15), exact, 1e-12)
    luul = amlcp.solve_double_sweep(m, v)
    assert close(amlcp.solve_fast_double_sweep(m, v), luul, 1e-13)
    print(f"stage LCP: max |LUUL - exact| = {max(abs(a - b) for a, b in zip(luul, exact)):.3e}")
    print(f"sweep plan: {amlcp.plan_sweeps(v)}, exercise bands: {amlcp.exercise_region(exact)}")

    # American put with a negative rate
    kw = dict(rate=-0.012, drift=0.004, vol=0.1, expiry=45 / 365, n=100, m=2000)
    am = amlcp.price(**kw)
    pi = amlcp.price(solver="pi", **kw)
    eu = amlcp.price(exercise="european", **kw)
    bs = amlcp.black_scholes(False, 100.0, 100.0, -0.012, 0.004, 0.1, 45 / 365)
    assert abs(am.price - 1.380533089) < 5e-3
    assert abs(am.price - pi.price) < 1e-10 * am.price
    assert abs(eu.price - bs) < 1e-3 and am.price > eu.price
    assert math.isfinite(am.wall_time)
    print(f"American put {am.price:.9f} ({am.solver}, {am.stages} stages), European {eu.price:.9f}, closed form {bs:.9f}")

    try:
        amlcp.price(vol=-0.1)
    except ValueError as e:
        print(f"rejected bad input: {e}")
    else:
        raise AssertionError("negative volatility accepted")
    print("smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
