"""Smoke test for the vortexlab_py extension.

Install first:  pip install --no-build-isolation ./crates/python
"""

import json
import math
import sys

import vortexlab_py as vx


def main() -> int:
    print("vortexlab_py", vx.__version__)
    assert vx.presets() == ["hyperbolic-exchange", "ring-death", "ring-birth", "moving-ring"]

    # G_0(x) = -1/(4 pi |x|)
    g = vx.fundamental_solution(0.0, [0.0, 0.0, 2.0])
    assert abs(g + 1.0 / (8.0 * math.pi)) < 1e-15, g

    # small-argument slope of the energy integral is 2 nu
    lo = vx.bessel_energy(1.5, 1e-3)
    hi = vx.bessel_energy(1.5, 1e-2)
    slope = math.log10(hi / lo)
    assert abs(slope - 3.0) < 0.05, slope

    rep = json.loads(vx.runge_report(-1.0))
    assert rep["source_bound_holds"], rep
    assert rep["error_target"] <= 5e-3, rep["error_target"]

    events = json.loads(vx.scenario_events("hyperbolic-exchange"))
    assert len(events) == 1 and events[0]["kind"] == "exchange", events
    p = events[0]["fit"]["exponent"]
    assert abs(p - 0.5) <= 0.02, p

    rows = vx.evolve_observables(0.3, n=16, steps=20, records=4)
    m0 = rows[0][1]
    assert all(abs(r[1] - m0) <= 1e-10 * m0 for r in rows), rows

    try:
        vx.scenario_events("trefoil")
    except ValueError as e:
        assert "hyperbolic-exchange" in str(e)
    else:
        raise AssertionError("unknown preset accepted")

    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
