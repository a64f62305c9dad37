"""Smoke test for the pyspeclab extension module.

Build and install first, for example:

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml

then run ``python crates/python/python/smoke_test.py``.
"""

import json
import math
import sys

import pyspeclab as sl

J01 = 2.404825557695773
J11 = 3.831705970207512


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    failures = []

    def check(name, ok, detail=""):
        print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
        if not ok:
            failures.append(name)

    disk_c = sl.Domain.ball(1.0, 1 / 32)
    disk_f = sl.Domain.ball(1.0, 1 / 64)
    check("disk measure", close(disk_f.measure, math.pi, 0.01), f"{disk_f.measure:.5f}")

    res = sl.extrapolated(disk_c, disk_f, 3, with_torsion=True)
    lam = res["spectrum"]["eigenvalues"]
    check("disk lambda1", close(lam[0], J01**2, 0.002), f"{lam[0]:.5f}")
    check("disk lambda2", close(lam[1], J11**2, 0.005), f"{lam[1]:.5f}")
    check("disk cluster", [1, 2] in res["spectrum"]["clusters"])
    t = res["torsion"]["T"]
    check("disk torsion", close(t, math.pi / 8, 0.005), f"{t:.5f}")

    theta = sl.Domain.theta(3.0, 1 / 64)
    s = sl.spectrum(theta, 2)
    check("theta double eigenvalue", close(s["eigenvalues"][0], s["eigenvalues"][1], 1e-6))
    check("theta components", len(theta.components()) == 2)

    ref = sl.reference(2, 3)
    check("reference", close(ref["theta_eigenvalues"][0], 2 * J01**2, 1e-12))

    f2 = sl.fraenkel2(theta)
    check("theta F2 near zero", f2["value"] < 0.02, f"{f2['value']:.4f}")
    f1 = sl.fraenkel1(disk_f)
    check("disk F1 near zero", f1["value"] < 0.02, f"{f1['value']:.4f}")

    dec = sl.decompose(sl.Domain.family("dumbbell-neck", 0.2, 1 / 32))
    gap = abs(max(dec["lambda1_plus"], dec["lambda1_minus"]) - dec["lambda2"]) / dec["lambda2"]
    check("decomposition", gap < 0.05, f"{gap:.4f}")

    spec = json.dumps({"label": "ellipse", "shape": {"kind": "ellipsoid", "semi_axes": [1.2, 0.8]}})
    recs = sl.verify(spec, k_max=2, checks=["faber-krahn", "krahn-szego", "saint-venant"])
    check("verify rows", len(recs) == 3)
    check("verify verdicts", all(r["verdict"].startswith("holds") for r in recs))

    fit = sl.fit_exponent_analytic("volume-split", 1, [0.00125, 0.0025, 0.005, 0.01])
    check("analytic slope", abs(fit["slope"] - 1.0) < 0.05, f"{fit['slope']:.4f}")

    vals, vecs = sl.smallest_eigenpairs_dense([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]], 1)
    check("dense eigenpair", close(vals[0], 2 - math.sqrt(2), 1e-10), f"{vals[0]:.12f}")

    try:
        sl.Domain.family("volume-split", 0.7, 1 / 32)
        check("out of range rejected", False)
    except ValueError:
        check("out of range rejected", True)

    print(f"{len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
