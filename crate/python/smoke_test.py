"""Smoke test for the rpi extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/rpi-*.whl
"""

import sys

import mpmath
import rpi

mpmath.mp.dps = 60


def close(a, b, tol):
    return abs(mpmath.mpf(a) - b) < tol


def main():
    failures = []

    def check(name, ok):
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
        if not ok:
            failures.append(name)

    ids = rpi.case_ids()
    check("registry has 36 cases", len(ids) == 36 and ids[0] == "cp1")
    reg = rpi.registry()
    check("registry entries carry t and x", reg[0]["t"] == "1/100" and reg[0]["x"] == "9/4")

    rep = rpi.verify("cp1")
    check("cp1 verified", rep["status"] == "verified" and rep["table_match"])
    check("cp1 lhs is 75/(48 pi)", close(rep["lhs"], mpmath.mpf(75) / (48 * mpmath.pi), mpmath.mpf(10) ** -40))

    u2 = rpi.verify("u2", 40)
    check("u2 is evidence only", u2["status"] == "evidence-only")

    try:
        rpi.verify("nosuch")
        check("unknown id raises KeyError", False)
    except KeyError:
        check("unknown id raises KeyError", True)

    z = mpmath.mpf("0.3")
    re, im = rpi.gauss_2f1("1/4", "1/4", "1", "0.3")
    check("2F1 matches mpmath", close(re, mpmath.hyp2f1(0.25, 0.25, 1, z), mpmath.mpf(10) ** -50) and close(im, 0, 1e-50))

    tau = mpmath.mpc(mpmath.mpf("0.1"), mpmath.mpf("1.2"))
    q = mpmath.exp(2j * mpmath.pi * tau)
    t_ref = -64 * q * mpmath.qp(-q, q) ** 24
    tr, ti = rpi.hauptmodul("0.1", "1.2")
    check("hauptmodul matches eta product", abs(mpmath.mpc(tr, ti) - t_ref) < mpmath.mpf(10) ** -45)

    v = (31 - 3 * mpmath.sqrt(-7)) / 32
    got = rpi.recognize(mpmath.nstr(v.real, 58), mpmath.nstr(v.imag, 58), 1, 7, 55)
    check("recognize (31-3 sqrt(-7))/32", got is not None and "sqrt(7)" in got[1])
    check("pi is not recognized", rpi.recognize(mpmath.nstr(mpmath.pi, 58), "0", 1, 7, 55) is None)

    p2 = rpi.series_value("P", "1/100", "6", "-2")
    check("P(1/100; 6, -2) = 50/(3 pi)", close(p2, 50 / (3 * mpmath.pi), mpmath.mpf(10) ** -40))

    rows = rpi.check_table(2)
    check("table 2 reproduces", len(rows) == 7 and all(ok for _, ok, _ in rows))
    check("remark residual", mpmath.mpf(rpi.remark_residual()) < mpmath.mpf(10) ** -40)

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
