"""Smoke test for the compiled extension.

Build and copy the module next to this file first:

    cargo build --release -p quench-py --features extension-module
    cp target/release/libquench_py.so python/quench.so
    python3 python/smoke_test.py
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import quench  # noqa: E402


def main():
    p = quench.ModelParams(c_x=0.0)
    x, u = quench.quench_front(p, half_width=20.0, h=0.05)
    i0 = x.index(0.0)
    assert abs(u[i0] - 0.5) < 1e-3, u[i0]

    c, xi, z = quench.traveling_wave(p, half_width=20.0, h=0.05)
    assert abs(c) < 1e-10
    assert abs(quench.cn_prime([1.0]) + 3 / math.sqrt(2)) < 1e-8

    chis = quench.partition_of_unity(20.0, 40.0, 0.0)
    assert chis[1] == 1.0 and abs(sum(chis) - 1.0) < 1e-15
    xt, yt = quench.shear_map(-3.0, 1.0, math.pi / 6)
    assert abs(yt - (1 - math.sqrt(3))) < 1e-14
    assert quench.shear_inverse(xt, yt, math.pi / 6) == (-3.0, 1.0)

    assert quench.front_max_eigenvalue(0.5) < -0.05

    theta = quench.solve_theta(0.5, half_width=30.0, h=0.5)
    assert theta.oddness_defect() < 1e-12
    g = quench.ModelParams(c_x=0.5, g_right=[1.0])
    rep = quench.melnikov_report(theta, g)
    assert rep["m_psi"] < 0 and rep["dphi_dalpha"] > 0

    field, m = quench.simulate(g.with_alpha(0.1), half_width=30.0, h=0.5, window=(-25.0, -10.0))
    assert m["psi"] > 0, m
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "u.qnch")
        field.write(path)
        back = quench.Field2D.read(path)
        assert back.shape == field.shape and back.data == field.data

    try:
        quench.ModelParams(c_x=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative c_x accepted")

    print("python smoke test ok: psi(0.1) = %.4f, predicted %.4f" % (m["psi"], 0.1 * rep["dphi_dalpha"]))


if __name__ == "__main__":
    main()
