"""Smoke test for the `mfg` extension module."""

import math

import mfg


def close(a, b, tol=1e-12):
    assert abs(a - b) <= tol, (a, b)


def main():
    shock = mfg.Model.shock()
    assert shock.has_potential
    close(shock.terminal(1, 0.25), -0.25)
    close(shock.terminal(2, 0.25), 0.25)

    for p in (-1.0, 0.0, 0.7):
        close(mfg.godunov_flux(p, p, 0.3, shock), mfg.reduced_hamiltonian(p, 0.3, shock))

    n = 40
    cfg = mfg.SolverConfig(n, 1e-3, 1.0, snapshots=[0.0, 1.0])
    run = mfg.solve_nplayer(shock, cfg)
    assert run.times == [0.0, 1.0]
    u1, u2 = run.values(1)
    for k in range(n + 1):
        z = k / n
        close(u1[k], shock.terminal(1, z))
        close(u2[k], shock.terminal(2, z))

    threaded = mfg.solve_nplayer(shock, mfg.SolverConfig(n, 1e-3, 1.0, snapshots=[0.0, 1.0], threads=4))
    assert threaded.values(0) == run.values(0)

    w = run.w()
    d_upsilon = mfg.derivative_of_upsilon(mfg.solve_hjb(shock, cfg).values(0))
    assert mfg.compare_grids(w.values(0), d_upsilon, "l1") < 0.05

    w_all = mfg.solve_nplayer(shock, mfg.SolverConfig(n, 1e-3, 1.0, snapshots="all")).w()
    density, stats = mfg.solve_density(w_all, mfg.SolverConfig(125, 1e-4, 1.0, snapshots=[0.0, 1.0]))
    assert len(density) == 2
    assert stats["max_mass_drift"] < 1e-12
    assert stats["min_density"] >= 0.0

    step = [0.0] * 20 + [1.0] * 21
    assert mfg.jump_detector(step) == [19]
    close(mfg.shock_location(step)[0], 19.5 / 40)

    paradigm = mfg.Model.paradigm()
    assert not paradigm.has_potential
    try:
        mfg.solve_hjb(paradigm, cfg)
    except mfg.ConfigError:
        pass
    else:
        raise AssertionError("hjb accepted a model without potential")

    try:
        mfg.solve_nplayer(shock, mfg.SolverConfig(400, 0.05, 10.0, blowup_bound=1e3))
    except mfg.NumericalError as e:
        assert "blow-up" in str(e)
    else:
        raise AssertionError("expected blow-up")

    consumer = mfg.Model.consumer(100, eta=0.5, s1=0.075, s2=0.1)
    assert math.isfinite(consumer.coupling(1, 0.0))
    print("smoke test ok")


if __name__ == "__main__":
    main()
