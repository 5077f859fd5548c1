"""Smoke test for the `rabi` extension module.

Build and install first, e.g. `pip install --no-build-isolation ./crates/python`
(needs maturin), then run `python python/smoke_test.py`.
"""

import math

import rabi


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    spec = rabi.ModelSpec.from_ratios(1e-2, 0.0)
    assert close(spec.lambda_c(), math.sqrt(1e-2) / 2, 1e-15)
    rec = rabi.ground_state(spec)
    assert rec.converged
    assert abs(rec.entropy_s) < 1e-12 and abs(rec.corr_c) < 1e-12
    assert abs(rec.squeeze_sp1 - 1.0) < 1e-12
    assert close(rec.e0, -0.5, 1e-12)
    assert len(rec.gaps) == 10 and close(rec.gaps[0], 1e-2, 1e-10)

    decoupled = rabi.ModelSpec(0.0, 0.5, 0.3)
    assert close(rabi.ground_state(decoupled).e0, -0.3**2 / 0.5, 1e-10)

    levels = rabi.spectrum(rabi.ModelSpec.from_ratios(0.1, 0.0), n_max=40, levels=4)
    assert [p for _, p in levels][:1] == ["even"]
    assert close(levels[0][0], -0.5, 1e-12) and close(levels[1][0], -0.4, 1e-12)

    trunc = rabi.TruncationConfig(max_rounds=8)
    records = rabi.sweep([1e-3], [0.5, 1.0, 1.5], trunc=trunc)
    assert [r.lambda_rel for r in records] == [0.5, 1.0, 1.5]
    assert records[1].entropy_s > 0.0
    assert records[2].as_dict()["entropy_S"] == records[2].entropy_s

    hot = rabi.thermal(rabi.ModelSpec.from_ratios(0.1, 1.5), 200, [0.0, 0.5])
    assert hot[1].corr_c <= hot[0].corr_c

    pred = rabi.semiclassical(rabi.ModelSpec.from_ratios(1e-3, 1.2))
    assert pred["side"] == "above" and pred["gap_below"] is None

    s = rabi.sign_matrix(3)
    assert s[0][0] == 0.0 and close(s[0][1], s[1][0], 0.0)

    exponent, prefactor = rabi.fit_power_law([1.0, 4.0, 9.0], [2.0, 4.0, 6.0])
    assert close(exponent, 0.5, 1e-12) and close(prefactor, 2.0, 1e-12)

    try:
        rabi.ModelSpec.from_ratios(-1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative ratio accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
