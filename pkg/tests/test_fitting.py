import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from steanebench.bench import DecaySeries, ExponentialDecayRegressor, FitError, fit_rb, fit_t_decay
from steanebench.bench.fitting import bootstrap, rb_fidelities, t_fidelity

RB_L = [2, 6, 10, 14]
T_L = [4, 8, 12, 16]


def _rb_curve(f, a=0.75, lengths=RB_L):
    return [a * f ** L + 0.25 for L in lengths]


def _t_curve(eps, lengths=T_L):
    return [0.5 + 0.5 * (1 - 2 * eps) ** L for L in lengths]


def test_rb_exact_recovery():
    series = DecaySeries(RB_L, _rb_curve(0.98), [1000] * 4)
    res = fit_rb(series, 1.5, n_boot=0)
    assert res.params["f"] == pytest.approx(0.98, abs=1e-9)
    assert res.params["a"] == pytest.approx(0.75, abs=1e-9)
    assert res.derived["F_avg"] == pytest.approx(1 - 3 * 0.02 / 4, abs=1e-12)
    assert res.derived["infidelity_per_cnot"] == pytest.approx((1 - res.derived["F_avg"]) / 1.5, abs=1e-15)
    assert max(abs(r) for r in res.residuals) < 1e-9


def test_rb_no_decay():
    res = fit_rb(DecaySeries(RB_L, [1.0] * 4, [100] * 4), 1.5, n_boot=20)
    assert res.params["f"] == 1.0
    assert res.derived["F_avg"] == 1.0
    assert res.derived["infidelity_per_cnot"] == 0.0


def test_t_exact_recovery():
    assert _t_curve(0.01, [8])[0] == pytest.approx(0.92538, abs=1e-5)
    res = fit_t_decay(DecaySeries(T_L, _t_curve(0.01), [1000] * 4), n_boot=0)
    assert res.params["eps"] == pytest.approx(0.01, abs=1e-9)
    assert res.derived["F_avg"] == pytest.approx(1 - 2 * 0.01 / 3, abs=1e-12)


def test_t_zero_error():
    res = fit_t_decay(DecaySeries(T_L, [1.0] * 4, [100] * 4), n_boot=10)
    assert res.params["eps"] == 0.0
    assert res.derived["F_avg"] == 1.0


def test_t_fidelity_conversion():
    assert t_fidelity(0.015) == pytest.approx(0.990, abs=1e-12)
    assert rb_fidelities(1.0, 1.5) == {"F_avg": 1.0, "infidelity_per_cnot": 0.0}


def test_degenerate_data_raises():
    with pytest.raises(FitError):
        fit_rb(DecaySeries(RB_L, [0.25] * 4, [100] * 4), 1.5, n_boot=0)
    with pytest.raises(FitError):
        fit_t_decay(DecaySeries(T_L, [0.5] * 4, [100] * 4), n_boot=0)


def test_too_few_lengths_raises():
    with pytest.raises(FitError):
        ExponentialDecayRegressor().fit([2, 6], [0.9, 0.8])


def test_estimator_api():
    est = ExponentialDecayRegressor(asymptote=0.5, amplitude=0.5)
    assert est.get_params() == {"asymptote": 0.5, "amplitude": 0.5, "max_nfev": 2000}
    twin = clone(est).set_params(max_nfev=50)
    assert twin.max_nfev == 50 and est.max_nfev == 2000
    with pytest.raises(NotFittedError):
        est.predict([4])
    X = np.array(T_L).reshape(-1, 1)
    y = np.array(_t_curve(0.02))
    est.fit(X, y)
    assert np.allclose(est.predict(X), y)
    assert est.score(X, y) == pytest.approx(1.0)


def test_free_amplitude_recovery():
    est = ExponentialDecayRegressor(asymptote=0.25).fit(RB_L, _rb_curve(0.95, a=0.6))
    assert est.amplitude_ == pytest.approx(0.6, abs=1e-9)
    assert est.f_ == pytest.approx(0.95, abs=1e-9)


def _sampled_series(rng, f, shots=100, circuits=10):
    surv, n, cs, cn = [], [], [], []
    for p in _rb_curve(f):
        hits = rng.binomial(shots, p, size=circuits)
        cs.append((hits / shots).tolist())
        cn.append([shots] * circuits)
        surv.append(hits.sum() / (shots * circuits))
        n.append(shots * circuits)
    return DecaySeries(RB_L, surv, n, None, cs, cn)


def test_bootstrap_returns_replicates():
    series = _sampled_series(np.random.default_rng(1), 0.97)
    fs = bootstrap(ExponentialDecayRegressor(), series, n_boot=30, seed=2)
    assert fs.shape == (30,)
    assert np.all((fs > 0) & (fs <= 1))
    assert bootstrap(ExponentialDecayRegressor(), series, n_boot=0).size == 0


def test_bootstrap_deterministic():
    series = _sampled_series(np.random.default_rng(1), 0.97)
    a = fit_rb(series, 1.5, n_boot=20, seed=4)
    b = fit_rb(series, 1.5, n_boot=20, seed=4)
    assert a.stderr == b.stderr and a.stderr["f"] > 0


@pytest.mark.slow
def test_bootstrap_coverage():
    rng = np.random.default_rng(12345)
    hits = 0
    reps = 50
    for k in range(reps):
        res = fit_rb(_sampled_series(rng, 0.99), 1.5, n_boot=200, seed=k)
        hits += abs(res.params["f"] - 0.99) <= 3 * res.stderr["f"]
    assert hits / reps >= 0.95


def test_fit_result_serializes():
    res = fit_t_decay(DecaySeries(T_L, _t_curve(0.03), [100] * 4), n_boot=5)
    d = res.to_dict()
    assert d["model"] == "t" and set(d["params"]) == {"eps"}
    assert '"F_avg"' in res.to_json()


def test_decay_series_validation():
    with pytest.raises(ValueError):
        DecaySeries([2, 2, 6], [1, 1, 1], [1, 1, 1])
    with pytest.raises(ValueError):
        DecaySeries([2, 6], [1.2, 1], [1, 1])
    with pytest.raises(ValueError):
        DecaySeries([2, 6], [1, 1], [1, 1], [0.0, 1.0])
    with pytest.raises(ValueError):
        DecaySeries([2, 6], [1, 1], [1, 1], metadata={"protocol": "t-bench"})


def test_decay_series_round_trip_and_csv():
    s = DecaySeries(RB_L, _rb_curve(0.9), [10] * 4, [1.0, 0.9, 0.8, 0.7], metadata={"protocol": "rb"})
    assert DecaySeries.from_dict(s.to_dict()) == s
    lines = s.to_csv().splitlines()
    assert lines[0] == "L,survival,shots,retention"
    assert len(lines) == 5 and lines[1].startswith("2,")
