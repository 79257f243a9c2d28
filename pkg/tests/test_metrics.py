import numpy as np
import pytest

from wngload.beamform import mpdr_weights, omniscient_capon, quiescent_weights
from wngload.metrics import (TrialResult, accumulate, clamp_db, cumulative_mean,
                             instantaneous_mse, output_sinr)
from wngload.scenario import (InterfererState, ScenarioConfig, UlaGeometry, draw_snapshot,
                              steering_vector, true_ecm)

GEOM = UlaGeometry(15)
CONFIG = ScenarioConfig()
D = steering_vector(GEOM, 90)


def test_delay_and_sum_sinr_in_white_noise():
    ecm = true_ecm([], CONFIG, GEOM)
    sinr = output_sinr(quiescent_weights(D), ecm, D)
    assert sinr == pytest.approx(-5 + 10 * np.log10(15), abs=1e-12)


def test_omniscient_is_sinr_optimal(rng):
    for _ in range(100):
        state = [InterfererState(float(a), CONFIG.interferer_power, 5)
                 for a in rng.choice([84, 85, 86, 94, 95, 96], size=rng.integers(0, 3))]
        ecm = true_ecm(state, CONFIG, GEOM)
        best = output_sinr(omniscient_capon(ecm.R_true, D), ecm, D)
        A = rng.normal(size=(15, 15)) + 1j * rng.normal(size=(15, 15))
        other = mpdr_weights(A @ A.conj().T + np.eye(15), D)
        assert best >= output_sinr(other, ecm, D) - 1e-9
        assert best >= output_sinr(quiescent_weights(D), ecm, D) - 1e-9


def test_mse_examples():
    assert instantaneous_mse(1 + 2j, 1 + 2j) == 0
    assert instantaneous_mse(0.0, 3 - 4j) == pytest.approx(25)


def test_delay_and_sum_noise_only_mse():
    config = ScenarioConfig(snr_db=None)
    rng = np.random.default_rng(1)
    w = quiescent_weights(D).w
    mse = [instantaneous_mse(np.vdot(w, y), s)
           for y, s in (draw_snapshot([], config, GEOM, rng) for _ in range(40000))]
    # sigma_v^2 / M = 1/15, standard error ~ 0.067/200
    assert np.mean(mse) == pytest.approx(1 / 15, rel=0.03)


def test_cumulative_mean():
    np.testing.assert_allclose(cumulative_mean([2.0, 4.0, 0.0]), [2.0, 3.0, 2.0])


def test_clamp_db():
    np.testing.assert_array_equal(clamp_db(np.array([-np.inf, -150.0, 3.0])), [-100, -100, 3])


def _trial(k, wng, sinr, mse):
    return TrialResult(k, k, np.array([True, False, False]), {
        "evd_mpdr": {"wng_db": np.array(wng, float), "sinr_db": np.array(sinr, float),
                     "mse_inst": np.array(mse, float)}})


def test_accumulate_single_and_duplicate():
    t = _trial(0, [9, 10, 11], [1, 2, 3], [1, 3, 2])
    one = accumulate([t])
    two = accumulate([t, t])
    assert one.trials == 1 and two.trials == 2
    for k in ("wng_db", "sinr_db", "mse_inst", "cum_mse"):
        np.testing.assert_allclose(one.mean["evd_mpdr"][k], two.mean["evd_mpdr"][k])
    np.testing.assert_allclose(one.mean["evd_mpdr"]["wng_db"], [9, 10, 11])


def test_accumulate_hand_fixture():
    a = _trial(0, [9, 10, 11], [1, 2, 3], [1, 3, 2])
    b = _trial(1, [10, 10, 9], [3, 0, 1], [3, 1, 4])
    s = accumulate([a, b]).mean["evd_mpdr"]
    np.testing.assert_allclose(s["wng_db"], [9.5, 10, 10])
    np.testing.assert_allclose(s["sinr_db"], [2, 1, 2])
    # running means: a -> [1, 2, 2], b -> [3, 2, 8/3]
    np.testing.assert_allclose(s["cum_mse"], [2, 2, (2 + 8 / 3) / 2])
    np.testing.assert_array_equal(accumulate([a, b]).post_warmup("evd_mpdr", "wng_db"), [10, 10])


def test_accumulate_shape_mismatch():
    a = _trial(0, [9, 10, 11], [1, 2, 3], [1, 3, 2])
    b = TrialResult(1, 1, np.array([True, False]), {
        "evd_mpdr": {k: np.zeros(2) for k in ("wng_db", "sinr_db", "mse_inst")}})
    with pytest.raises(ValueError):
        accumulate([a, b])
    with pytest.raises(ValueError):
        accumulate([])


def test_frame_records_roundtrip():
    t = _trial(0, [9, 10, 11], [1, 2, 3], [1, 3, 2])
    recs = list(t.records())
    assert [r.frame for r in recs] == [0, 1, 2]
    assert recs[0].warmup and not recs[1].warmup
    assert recs[2].values["evd_mpdr"]["wng_db"] == 11
