# SPDX-License-Identifier: Apache-2.0
#
# fdxtrack: full-duplex beam tracking for LEO satellite ground terminals
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import fdxtrack as fx

SMALL = {
    "array.tx_rows": "4",
    "array.tx_cols": "4",
    "array.rx_rows": "4",
    "array.rx_cols": "4",
    "pass.duration_s": "10",
    "tracker.delta_az_deg": "[1, 2]",
    "tracker.delta_el_deg": "[1, 2]",
    "si.calibration_pairs": "100",
    "campaign.trials": "2",
    "campaign.threads": "1",
}


@pytest.fixture(scope="module")
def small():
    return fx.scenario(SMALL, use_env=False)


def test_defaults():
    s = fx.scenario(use_env=False)
    assert s.trials == 136
    assert s.scheme_names() == ["conventional", "proposed_1x1", "proposed_2x2", "proposed_3x3"]
    assert s.to_config()["pass.mask_el_deg"] == "35"


def test_bad_config_raises():
    with pytest.raises(fx.ConfigError):
        fx.scenario({"campaign.trials": "0"}, use_env=False)
    with pytest.raises(ValueError):
        fx.scenario({"no.such_key": "1"}, use_env=False)


def test_array_response_and_beam():
    a = fx.array_response(2, 1, 0.5, 0.0, 90.0)
    np.testing.assert_allclose(a, [1.0, -1.0], atol=1e-12)
    w = fx.matched_filter_beam(16, 16, 0.5, 20.0, 30.0)
    r = fx.array_response(16, 16, 0.5, 20.0, 30.0)
    assert w.shape == (256,)
    gain = abs(np.vdot(w, r)) ** 2
    assert 10 * math.log10(gain) == pytest.approx(10 * math.log10(256), abs=1e-9)


def test_link_helpers():
    assert 10 * math.log10(fx.path_gain(600.0, 20e9)) == pytest.approx(-174.0314081428359, abs=1e-9)
    assert fx.sinr_downlink_db(10.0, 0.0) == pytest.approx(10.0 - 10 * math.log10(2.0))
    assert fx.sum_se(0.0, 0.0) == pytest.approx(2.0)
    assert "iid-rayleigh" in fx.si_model_ids()


def test_tracker_helpers():
    assert fx.fit_bias_1d([1.3, 2.3, -4.7]) == pytest.approx(-0.3)
    assert [fx.neighborhood_size(d, d) for d in range(4)] == [1, 81, 625, 2401]


def test_constellation(small):
    sats = fx.generate_constellation(small)
    assert len(sats) == 3236
    assert sats[0].period_s == pytest.approx(2 * math.pi * math.sqrt((6371.0 + 590.0) ** 3 / 398600.4418))


def test_run_pass(small):
    r = fx.run_pass(small, 3, keep_candidates=True)
    assert set(r["traces"]) == {"conventional", "proposed_1x1", "proposed_2x2"}
    conv = r["traces"]["conventional"]
    assert conv.shape == (11, len(fx.TRACE_COLUMNS))
    np.testing.assert_allclose(fx.column(conv, "t"), np.arange(11.0))
    assert r["trajectory"].shape == (11, 7)
    for name in ("proposed_1x1", "proposed_2x2"):
        t = r["traces"][name]
        assert np.all(fx.column(t, "sinr_dl_db") <= fx.column(t, "snr_dl_db") + 1e-12)
    assert r["candidates"]["proposed_1x1"].shape[0] < r["candidates"]["proposed_2x2"].shape[0]
    again = fx.run_pass(small, 3)
    np.testing.assert_array_equal(again["traces"]["proposed_2x2"], r["traces"]["proposed_2x2"])


def test_run_campaign(small):
    out = fx.run_campaign(small)
    assert out["trial_indices"] == [0, 1]
    assert out["failures"] == []
    assert [p["pair_seed"] for p in out["passes"]] == [fx.trial_seed(small.master_seed, i) for i in range(2)]
    values, probs = out["cdfs"][("inr_db", "conventional")]
    assert len(values) == 22
    assert np.all(np.diff(values) >= 0)
    assert probs[-1] == pytest.approx(1.0)


def test_no_visible_pair():
    s = fx.scenario(
        {
            "shell.0.altitude_km": "600",
            "shell.0.inclination_deg": "5",
            "shell.0.plane_count": "1",
            "shell.0.sats_per_plane": "2",
            "shell.0.phasing": "0",
            "pass.mask_el_deg": "85",
            "pass.scan_limit_s": "600",
        },
        use_env=False,
    )
    with pytest.raises(fx.NoVisiblePairError):
        fx.select_pair(s, 1)
