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
"""Python bindings for the fdxtrack simulation core.

Traces come back as ``(n, 10)`` float arrays with columns ``TRACE_COLUMNS``;
trajectories as ``(n, 7)`` arrays with columns ``TRAJECTORY_COLUMNS``.
"""

from ._fdxtrack import (
    DB_FLOOR,
    ConfigError,
    ContractViolation,
    IoError,
    NoVisiblePairError,
    OrbitalElements,
    Scenario,
    __version__,
    array_response,
    fit_bias_1d,
    generate_constellation,
    load_scenario,
    matched_filter_beam,
    mix_seed,
    neighborhood_size,
    path_gain,
    run_campaign,
    run_pass,
    scenario,
    select_pair,
    si_model_ids,
    sinr_downlink_db,
    sum_se,
    trial_seed,
)

TRACE_COLUMNS = (
    "t", "ul_az", "ul_el", "dl_az", "dl_el",
    "snr_ul_db", "snr_dl_db", "inr_db", "sinr_dl_db", "sum_se",
)
TRAJECTORY_COLUMNS = ("t", "ul_az", "ul_el", "dl_az", "dl_el", "ul_range_km", "dl_range_km")
CANDIDATE_COLUMNS = ("ul_az", "ul_el", "dl_az", "dl_el", "inr_db")


def column(array, name, columns=TRACE_COLUMNS):
    """One named column of a trace, trajectory or candidate array."""
    return array[:, columns.index(name)]
