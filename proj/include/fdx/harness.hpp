// SPDX-License-Identifier: Apache-2.0
//
// fdxtrack: full-duplex beam tracking for LEO satellite ground terminals
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "fdx/channel.hpp"
#include "fdx/config.hpp"
#include "fdx/orbits.hpp"
#include "fdx/tracker.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fdx
{
    inline constexpr std::string_view kConventionalScheme = "conventional";

    struct NeighborhoodSetting
    {
        int delta_az = 2;
        int delta_el = 2;

        /// "proposed_<az>x<el>", e.g. proposed_2x2.
        std::string scheme() const;
    };

    struct SiSettings
    {
        std::string model = "iid-rayleigh";
        std::uint64_t seed = 1;
        double target_median_inr_db = 15.0;
        std::size_t calibration_pairs = 2000;
        bool redraw_per_trial = true;
    };

    struct Scenario
    {
        GroundSite site;
        std::vector<ShellSpec> shells = default_shells();
        std::uint64_t constellation_seed = 0;
        PairSearch search;
        std::vector<NeighborhoodSetting> neighborhoods{{1, 1}, {2, 2}, {3, 3}};
        double bias_search_step_deg = 0.001;
        double grid_resolution_deg = 1.0;
        ArraySetup arrays;
        double ut_tx_peak_gain_dbi = 29.0;
        double ut_rx_peak_gain_dbi = 39.7;
        LinkBudget budget = default_link_budget(UpaGeometry{}, UpaGeometry{});
        SiSettings si;
        int trials = 136;
        std::uint64_t master_seed = 2024;
        int threads = 0; // 0 = hardware concurrency

        void validate() const;
        std::vector<std::string> scheme_names() const;
    };

    /// Defaults, overlaid by `file_cfg`, overlaid by FDXTRACK__* environment variables.
    /// Unknown keys are a ConfigError. A file that defines any [[shell]] replaces the default shells.
    Scenario scenario_from_config(const ConfigMap &file_cfg,
                                  const std::function<std::optional<std::string>(const std::string &)> &getenv = {});

    Scenario load_scenario(const std::filesystem::path &path);

    /// Fully resolved key/value view; scenario_from_config(scenario_to_config(s)) == s.
    ConfigMap scenario_to_config(const Scenario &s);

    /// Documented per-trial seed derivation: splitmix64(master_seed, trial_index).
    std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index);

    /// Scenario-wide state shared by every pass: constellation and SI calibration.
    struct PreparedScenario
    {
        Scenario scenario;
        std::vector<OrbitalElements> constellation;
        double si_entry_variance = 0.0;
    };

    PreparedScenario prepare_scenario(const Scenario &s);

    struct MetricRow
    {
        double t = 0.0; // seconds since the pass start
        DirectionTuple direction{};
        Metrics metrics;
    };

    struct MetricTrace
    {
        std::string scheme;
        std::vector<MetricRow> rows;
    };

    struct PassResult
    {
        std::uint64_t pair_seed = 0;
        std::uint64_t si_seed = 0;
        SatellitePair pair;
        BiasVector bias;
        std::size_t grid_size = 0;
        std::vector<MetricTrace> traces;       // conventional first, then one per neighborhood
        std::vector<CandidateSet> candidates;  // one per neighborhood; kept only on request

        const MetricTrace &trace(std::string_view scheme) const;
    };

    struct PassOptions
    {
        bool keep_candidates = false;
    };

    /// One pair, one SI channel, every scheme. Throws NoVisiblePairError.
    PassResult run_pass(const PreparedScenario &prepared, std::uint64_t pair_seed, const PassOptions &opts = {});
    PassResult run_pass(const Scenario &scenario, std::uint64_t pair_seed, const PassOptions &opts = {});

    struct CdfSummary
    {
        std::string metric;
        std::string scheme;
        std::vector<double> values; // ascending
        std::vector<double> probs;  // i / n
        std::vector<std::pair<double, double>> quantiles; // (p, value) at 1, 5, 10, 50, 90 %

        /// Fraction of samples <= x.
        double cdf(double x) const;
        /// Smallest sample v with cdf(v) >= p.
        double quantile(double p) const;
    };

    inline constexpr std::array<std::string_view, 5> kCdfMetrics{"inr_db", "snr_dl_db", "sinr_dl_db", "snr_ul_db",
                                                                  "sum_se"};

    double metric_value(const Metrics &m, std::string_view metric);

    CdfSummary make_cdf(std::string metric, std::string scheme, std::vector<double> samples);

    /// Pools every row of every trace with the same scheme; one summary per (metric, scheme).
    std::vector<CdfSummary> summarize_traces(std::span<const MetricTrace> traces);

    struct TrialFailure
    {
        std::size_t trial = 0;
        std::uint64_t seed = 0;
        std::string message;
    };

    struct CampaignResult
    {
        std::vector<std::size_t> trial_indices; // successful trials, ascending
        std::vector<PassResult> passes;         // parallel to trial_indices
        std::vector<TrialFailure> failures;
        std::vector<CdfSummary> cdfs;
    };

    struct CampaignOptions
    {
        PassOptions pass;
        std::function<void(std::size_t done, std::size_t total)> progress;
    };

    /// Runs scenario.trials passes on a worker pool. Output depends only on the scenario.
    CampaignResult run_campaign(const Scenario &scenario, const CampaignOptions &opts = {});

    /// <dir>/<scheme>.csv per trace. Empty input is a ContractViolation; nothing is written on failure.
    void export_traces(std::span<const MetricTrace> traces, const std::filesystem::path &dir);

    /// `path` gets metric,scheme,value_db,prob; a sibling <stem>_quantiles.csv gets metric,scheme,p,value_db.
    void export_cdfs(std::span<const CdfSummary> summaries, const std::filesystem::path &path);

    std::string trace_csv(const MetricTrace &trace);
    MetricTrace read_trace_csv(const std::filesystem::path &path);

    /// Every trace CSV under `dir` (recursive, sorted by path); scheme taken from the file stem.
    std::vector<MetricTrace> read_traces(const std::filesystem::path &dir);

    /// Manifest JSON with the resolved config and all seeds; loadable as a config via load_config_file.
    void write_manifest(const std::filesystem::path &path, const Scenario &s, std::string_view command,
                        const nlohmann::json &extra = nlohmann::json::object());
} // namespace fdx
