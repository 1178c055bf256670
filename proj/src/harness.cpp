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

#include "fdx/harness.hpp"

#include "fdx/io_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#ifndef FDXTRACK_VERSION
#define FDXTRACK_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace fdx
{
    namespace
    {
        // Salts separating the independent random streams derived from si.seed.
        constexpr std::uint64_t kCalibrationDirsSalt = 0xD1E5;
        constexpr std::uint64_t kCalibrationChannelSalt = 0xCA1B;

        constexpr std::array<std::string_view, 5> kShellFields{"altitude_km", "inclination_deg", "plane_count",
                                                                "sats_per_plane", "phasing"};

        constexpr std::string_view kTraceHeader = "t,ul_az,ul_el,dl_az,dl_el,snr_ul_db,snr_dl_db,inr_db,sinr_dl_db,sum_se";

        std::string num(double v) { return fmt::format("{}", v); }

        std::string int_list(const std::vector<int> &v) { return fmt::format("[{}]", fmt::join(v, ", ")); }

        int narrow_int(const ConfigMap &cfg, const std::string &key)
        {
            const std::int64_t v = config_int(cfg, key);
            if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
                throw ConfigError(fmt::format("config key '{}' out of range", key));
            return static_cast<int>(v);
        }

        double parse_field(const std::string &cell, const fs::path &path, std::size_t line)
        {
            double v{};
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw IoError(fmt::format("{}:{}: malformed number '{}'", path.string(), line, cell));
            return v;
        }
    } // namespace

    std::string NeighborhoodSetting::scheme() const { return fmt::format("proposed_{}x{}", delta_az, delta_el); }

    void Scenario::validate() const
    {
        site.validate();
        if (shells.empty())
            throw ConfigError("scenario needs at least one shell");
        for (const auto &s : shells)
            s.validate();
        TimeHorizon{0.0, search.min_duration_s, search.step_s}.validate();
        if (!(search.mask_el_deg > 0.0 && search.mask_el_deg < 90.0))
            throw ConfigError("pass.mask_el_deg must lie in (0, 90)");
        if (!(search.scan_step_s > 0.0) || search.scan_limit_s < 0.0)
            throw ConfigError("pass.scan_step_s must be positive and pass.scan_limit_s non-negative");
        if (neighborhoods.empty())
            throw ConfigError("scenario needs at least one neighborhood setting");
        for (const auto &n : neighborhoods)
            if (n.delta_az < 0 || n.delta_el < 0)
                throw ConfigError("neighborhood extents must be non-negative");
        if (!(bias_search_step_deg > 0.0))
            throw ConfigError("tracker.bias_search_step_deg must be positive");
        Lattice{grid_resolution_deg, {}}.validate();
        arrays.tx.validate();
        arrays.rx.validate();
        if (arrays.quant.phase_bits < 0 || arrays.quant.phase_bits > 30)
            throw ConfigError("array.phase_bits must lie in [0, 30]");
        budget.validate();
        if (si.calibration_pairs == 0)
            throw ConfigError("si.calibration_pairs must be positive");
        if (!std::isfinite(si.target_median_inr_db))
            throw ConfigError("si.target_median_inr_db must be finite");
        const auto ids = si_model_ids();
        if (std::find(ids.begin(), ids.end(), si.model) == ids.end())
            throw ConfigError(fmt::format("unknown self-interference model '{}'", si.model));
        if (trials < 1)
            throw ConfigError("campaign.trials must be at least 1");
        if (threads < 0)
            throw ConfigError("campaign.threads must be non-negative");
    }

    std::vector<std::string> Scenario::scheme_names() const
    {
        std::vector<std::string> out{std::string(kConventionalScheme)};
        for (const auto &n : neighborhoods)
            out.push_back(n.scheme());
        return out;
    }

    ConfigMap scenario_to_config(const Scenario &s)
    {
        ConfigMap c;
        c["site.latitude_deg"] = num(s.site.latitude_deg);
        c["site.longitude_deg"] = num(s.site.longitude_deg);
        c["site.altitude_m"] = num(s.site.altitude_m);
        c["constellation.seed"] = fmt::format("{}", s.constellation_seed);
        for (std::size_t i = 0; i < s.shells.size(); ++i)
        {
            const auto &sh = s.shells[i];
            const std::string p = fmt::format("shell.{}.", i);
            c[p + "altitude_km"] = num(sh.altitude_km);
            c[p + "inclination_deg"] = num(sh.inclination_deg);
            c[p + "plane_count"] = fmt::format("{}", sh.plane_count);
            c[p + "sats_per_plane"] = fmt::format("{}", sh.sats_per_plane);
            c[p + "phasing"] = fmt::format("{}", sh.phasing);
        }
        c["pass.mask_el_deg"] = num(s.search.mask_el_deg);
        c["pass.duration_s"] = num(s.search.min_duration_s);
        c["pass.step_s"] = num(s.search.step_s);
        c["pass.scan_step_s"] = num(s.search.scan_step_s);
        c["pass.scan_limit_s"] = num(s.search.scan_limit_s);

        std::vector<int> daz, del;
        for (const auto &n : s.neighborhoods)
        {
            daz.push_back(n.delta_az);
            del.push_back(n.delta_el);
        }
        c["tracker.delta_az_deg"] = int_list(daz);
        c["tracker.delta_el_deg"] = int_list(del);
        c["tracker.bias_search_step_deg"] = num(s.bias_search_step_deg);
        c["tracker.resolution_deg"] = num(s.grid_resolution_deg);

        c["array.tx_rows"] = fmt::format("{}", s.arrays.tx.rows);
        c["array.tx_cols"] = fmt::format("{}", s.arrays.tx.cols);
        c["array.rx_rows"] = fmt::format("{}", s.arrays.rx.rows);
        c["array.rx_cols"] = fmt::format("{}", s.arrays.rx.cols);
        c["array.spacing_wavelengths"] = num(s.arrays.tx.spacing_wavelengths);
        c["array.phase_bits"] = fmt::format("{}", s.arrays.quant.phase_bits);

        c["link.sat_tx_power_dbm"] = num(s.budget.sat_tx_power_dbm);
        c["link.sat_tx_gain_dbi"] = num(s.budget.sat_tx_gain_dbi);
        c["link.sat_rx_gain_dbi"] = num(s.budget.sat_rx_gain_dbi);
        c["link.sat_noise_dbm"] = num(s.budget.sat_noise_dbm);
        c["link.ut_tx_power_dbm"] = num(s.budget.ut_tx_power_dbm);
        c["link.ut_noise_dbm"] = num(s.budget.ut_noise_dbm);
        c["link.carrier_hz"] = num(s.budget.carrier_hz);
        c["link.ut_tx_peak_gain_dbi"] = num(s.ut_tx_peak_gain_dbi);
        c["link.ut_rx_peak_gain_dbi"] = num(s.ut_rx_peak_gain_dbi);

        c["si.model"] = s.si.model;
        c["si.seed"] = fmt::format("{}", s.si.seed);
        c["si.target_median_inr_db"] = num(s.si.target_median_inr_db);
        c["si.calibration_pairs"] = fmt::format("{}", s.si.calibration_pairs);
        c["si.redraw_per_trial"] = s.si.redraw_per_trial ? "true" : "false";

        c["campaign.trials"] = fmt::format("{}", s.trials);
        c["campaign.master_seed"] = fmt::format("{}", s.master_seed);
        c["campaign.threads"] = fmt::format("{}", s.threads);
        return c;
    }

    Scenario scenario_from_config(const ConfigMap &file_cfg,
                                  const std::function<std::optional<std::string>(const std::string &)> &getenv)
    {
        ConfigMap cfg = scenario_to_config(Scenario{});
        const bool file_shells = std::any_of(file_cfg.begin(), file_cfg.end(),
                                             [](const auto &kv) { return kv.first.starts_with("shell."); });
        if (file_shells)
            std::erase_if(cfg, [](const auto &kv) { return kv.first.starts_with("shell."); });

        std::set<int> shell_ids;
        for (const auto &[key, value] : file_cfg)
        {
            if (key.starts_with("shell."))
            {
                const std::size_t dot = key.find('.', 6);
                const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
                int idx = -1;
                const std::string idx_text = key.substr(6, dot == std::string::npos ? 0 : dot - 6);
                auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
                if (ec != std::errc() || idx < 0 ||
                    std::find(kShellFields.begin(), kShellFields.end(), field) == kShellFields.end())
                    throw ConfigError(fmt::format("unknown config key '{}'", key));
                shell_ids.insert(idx);
            }
            else if (!cfg.contains(key))
                throw ConfigError(fmt::format("unknown config key '{}'", key));
            cfg[key] = value;
        }
        if (!shell_ids.empty() && (*shell_ids.begin() != 0 || *shell_ids.rbegin() + 1 != static_cast<int>(shell_ids.size())))
            throw ConfigError("[[shell]] tables must be numbered contiguously from 0");

        apply_env_overrides(cfg, getenv);

        Scenario s;
        s.site = {config_double(cfg, "site.latitude_deg"), config_double(cfg, "site.longitude_deg"),
                  config_double(cfg, "site.altitude_m")};
        s.constellation_seed = config_uint(cfg, "constellation.seed");
        s.shells.clear();
        for (int i = 0;; ++i)
        {
            const std::string p = fmt::format("shell.{}.", i);
            if (!cfg.contains(p + "altitude_km") && !cfg.contains(p + "plane_count"))
                break;
            s.shells.push_back({config_double(cfg, p + "altitude_km"), config_double(cfg, p + "inclination_deg"),
                                narrow_int(cfg, p + "plane_count"), narrow_int(cfg, p + "sats_per_plane"),
                                narrow_int(cfg, p + "phasing")});
        }

        s.search.mask_el_deg = config_double(cfg, "pass.mask_el_deg");
        s.search.min_duration_s = config_double(cfg, "pass.duration_s");
        s.search.step_s = config_double(cfg, "pass.step_s");
        s.search.scan_step_s = config_double(cfg, "pass.scan_step_s");
        s.search.scan_limit_s = config_double(cfg, "pass.scan_limit_s");

        const auto daz = config_int_list(cfg, "tracker.delta_az_deg");
        const auto del = config_int_list(cfg, "tracker.delta_el_deg");
        if (daz.size() != del.size())
            throw ConfigError("tracker.delta_az_deg and tracker.delta_el_deg must have the same length");
        s.neighborhoods.clear();
        for (std::size_t i = 0; i < daz.size(); ++i)
            s.neighborhoods.push_back({static_cast<int>(daz[i]), static_cast<int>(del[i])});
        s.bias_search_step_deg = config_double(cfg, "tracker.bias_search_step_deg");
        s.grid_resolution_deg = config_double(cfg, "tracker.resolution_deg");

        const double spacing = config_double(cfg, "array.spacing_wavelengths");
        s.arrays.tx = {narrow_int(cfg, "array.tx_rows"), narrow_int(cfg, "array.tx_cols"), spacing};
        s.arrays.rx = {narrow_int(cfg, "array.rx_rows"), narrow_int(cfg, "array.rx_cols"), spacing};
        s.arrays.quant.phase_bits = narrow_int(cfg, "array.phase_bits");
        s.arrays.tx.validate();
        s.arrays.rx.validate();

        s.budget.sat_tx_power_dbm = config_double(cfg, "link.sat_tx_power_dbm");
        s.budget.sat_tx_gain_dbi = config_double(cfg, "link.sat_tx_gain_dbi");
        s.budget.sat_rx_gain_dbi = config_double(cfg, "link.sat_rx_gain_dbi");
        s.budget.sat_noise_dbm = config_double(cfg, "link.sat_noise_dbm");
        s.budget.ut_tx_power_dbm = config_double(cfg, "link.ut_tx_power_dbm");
        s.budget.ut_noise_dbm = config_double(cfg, "link.ut_noise_dbm");
        s.budget.carrier_hz = config_double(cfg, "link.carrier_hz");
        s.ut_tx_peak_gain_dbi = config_double(cfg, "link.ut_tx_peak_gain_dbi");
        s.ut_rx_peak_gain_dbi = config_double(cfg, "link.ut_rx_peak_gain_dbi");
        s.budget.ut_tx_elem_gain_dbi = element_gain_for_peak(s.arrays.tx, s.ut_tx_peak_gain_dbi);
        s.budget.ut_rx_elem_gain_dbi = element_gain_for_peak(s.arrays.rx, s.ut_rx_peak_gain_dbi);

        s.si.model = config_string(cfg, "si.model");
        s.si.seed = config_uint(cfg, "si.seed");
        s.si.target_median_inr_db = config_double(cfg, "si.target_median_inr_db");
        s.si.calibration_pairs = config_uint(cfg, "si.calibration_pairs");
        s.si.redraw_per_trial = config_bool(cfg, "si.redraw_per_trial");

        s.trials = narrow_int(cfg, "campaign.trials");
        s.master_seed = config_uint(cfg, "campaign.master_seed");
        s.threads = narrow_int(cfg, "campaign.threads");

        s.validate();
        return s;
    }

    Scenario load_scenario(const fs::path &path) { return scenario_from_config(load_config_file(path)); }

    std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index)
    {
        return mix_seed(master_seed, static_cast<std::uint64_t>(trial_index));
    }

    PreparedScenario prepare_scenario(const Scenario &s)
    {
        s.validate();
        PreparedScenario p;
        p.scenario = s;
        p.constellation = generate_constellation(s.shells, s.constellation_seed);
        if (s.si.model != "zero")
        {
            const auto dirs = sample_direction_pairs(s.si.calibration_pairs, 90.0 - s.search.mask_el_deg,
                                                     mix_seed(s.si.seed, kCalibrationDirsSalt));
            p.si_entry_variance = calibrate_si(s.budget, s.arrays.tx, s.arrays.rx, dirs, s.si.target_median_inr_db,
                                               mix_seed(s.si.seed, kCalibrationChannelSalt), s.arrays.quant);
        }
        return p;
    }

    const MetricTrace &PassResult::trace(std::string_view scheme) const
    {
        for (const auto &t : traces)
            if (t.scheme == scheme)
                return t;
        throw ContractViolation(fmt::format("pass has no scheme '{}'", scheme));
    }

    namespace
    {
        MetricTrace to_trace(std::string scheme, const BeamSchedule &sched, double t0)
        {
            MetricTrace tr{std::move(scheme), {}};
            tr.rows.reserve(sched.entries.size());
            for (const auto &e : sched.entries)
                tr.rows.push_back({e.t - t0, e.direction, e.metrics});
            return tr;
        }
    } // namespace

    PassResult run_pass(const PreparedScenario &prepared, std::uint64_t pair_seed, const PassOptions &opts)
    {
        const Scenario &s = prepared.scenario;
        PassResult r;
        r.pair_seed = pair_seed;
        r.pair = select_pair(prepared.constellation, s.site, s.search, pair_seed);
        r.si_seed = s.si.redraw_per_trial ? mix_seed(s.si.seed, pair_seed) : s.si.seed;

        const Trajectory &traj = r.pair.trajectory;
        const double t0 = r.pair.horizon.t_start;
        const SiChannel si =
            build_si_channel(s.si.model, s.arrays.rx.size(), s.arrays.tx.size(), prepared.si_entry_variance, r.si_seed);
        const PassChannels channels = build_pass_channels(traj, s.budget, s.arrays);

        r.traces.push_back(to_trace(std::string(kConventionalScheme),
                                    track_conventional(traj, si, s.budget, s.arrays, channels), t0));

        r.bias = fit_bias(traj, s.bias_search_step_deg, s.grid_resolution_deg);
        const DirectionGrid grid = build_grid(traj, r.bias, s.grid_resolution_deg);
        r.grid_size = grid.points.size();
        for (const auto &n : s.neighborhoods)
        {
            CandidateSet cands = measure_candidates(build_candidates(grid, build_neighborhood(n.delta_az, n.delta_el)),
                                                    si, s.budget, s.arrays);
            r.traces.push_back(to_trace(n.scheme(), select_beams(traj, cands, s.budget, s.arrays, channels), t0));
            if (opts.keep_candidates)
                r.candidates.push_back(std::move(cands));
        }
        return r;
    }

    PassResult run_pass(const Scenario &scenario, std::uint64_t pair_seed, const PassOptions &opts)
    {
        return run_pass(prepare_scenario(scenario), pair_seed, opts);
    }

    double CdfSummary::cdf(double x) const
    {
        if (values.empty())
            return 0.0;
        const auto n = std::upper_bound(values.begin(), values.end(), x) - values.begin();
        return static_cast<double>(n) / static_cast<double>(values.size());
    }

    double CdfSummary::quantile(double p) const
    {
        if (values.empty())
            throw ContractViolation("quantile of an empty CDF");
        const double n = static_cast<double>(values.size());
        auto k = static_cast<std::ptrdiff_t>(std::ceil(p * n - 1e-9));
        k = std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(values.size()));
        return values[static_cast<std::size_t>(k - 1)];
    }

    double metric_value(const Metrics &m, std::string_view metric)
    {
        if (metric == "inr_db")
            return m.inr_db;
        if (metric == "snr_dl_db")
            return m.snr_dl_db;
        if (metric == "sinr_dl_db")
            return m.sinr_dl_db;
        if (metric == "snr_ul_db")
            return m.snr_ul_db;
        if (metric == "sum_se")
            return m.sum_se_bps_hz;
        throw ContractViolation(fmt::format("unknown metric '{}'", metric));
    }

    CdfSummary make_cdf(std::string metric, std::string scheme, std::vector<double> samples)
    {
        if (samples.empty())
            throw ContractViolation("CDF needs at least one sample");
        CdfSummary c;
        c.metric = std::move(metric);
        c.scheme = std::move(scheme);
        std::sort(samples.begin(), samples.end());
        c.values = std::move(samples);
        const double n = static_cast<double>(c.values.size());
        c.probs.resize(c.values.size());
        for (std::size_t i = 0; i < c.values.size(); ++i)
            c.probs[i] = static_cast<double>(i + 1) / n;
        for (double p : {0.01, 0.05, 0.10, 0.50, 0.90})
            c.quantiles.emplace_back(p, c.quantile(p));
        return c;
    }

    std::vector<CdfSummary> summarize_traces(std::span<const MetricTrace> traces)
    {
        // Scheme order follows first appearance.
        std::vector<std::string> schemes;
        std::map<std::string, std::vector<const MetricTrace *>> by_scheme;
        for (const auto &t : traces)
        {
            if (!by_scheme.contains(t.scheme))
                schemes.push_back(t.scheme);
            by_scheme[t.scheme].push_back(&t);
        }
        std::vector<CdfSummary> out;
        for (std::string_view metric : kCdfMetrics)
            for (const auto &scheme : schemes)
            {
                std::vector<double> samples;
                for (const MetricTrace *t : by_scheme[scheme])
                    for (const auto &row : t->rows)
                        samples.push_back(metric_value(row.metrics, metric));
                if (!samples.empty())
                    out.push_back(make_cdf(std::string(metric), scheme, std::move(samples)));
            }
        return out;
    }

    CampaignResult run_campaign(const Scenario &scenario, const CampaignOptions &opts)
    {
        const PreparedScenario prepared = prepare_scenario(scenario);
        const auto total = static_cast<std::size_t>(scenario.trials);

        std::vector<std::optional<PassResult>> results(total);
        std::vector<std::string> errors(total);
        std::vector<bool> visibility_failure(total, false);

        std::atomic<std::size_t> next{0};
        std::size_t done = 0;
        std::mutex progress_mutex;
        auto worker = [&]
        {
            for (std::size_t i = next++; i < total; i = next++)
            {
                try
                {
                    results[i] = run_pass(prepared, trial_seed(scenario.master_seed, i), opts.pass);
                }
                catch (const NoVisiblePairError &e)
                {
                    errors[i] = e.what();
                    visibility_failure[i] = true;
                }
                catch (const std::exception &e)
                {
                    errors[i] = e.what();
                }
                if (opts.progress)
                {
                    std::lock_guard lock(progress_mutex);
                    opts.progress(++done, total);
                }
            }
        };

        std::size_t n_threads = scenario.threads > 0 ? static_cast<std::size_t>(scenario.threads)
                                                     : std::max(1u, std::thread::hardware_concurrency());
        n_threads = std::min(n_threads, total);
        {
            std::vector<std::jthread> pool;
            for (std::size_t k = 1; k < n_threads; ++k)
                pool.emplace_back(worker);
            worker();
        }

        CampaignResult out;
        std::vector<MetricTrace> pooled;
        for (std::size_t i = 0; i < total; ++i)
        {
            if (results[i])
            {
                out.trial_indices.push_back(i);
                for (const auto &t : results[i]->traces)
                    pooled.push_back(t);
                out.passes.push_back(std::move(*results[i]));
            }
            else
                out.failures.push_back({i, trial_seed(scenario.master_seed, i), errors[i]});
        }
        if (out.passes.empty())
        {
            const std::string msg = fmt::format("all {} trials failed; first: {}", total, errors.front());
            if (std::all_of(visibility_failure.begin(), visibility_failure.end(), [](bool b) { return b; }))
                throw NoVisiblePairError(msg);
            throw std::runtime_error(msg);
        }
        out.cdfs = summarize_traces(pooled);
        return out;
    }

    std::string trace_csv(const MetricTrace &trace)
    {
        std::string body(kTraceHeader);
        body += '\n';
        for (const auto &r : trace.rows)
            body += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.t,
                                r.direction[kUlAz], r.direction[kUlEl], r.direction[kDlAz], r.direction[kDlEl],
                                r.metrics.snr_ul_db, r.metrics.snr_dl_db, r.metrics.inr_db, r.metrics.sinr_dl_db,
                                r.metrics.sum_se_bps_hz);
        return body;
    }

    void export_traces(std::span<const MetricTrace> traces, const fs::path &dir)
    {
        if (traces.empty())
            throw ContractViolation("export_traces: nothing to export");
        std::vector<std::pair<fs::path, std::string>> files;
        std::set<std::string> seen;
        for (const auto &t : traces)
        {
            if (t.scheme.empty() || !seen.insert(t.scheme).second)
                throw ContractViolation(fmt::format("export_traces: empty or duplicate scheme '{}'", t.scheme));
            files.emplace_back(dir / (t.scheme + ".csv"), trace_csv(t));
        }
        write_files_atomic(files);
    }

    void export_cdfs(std::span<const CdfSummary> summaries, const fs::path &path)
    {
        if (summaries.empty())
            throw ContractViolation("export_cdfs: nothing to export");
        std::string cdf = "metric,scheme,value_db,prob\n";
        std::string quant = "metric,scheme,p,value_db\n";
        for (const auto &s : summaries)
        {
            for (std::size_t i = 0; i < s.values.size(); ++i)
                cdf += fmt::format("{},{},{:.6f},{:.6f}\n", s.metric, s.scheme, s.values[i], s.probs[i]);
            for (const auto &[p, v] : s.quantiles)
                quant += fmt::format("{},{},{:.2f},{:.6f}\n", s.metric, s.scheme, p, v);
        }
        const fs::path qpath = path.parent_path() / (path.stem().string() + "_quantiles.csv");
        write_files_atomic({{path, std::move(cdf)}, {qpath, std::move(quant)}});
    }

    MetricTrace read_trace_csv(const fs::path &path)
    {
        const std::string text = read_file(path);
        MetricTrace tr;
        tr.scheme = path.stem().string();
        std::size_t pos = 0, line_no = 0;
        while (pos < text.size())
        {
            const std::size_t nl = text.find('\n', pos);
            const std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
            pos = nl == std::string::npos ? text.size() : nl + 1;
            ++line_no;
            if (line_no == 1)
            {
                if (line != kTraceHeader)
                    throw IoError(fmt::format("{}: not a trace CSV (unexpected header)", path.string()));
                continue;
            }
            if (line.empty())
                continue;
            const auto cells = split_csv_line(line);
            if (cells.size() != 10)
                throw IoError(fmt::format("{}:{}: expected 10 columns, got {}", path.string(), line_no, cells.size()));
            std::array<double, 10> v{};
            for (std::size_t k = 0; k < 10; ++k)
                v[k] = parse_field(cells[k], path, line_no);
            MetricRow row;
            row.t = v[0];
            row.direction = {v[1], v[2], v[3], v[4]};
            row.metrics = {v[5], v[6], v[7], v[8], v[9]};
            tr.rows.push_back(row);
        }
        if (line_no == 0)
            throw IoError(fmt::format("{}: empty file", path.string()));
        return tr;
    }

    std::vector<MetricTrace> read_traces(const fs::path &dir)
    {
        std::error_code ec;
        if (!fs::is_directory(dir, ec))
            throw IoError(fmt::format("'{}' is not a directory", dir.string()));
        std::vector<fs::path> paths;
        for (const auto &entry : fs::recursive_directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".csv")
            {
                const std::string head = read_file(entry.path()).substr(0, kTraceHeader.size() + 1);
                if (head.starts_with(kTraceHeader) &&
                    (head.size() == kTraceHeader.size() || head.back() == '\n' || head.back() == '\r'))
                    paths.push_back(entry.path());
            }
        std::sort(paths.begin(), paths.end());
        std::vector<MetricTrace> out;
        for (const auto &p : paths)
            out.push_back(read_trace_csv(p));
        return out;
    }

    void write_manifest(const fs::path &path, const Scenario &s, std::string_view command, const nlohmann::json &extra)
    {
        nlohmann::json j;
        j["generator"] = fmt::format("fdxtrack {}", FDXTRACK_VERSION);
        j["command"] = std::string(command);
        j["config"] = nlohmann::json::object();
        for (const auto &[k, v] : scenario_to_config(s))
            j["config"][k] = v;
        j["trial_seed_derivation"] = "splitmix64(master_seed + 0x9E3779B97F4A7C15 * (trial_index + 1))";
        for (const auto &[k, v] : extra.items())
            j[k] = v;
        write_file_atomic(path, j.dump(2) + "\n");
    }
} // namespace fdx
