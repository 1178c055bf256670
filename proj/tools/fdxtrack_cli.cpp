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

// fdxtrack command line.
//
//   fdxtrack gen-constellation --config F --out F
//   fdxtrack track    --config F --pair-seed N --out DIR [--candidates]
//   fdxtrack campaign --config F [--trials N] --out DIR
//   fdxtrack cdf      --in DIR --out F
//
// Exit codes: 0 ok, 2 config error, 3 no visible pair, 4 I/O error, 1 anything else.

#include "fdx/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

namespace fs = std::filesystem;

namespace
{
    enum ExitCode : int
    {
        kOk = 0,
        kFailure = 1,
        kConfig = 2,
        kNoPair = 3,
        kIo = 4
    };

    fdx::Scenario load(const std::string &config)
    {
        return config.empty() ? fdx::scenario_from_config({}) : fdx::load_scenario(config);
    }

    int cmd_gen_constellation(const std::string &config, const std::string &out)
    {
        const fdx::Scenario s = load(config);
        const auto constellation = fdx::generate_constellation(s.shells, s.constellation_seed);
        fdx::write_constellation_csv(constellation, out);
        std::clog << fmt::format("wrote {} satellites to {}\n", constellation.size(), out);
        return kOk;
    }

    int cmd_track(const std::string &config, std::uint64_t pair_seed, const fs::path &out, bool candidates)
    {
        const fdx::Scenario s = load(config);
        const fdx::PassResult r = fdx::run_pass(s, pair_seed, {.keep_candidates = candidates});

        fdx::export_traces(r.traces, out);
        fdx::write_trajectory_csv(r.pair.trajectory, out / "trajectory.csv");

        nlohmann::json extra;
        extra["pair_seed"] = r.pair_seed;
        extra["si_seed"] = r.si_seed;
        extra["ul_sat"] = r.pair.ul_sat;
        extra["dl_sat"] = r.pair.dl_sat;
        extra["horizon_start_s"] = r.pair.horizon.t_start;
        extra["bias_deg"] = r.bias.beta;
        extra["grid_size"] = r.grid_size;
        for (std::size_t i = 0; i < r.candidates.size(); ++i)
        {
            const std::string scheme = s.neighborhoods[i].scheme();
            extra["candidates"][scheme] = {{"count", r.candidates[i].size()}, {"clipped", r.candidates[i].clipped}};
            fdx::write_candidates_json(r.candidates[i], out / ("candidates_" + scheme + ".json"));
        }
        fdx::write_manifest(out / "manifest.json", s, fmt::format("track --pair-seed {}", pair_seed), extra);

        for (const auto &t : r.traces)
        {
            std::vector<double> inr;
            for (const auto &row : t.rows)
                inr.push_back(row.metrics.inr_db);
            std::clog << fmt::format("{:>16}: median INR {:7.2f} dB\n", t.scheme, fdx::median(inr));
        }
        return kOk;
    }

    int cmd_campaign(const std::string &config, int trials, int threads, const fs::path &out, bool quiet)
    {
        fdx::Scenario s = load(config);
        if (trials > 0)
            s.trials = trials;
        if (threads >= 0)
            s.threads = threads;
        s.validate();

        fdx::CampaignOptions opts;
        if (!quiet)
            opts.progress = [](std::size_t done, std::size_t total)
            { std::clog << fmt::format("\rtrial {}/{}", done, total) << (done == total ? "\n" : "") << std::flush; };
        const fdx::CampaignResult r = fdx::run_campaign(s, opts);

        for (std::size_t k = 0; k < r.passes.size(); ++k)
            fdx::export_traces(r.passes[k].traces, out / "traces" / fmt::format("trial_{:04d}", r.trial_indices[k]));
        fdx::export_cdfs(r.cdfs, out / "cdf.csv");

        nlohmann::json extra;
        extra["trial_seeds"] = nlohmann::json::array();
        for (int i = 0; i < s.trials; ++i)
            extra["trial_seeds"].push_back(fdx::trial_seed(s.master_seed, static_cast<std::size_t>(i)));
        extra["failures"] = nlohmann::json::array();
        for (const auto &f : r.failures)
        {
            extra["failures"].push_back({{"trial", f.trial}, {"seed", f.seed}, {"message", f.message}});
            std::clog << fmt::format("trial {} failed: {}\n", f.trial, f.message);
        }
        fdx::write_manifest(out / "manifest.json", s, "campaign", extra);

        for (const auto &c : r.cdfs)
            if (c.metric == "inr_db")
                std::clog << fmt::format("{:>16}: median INR {:7.2f} dB, P(INR < 0 dB) = {:.3f}\n", c.scheme,
                                         c.quantile(0.5), c.cdf(std::nextafter(0.0, -1.0)));
        return kOk;
    }

    int cmd_cdf(const fs::path &in, const fs::path &out)
    {
        const auto traces = fdx::read_traces(in);
        if (traces.empty())
            throw fdx::IoError(fmt::format("no trace CSVs found under '{}'", in.string()));
        fdx::export_cdfs(fdx::summarize_traces(traces), out);
        std::clog << fmt::format("pooled {} traces into {}\n", traces.size(), out.string());
        return kOk;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Full-duplex LEO beam tracking simulator"};
    app.require_subcommand(1);

    std::string config, out_file, out_dir, in_dir;
    std::uint64_t pair_seed = 0;
    int trials = 0, threads = -1;
    bool candidates = false, quiet = false;

    auto *gen = app.add_subcommand("gen-constellation", "Write the constellation element sets as CSV");
    gen->add_option("--config", config, "Scenario file (.toml or manifest .json)");
    gen->add_option("--out", out_file, "Output CSV")->required();

    auto *track = app.add_subcommand("track", "Run one pass and export per-scheme traces");
    track->add_option("--config", config, "Scenario file (.toml or manifest .json)");
    track->add_option("--pair-seed", pair_seed, "Seed for pair selection")->required();
    track->add_option("--out", out_dir, "Output directory")->required();
    track->add_flag("--candidates", candidates, "Also export candidate sets with measured INR as JSON");

    auto *campaign = app.add_subcommand("campaign", "Run many passes and export pooled CDFs");
    campaign->add_option("--config", config, "Scenario file (.toml or manifest .json)");
    campaign->add_option("--trials", trials, "Override campaign.trials")->check(CLI::PositiveNumber);
    campaign->add_option("--threads", threads, "Override campaign.threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    campaign->add_option("--out", out_dir, "Output directory")->required();
    campaign->add_flag("--quiet", quiet, "No progress output");

    auto *cdf = app.add_subcommand("cdf", "Pool trace CSVs under a directory into CDFs");
    cdf->add_option("--in", in_dir, "Directory searched recursively for trace CSVs")->required();
    cdf->add_option("--out", out_file, "Output CDF CSV")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return kConfig;
    }

    try
    {
        if (*gen)
            return cmd_gen_constellation(config, out_file);
        if (*track)
            return cmd_track(config, pair_seed, out_dir, candidates);
        if (*campaign)
            return cmd_campaign(config, trials, threads, out_dir, quiet);
        if (*cdf)
            return cmd_cdf(in_dir, out_file);
    }
    catch (const fdx::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    }
    catch (const fdx::NoVisiblePairError &e)
    {
        std::cerr << e.what() << "\n";
        return kNoPair;
    }
    catch (const fdx::IoError &e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
