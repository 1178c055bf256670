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


#include <doctest.h>

#include "fdx/io_util.hpp"
#include "fdx/orbits.hpp"
#include "fdx/tracker.hpp"

#include <json.hpp>

#include <filesystem>
#include <random>
#include <set>

using namespace fdx;

namespace
{
    const ArraySetup kSmallArrays{{4, 4, 0.5}, {4, 4, 0.5}, {}};

    // Straight-line pass in angle space.
    Trajectory synthetic_pass(std::size_t n, DirectionTuple start, DirectionTuple slope)
    {
        Trajectory tr;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double t = static_cast<double>(i);
            tr.push_back({t, wrap_azimuth_deg(start[0] + slope[0] * t), start[1] + slope[1] * t,
                          wrap_azimuth_deg(start[2] + slope[2] * t), start[3] + slope[3] * t, 700.0 + t, 900.0 - t});
        }
        return tr;
    }

    double circular(double a, double b) { return std::abs(wrap_azimuth_deg(a - b)); }
} // namespace

TEST_CASE("bias fit recovers a constant fractional offset")
{
    const std::vector<double> angles{10.3, -4.7, 33.3, 0.3, 88.3};
    const double b = fit_bias_1d(angles);
    CHECK(b == doctest::Approx(-0.3).epsilon(1e-9));
    CHECK(bias_objective(angles, b) < 1e-20);
}

TEST_CASE("bias fit on an aligned stream is zero")
{
    const std::vector<double> angles{1.0, 2.0, -7.0, 45.0};
    CHECK(std::abs(fit_bias_1d(angles)) < 1e-9);
}

TEST_CASE("bias fit tie goes to the smallest beta")
{
    // Half-integer angles fit equally well at -0.5 and +0.5.
    const std::vector<double> angles{0.5, 1.5, -2.5};
    CHECK(fit_bias_1d(angles) == doctest::Approx(-0.5));
}

TEST_CASE("bias fit is the exhaustive minimizer over its search lattice")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> a(-180.0, 180.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        std::vector<double> angles(50);
        for (auto &x : angles)
            x = a(rng);
        const double b = fit_bias_1d(angles, 0.01);
        CHECK(b >= -0.5);
        CHECK(b <= 0.5 + 1e-12);
        const double best = bias_objective(angles, b);
        CHECK(best <= bias_objective(angles, 0.0) + 1e-12);
        for (int i = 0; i <= 100; ++i)
            CHECK(best <= bias_objective(angles, -0.5 + 0.01 * i) + 1e-12);
    }
    CHECK_THROWS_AS(fit_bias_1d(std::vector<double>{}), ContractViolation);
    CHECK_THROWS_AS(fit_bias_1d(std::vector<double>{1.0}, 0.0), ContractViolation);
}

TEST_CASE("fit_bias works per axis")
{
    const Trajectory tr = synthetic_pass(30, {10.2, 20.4, -30.1, 40.0}, {0.0, 0.0, 0.0, 0.0});
    const BiasVector b = fit_bias(tr);
    CHECK(b[kUlAz] == doctest::Approx(-0.2));
    CHECK(b[kUlEl] == doctest::Approx(-0.4));
    CHECK(b[kDlAz] == doctest::Approx(0.1));
    CHECK(std::abs(b[kDlEl]) < 1e-9);
}

TEST_CASE("lattice quantization error is at most half a step")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> az(-180.0, 180.0), el(0.0, 90.0), beta(-0.5, 0.5);
    for (int i = 0; i < 2000; ++i)
    {
        Lattice lat{1.0, {{beta(rng), beta(rng), beta(rng), beta(rng)}}};
        const DirectionTuple w{az(rng), el(rng), az(rng), el(rng)};
        const LatticePoint p = lat.quantize(w);
        const DirectionTuple q = lat.direction(p);
        CHECK(circular(q[kUlAz], w[kUlAz]) <= 0.5 + 1e-9);
        CHECK(circular(q[kDlAz], w[kDlAz]) <= 0.5 + 1e-9);
        CHECK(std::abs(q[kUlEl] - w[kUlEl]) <= 0.5 + 1e-9);
        CHECK(std::abs(q[kDlEl] - w[kDlEl]) <= 0.5 + 1e-9);
        CHECK(q[kUlAz] >= -180.0);
        CHECK(q[kUlAz] < 180.0);
        // canonical form is a fixed point
        CHECK(lat.canonical(p) == p);
        CHECK(lat.quantize(q) == p);
    }
}

TEST_CASE("canonical azimuth index wraps modulo 360")
{
    Lattice lat;
    CHECK(lat.canonical({180, 0, -181, 0}) == LatticePoint{-180, 0, 179, 0});
    CHECK(lat.canonical({540, 5, 360, 7}) == LatticePoint{-180, 5, 0, 7});
    Lattice half{0.5, {}};
    CHECK(half.azimuth_period() == 720);
    CHECK_THROWS_AS((Lattice{0.7, {}}.validate()), ConfigError);
    CHECK_THROWS_AS((Lattice{1.0, {{0.6, 0, 0, 0}}}.validate()), ContractViolation);
}

TEST_CASE("neighborhood sizes and ordering")
{
    for (int d = 0; d <= 3; ++d)
    {
        const Neighborhood n = build_neighborhood(d, d);
        const std::size_t side = static_cast<std::size_t>(2 * d + 1);
        CHECK(n.offsets.size() == side * side * side * side);
        CHECK(std::is_sorted(n.offsets.begin(), n.offsets.end()));
        CHECK(std::adjacent_find(n.offsets.begin(), n.offsets.end()) == n.offsets.end());
    }
    CHECK(build_neighborhood(0, 0).offsets.front() == LatticePoint{0, 0, 0, 0});
    CHECK(build_neighborhood(1, 2).offsets.size() == 9 * 25);
    CHECK(build_neighborhood(2, 2).offsets.size() == 625);
    CHECK_THROWS_AS(build_neighborhood(-1, 0), ContractViolation);
}

TEST_CASE("candidates equal a brute-force Minkowski sum")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> az(-180.0, 180.0), el(0.0, 60.0), rate(-0.3, 0.3);
    for (int trial = 0; trial < 15; ++trial)
    {
        const Trajectory tr = synthetic_pass(40, {az(rng), el(rng), az(rng), el(rng)},
                                             {rate(rng), rate(rng), rate(rng), rate(rng)});
        // keep elevations non-negative
        Trajectory clean;
        for (auto s : tr)
        {
            s.ul_el = std::abs(s.ul_el);
            s.dl_el = std::abs(s.dl_el);
            clean.push_back(s);
        }
        const BiasVector bias = fit_bias(clean);
        const DirectionGrid grid = build_grid(clean, bias);
        const int d = trial % 3 + 1;
        const CandidateSet cs = build_candidates(grid, build_neighborhood(d, d));

        // Oracle on rounded angle tuples.
        std::set<std::array<long, 4>> expected;
        std::set<std::array<long, 4>> dropped;
        for (const auto &g : grid.points)
        {
            const DirectionTuple base = grid.lattice.direction(g);
            for (int a = -d; a <= d; ++a)
                for (int b = -d; b <= d; ++b)
                    for (int c = -d; c <= d; ++c)
                        for (int e = -d; e <= d; ++e)
                        {
                            const double ua = wrap_azimuth_deg(base[0] + a), ue = base[1] + b;
                            const double da = wrap_azimuth_deg(base[2] + c), de = base[3] + e;
                            const std::array<long, 4> key{std::lround(ua * 1e6), std::lround(ue * 1e6),
                                                          std::lround(da * 1e6), std::lround(de * 1e6)};
                            const bool vis = ue >= -1e-9 && ue <= 90.0 + 1e-9 && de >= -1e-9 && de <= 90.0 + 1e-9;
                            (vis ? expected : dropped).insert(key);
                        }
        }
        std::set<std::array<long, 4>> got;
        for (std::size_t i = 0; i < cs.size(); ++i)
        {
            const DirectionTuple x = cs.direction(i);
            got.insert({std::lround(x[0] * 1e6), std::lround(x[1] * 1e6), std::lround(x[2] * 1e6),
                        std::lround(x[3] * 1e6)});
        }
        CHECK(got.size() == cs.size());
        CHECK(got == expected);
        CHECK(cs.clipped == dropped.size());
        CHECK(std::is_sorted(cs.points.begin(), cs.points.end()));
        for (const auto &g : grid.points)
            CHECK(cs.find(g).has_value());
    }
}

TEST_CASE("candidate sets nest as the neighborhood grows")
{
    const Trajectory tr = synthetic_pass(60, {178.6, 1.2, -20.0, 30.0}, {0.05, 0.1, -0.2, 0.05});
    const DirectionGrid grid = build_grid(tr, fit_bias(tr));
    const CandidateSet c1 = build_candidates(grid, build_neighborhood(1, 1));
    const CandidateSet c2 = build_candidates(grid, build_neighborhood(2, 2));
    const CandidateSet c3 = build_candidates(grid, build_neighborhood(3, 3));
    CHECK(c1.size() < c2.size());
    CHECK(c2.size() < c3.size());
    CHECK(std::includes(c2.points.begin(), c2.points.end(), c1.points.begin(), c1.points.end()));
    CHECK(std::includes(c3.points.begin(), c3.points.end(), c2.points.begin(), c2.points.end()));
    // Elevation near 1 deg with a 3 deg neighborhood reaches below the horizon.
    CHECK(c3.clipped > 0);
    for (const auto &p : c3.points)
        CHECK(c3.lattice.visible(p));
    // Azimuth crosses the +-180 seam without duplicates.
    bool seam = false;
    for (std::size_t i = 0; i < c1.size(); ++i)
        seam = seam || c1.points[i][kUlAz] == -180;
    CHECK(seam);
}

TEST_CASE("empty grid is a contract violation")
{
    CHECK_THROWS_AS(build_candidates(DirectionGrid{}, build_neighborhood(1, 1)), ContractViolation);
    CHECK_THROWS_AS(fit_bias(Trajectory{}), ContractViolation);
}

TEST_CASE("measured INR equals a direct evaluation for every candidate")
{
    const Trajectory tr = synthetic_pass(10, {40.0, 20.0, -60.0, 25.0}, {0.1, 0.05, 0.1, -0.05});
    const DirectionGrid grid = build_grid(tr, fit_bias(tr));
    const CandidateSet cs = build_candidates(grid, build_neighborhood(1, 1));
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const SiChannel si = build_si_channel("iid-rayleigh", 16, 16, 1e-12, 3);
    CHECK_FALSE(cs.measured());
    const CandidateSet m = measure_candidates(cs, si, b, kSmallArrays);
    REQUIRE(m.measured());
    for (std::size_t i = 0; i < m.size(); ++i)
    {
        const DirectionTuple d = m.direction(i);
        const BeamWeights f = matched_filter_beam(kSmallArrays.tx, {d[0], d[1]});
        const BeamWeights w = matched_filter_beam(kSmallArrays.rx, {d[2], d[3]}, {}, BeamKind::receive);
        const double direct = from_db(inr_db(w, si, f, b));
        CHECK(std::abs(from_db(m.inr_db[i]) - direct) <= 1e-12 * direct);
    }
}

TEST_CASE("selection is the exhaustive argmax of the sum rate")
{
    const Trajectory tr = synthetic_pass(15, {-10.0, 30.0, 80.0, 15.0}, {0.2, -0.1, 0.1, 0.15});
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const SiChannel si = build_si_channel("iid-rayleigh", 16, 16, 1e-13, 17);
    const DirectionGrid grid = build_grid(tr, fit_bias(tr));
    const CandidateSet cs = measure_candidates(build_candidates(grid, build_neighborhood(1, 1)), si, b, kSmallArrays);
    const PassChannels ch = build_pass_channels(tr, b, kSmallArrays);
    const BeamSchedule sched = select_beams(tr, cs, b, kSmallArrays, ch);
    REQUIRE(sched.entries.size() == tr.size());

    for (std::size_t t = 0; t < tr.size(); ++t)
    {
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < cs.size(); ++i)
        {
            const DirectionTuple d = cs.direction(i);
            const BeamWeights f = matched_filter_beam(kSmallArrays.tx, {d[0], d[1]});
            const BeamWeights w = matched_filter_beam(kSmallArrays.rx, {d[2], d[3]}, {}, BeamKind::receive);
            const Metrics m = evaluate_metrics(snr_uplink_db(f, ch.uplink[t], b), snr_downlink_db(w, ch.downlink[t], b),
                                               cs.inr_db[i]);
            if (m.sum_se_bps_hz > best)
            {
                best = m.sum_se_bps_hz;
                arg = i;
            }
        }
        const ScheduleEntry &e = sched.entries[t];
        CHECK(e.metrics.sum_se_bps_hz == doctest::Approx(best).epsilon(1e-12));
        CHECK(*e.lattice_point == cs.points[arg]);
        const Metrics again = evaluate_metrics(e.metrics.snr_ul_db, e.metrics.snr_dl_db, e.metrics.inr_db);
        CHECK(again.sinr_dl_db == doctest::Approx(e.metrics.sinr_dl_db).epsilon(1e-12));
        CHECK(again.sum_se_bps_hz == doctest::Approx(e.metrics.sum_se_bps_hz).epsilon(1e-12));
    }
}

TEST_CASE("on-lattice pass: the proposed schedule never loses to conventional tracking")
{
    // Integer angles with zero bias put every true direction tuple in the candidate set.
    const Trajectory tr = synthetic_pass(12, {20.0, 10.0, -45.0, 30.0}, {1.0, 1.0, -1.0, 0.0});
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const PassChannels ch = build_pass_channels(tr, b, kSmallArrays);
    const DirectionGrid grid = build_grid(tr, BiasVector{});
    for (const char *model : {"iid-rayleigh", "zero"})
    {
        const SiChannel si = build_si_channel(model, 16, 16, 1e-12, 5);
        const CandidateSet cs = measure_candidates(build_candidates(grid, build_neighborhood(1, 1)), si, b,
                                                   kSmallArrays);
        const BeamSchedule prop = select_beams(tr, cs, b, kSmallArrays, ch);
        const BeamSchedule conv = track_conventional(tr, si, b, kSmallArrays, ch);
        for (std::size_t t = 0; t < tr.size(); ++t)
            CHECK(prop.entries[t].metrics.sum_se_bps_hz >= conv.entries[t].metrics.sum_se_bps_hz - 1e-12);
        if (std::string(model) == "zero")
            for (std::size_t t = 0; t < tr.size(); ++t)
            {
                CHECK(conv.entries[t].metrics.inr_db == kDbFloor);
                CHECK(prop.entries[t].metrics.sum_se_bps_hz ==
                      doctest::Approx(conv.entries[t].metrics.sum_se_bps_hz).epsilon(1e-12));
            }
    }
}

TEST_CASE("conventional tracking steers at the satellites")
{
    const Trajectory tr = synthetic_pass(5, {0.0, 10.0, 90.0, 20.0}, {0.3, 0.3, 0.3, 0.3});
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const SiChannel si = build_si_channel("iid-rayleigh", 16, 16, 1e-12, 5);
    const PassChannels ch = build_pass_channels(tr, b, kSmallArrays);
    const BeamSchedule conv = track_conventional(tr, si, b, kSmallArrays, ch);
    for (std::size_t t = 0; t < tr.size(); ++t)
    {
        const auto &e = conv.entries[t];
        CHECK(e.direction == direction_tuple(tr[t]));
        CHECK_FALSE(e.lattice_point.has_value());
        const double amp2 = path_gain(tr[t].ul_range_km, b.carrier_hz) * from_db(b.ut_tx_elem_gain_dbi);
        CHECK(e.metrics.snr_ul_db == doctest::Approx(b.ut_tx_power_dbm + b.sat_rx_gain_dbi - b.sat_noise_dbm +
                                                     10.0 * std::log10(amp2 * 16.0))
                                         .epsilon(1e-10));
    }
    PassChannels short_ch = ch;
    short_ch.uplink.pop_back();
    CHECK_THROWS_AS(track_conventional(tr, si, b, kSmallArrays, short_ch), ContractViolation);
}

TEST_CASE("unmeasured candidates cannot be scheduled")
{
    const Trajectory tr = synthetic_pass(3, {0.0, 10.0, 90.0, 20.0}, {0.0, 0.0, 0.0, 0.0});
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const CandidateSet cs = build_candidates(build_grid(tr, {}), build_neighborhood(0, 0));
    CHECK_THROWS_AS(select_beams(tr, cs, b, kSmallArrays, build_pass_channels(tr, b, kSmallArrays)),
                    ContractViolation);
}

TEST_CASE("candidate JSON records")
{
    const Trajectory tr = synthetic_pass(2, {0.0, 10.0, 90.0, 20.0}, {0.0, 0.0, 0.0, 0.0});
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const SiChannel si = build_si_channel("iid-rayleigh", 16, 16, 1e-12, 5);
    const CandidateSet cs = measure_candidates(build_candidates(build_grid(tr, {}), build_neighborhood(0, 1)), si, b,
                                               kSmallArrays);
    const auto path = std::filesystem::temp_directory_path() / "fdx_candidates_test.json";
    write_candidates_json(cs, path);
    const auto j = nlohmann::json::parse(read_file(path));
    REQUIRE(j.is_array());
    CHECK(j.size() == cs.size());
    CHECK(cs.size() == 9);
    for (std::size_t i = 0; i < cs.size(); ++i)
    {
        CHECK(j[i].size() == 5);
        CHECK(j[i]["inr_db"].get<double>() == cs.inr_db[i]);
        CHECK(j[i]["ul_el"].get<double>() == cs.direction(i)[kUlEl]);
    }
    std::filesystem::remove(path);
}

namespace
{
    Metrics candidate_metrics(const CandidateSet &cs, std::size_t i, const PassChannels &ch, std::size_t t,
                              const LinkBudget &b)
    {
        const DirectionTuple d = cs.direction(i);
        const BeamWeights f = matched_filter_beam(kSmallArrays.tx, {d[0], d[1]});
        const BeamWeights w = matched_filter_beam(kSmallArrays.rx, {d[2], d[3]}, {}, BeamKind::receive);
        return evaluate_metrics(snr_uplink_db(f, ch.uplink[t], b), snr_downlink_db(w, ch.downlink[t], b), cs.inr_db[i]);
    }
} // namespace

TEST_CASE("bias fit and grid on a propagated pass")
{
    const auto constellation = generate_constellation(default_shells(), 0);
    const SatellitePair pair = select_pair(constellation, GroundSite{}, PairSearch{}, 3);
    const Trajectory &tr = pair.trajectory;
    REQUIRE(tr.size() == 121);
    const BiasVector b = fit_bias(tr);
    const std::array<double (*)(const TrajectorySample &), 4> axis{
        [](const TrajectorySample &s) { return s.ul_az; }, [](const TrajectorySample &s) { return s.ul_el; },
        [](const TrajectorySample &s) { return s.dl_az; }, [](const TrajectorySample &s) { return s.dl_el; }};
    for (std::size_t k = 0; k < 4; ++k)
    {
        std::vector<double> a;
        for (const auto &s : tr)
            a.push_back(axis[k](s));
        CHECK(bias_objective(a, b[k]) <= bias_objective(a, 0.0));
    }
    const DirectionGrid g = build_grid(tr, b);
    CHECK(g.points.size() <= tr.size());
    for (const auto &s : tr)
        CHECK(std::binary_search(g.points.begin(), g.points.end(), g.lattice.quantize(direction_tuple(s))));
}

TEST_CASE("grid and candidate set sizes")
{
    const Trajectory still = synthetic_pass(20, {12.0, 40.0, -70.0, 45.0}, {0.0, 0.0, 0.0, 0.0});
    const DirectionGrid g1 = build_grid(still, {});
    CHECK(g1.points.size() == 1);
    CHECK(build_candidates(g1, build_neighborhood(2, 2)).size() == 625);
    CHECK(build_candidates(g1, build_neighborhood(1, 0)).size() == 9);

    const Trajectory moving = synthetic_pass(10, {12.0, 40.0, -70.0, 45.0}, {0.7, 0.4, -0.6, 0.5});
    const DirectionGrid g = build_grid(moving, fit_bias(moving));
    REQUIRE(g.points.size() > 1);
    CHECK(build_candidates(g, build_neighborhood(1, 1)).size() < g.points.size() * 81);
}

TEST_CASE("a single candidate is selected at every step")
{
    const Trajectory tr = synthetic_pass(8, {12.0, 40.0, -70.0, 45.0}, {0.0, 0.0, 0.0, 0.0});
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const SiChannel si = build_si_channel("iid-rayleigh", 16, 16, 1e-12, 8);
    const CandidateSet cs =
        measure_candidates(build_candidates(build_grid(tr, {}), build_neighborhood(0, 0)), si, b, kSmallArrays);
    REQUIRE(cs.size() == 1);
    const BeamSchedule s = select_beams(tr, cs, b, kSmallArrays, build_pass_channels(tr, b, kSmallArrays));
    for (const auto &e : s.entries)
        CHECK(*e.lattice_point == cs.points[0]);
}

TEST_CASE("zero SI: INR table at the floor and selection maximizes the SNR-only rate")
{
    const Trajectory tr = synthetic_pass(10, {-20.0, 35.0, 60.0, 50.0}, {0.3, 0.2, -0.4, -0.1});
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const SiChannel si = build_si_channel("zero", 16, 16, 1.0, 0);
    const CandidateSet cs =
        measure_candidates(build_candidates(build_grid(tr, fit_bias(tr)), build_neighborhood(1, 1)), si, b, kSmallArrays);
    for (double v : cs.inr_db)
        CHECK(v == kDbFloor);
    const PassChannels ch = build_pass_channels(tr, b, kSmallArrays);
    const BeamSchedule s = select_beams(tr, cs, b, kSmallArrays, ch);
    for (std::size_t t = 0; t < tr.size(); ++t)
    {
        double best = 0.0;
        for (std::size_t i = 0; i < cs.size(); ++i)
        {
            const Metrics m = candidate_metrics(cs, i, ch, t, b);
            best = std::max(best, std::log2(1.0 + from_db(m.snr_ul_db)) + std::log2(1.0 + from_db(m.snr_dl_db)));
        }
        CHECK(s.entries[t].metrics.sum_se_bps_hz == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("selection invariants on a measured pass")
{
    const Trajectory tr = synthetic_pass(12, {30.0, 25.0, -100.0, 40.0}, {0.35, 0.25, 0.3, -0.2});
    const LinkBudget b = default_link_budget(kSmallArrays.tx, kSmallArrays.rx);
    const SiChannel si = build_si_channel("iid-rayleigh", 16, 16, 1e-12, 9);
    const DirectionGrid grid = build_grid(tr, fit_bias(tr));
    const CandidateSet cs = measure_candidates(build_candidates(grid, build_neighborhood(2, 2)), si, b, kSmallArrays);
    const PassChannels ch = build_pass_channels(tr, b, kSmallArrays);
    const BeamSchedule prop = select_beams(tr, cs, b, kSmallArrays, ch);
    const BeamSchedule again = select_beams(tr, cs, b, kSmallArrays, ch);
    const BeamSchedule conv = track_conventional(tr, si, b, kSmallArrays, ch);

    CandidateSet quieter = cs;
    for (auto &v : quieter.inr_db)
        v -= 3.0;
    const BeamSchedule prop_q = select_beams(tr, quieter, b, kSmallArrays, ch);

    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> jitter(-2.0, 2.0), phase(-3.14159, 3.14159);
    for (std::size_t t = 0; t < tr.size(); ++t)
    {
        const Metrics &p = prop.entries[t].metrics;
        CHECK(*again.entries[t].lattice_point == *prop.entries[t].lattice_point);
        CHECK(prop_q.entries[t].metrics.sum_se_bps_hz >= p.sum_se_bps_hz - 1e-12);
        CHECK(p.sinr_dl_db <= conv.entries[t].metrics.snr_dl_db + 1e-9);

        const auto nearest = cs.find(cs.lattice.quantize(direction_tuple(tr[t])));
        REQUIRE(nearest.has_value());
        CHECK(p.sum_se_bps_hz >= candidate_metrics(cs, *nearest, ch, t, b).sum_se_bps_hz - 1e-12);

        // The matched filter at the true direction bounds the downlink SNR of any unit-modulus beam.
        for (int k = 0; k < 100; ++k)
        {
            BeamWeights w = matched_filter_beam(kSmallArrays.rx, {tr[t].dl_az + jitter(rng), tr[t].dl_el + jitter(rng)},
                                                {}, BeamKind::receive);
            for (auto &x : w.weights)
                x *= std::polar(1.0, 0.1 * phase(rng));
            CHECK(snr_downlink_db(w, ch.downlink[t], b) <= conv.entries[t].metrics.snr_dl_db + 1e-9);
        }
    }
}
