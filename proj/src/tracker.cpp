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

#include "fdx/tracker.hpp"

#include "fdx/io_util.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <map>

namespace fdx
{
    namespace
    {
        constexpr double kAngleTol = 1e-9;

        bool is_azimuth(std::size_t axis) { return axis == kUlAz || axis == kDlAz; }

        // Unique (az, el) lattice pairs for one side of the candidate set, with matched beams.
        struct SideBook
        {
            std::vector<std::pair<int, int>> keys;
            std::vector<BeamWeights> beams;
            std::vector<std::uint32_t> index_of; // per candidate
        };

        SideBook make_side(const CandidateSet &cands, std::size_t az_axis, const UpaGeometry &geom,
                           QuantizerSpec quant, BeamKind kind)
        {
            SideBook book;
            std::map<std::pair<int, int>, std::uint32_t> lookup;
            book.index_of.reserve(cands.size());
            for (const auto &p : cands.points)
            {
                const std::pair<int, int> key{p[az_axis], p[az_axis + 1]};
                auto [it, inserted] = lookup.try_emplace(key, static_cast<std::uint32_t>(book.keys.size()));
                if (inserted)
                    book.keys.push_back(key);
                book.index_of.push_back(it->second);
            }
            book.beams.reserve(book.keys.size());
            for (const auto &[az_k, el_k] : book.keys)
            {
                LatticePoint probe{};
                probe[az_axis] = az_k;
                probe[az_axis + 1] = el_k;
                const DirectionTuple d = cands.lattice.direction(probe);
                book.beams.push_back(matched_filter_beam(geom, {d[az_axis], d[az_axis + 1]}, quant, kind));
            }
            return book;
        }
    } // namespace

    DirectionTuple direction_tuple(const TrajectorySample &s) { return {s.ul_az, s.ul_el, s.dl_az, s.dl_el}; }

    void BiasVector::validate(double resolution_deg) const
    {
        for (double b : beta)
            if (!(std::abs(b) <= 0.5 * resolution_deg + kAngleTol))
                throw ContractViolation(fmt::format("bias component {} outside [-{}, {}]", b, 0.5 * resolution_deg,
                                                    0.5 * resolution_deg));
    }

    void Lattice::validate() const
    {
        if (!(resolution_deg > 0.0))
            throw ConfigError("grid resolution must be positive");
        const double steps = 360.0 / resolution_deg;
        if (std::abs(steps - std::round(steps)) > 1e-9)
            throw ConfigError(fmt::format("grid resolution {} deg does not divide 360", resolution_deg));
        bias.validate(resolution_deg);
    }

    int Lattice::azimuth_period() const { return static_cast<int>(std::lround(360.0 / resolution_deg)); }

    LatticePoint Lattice::canonical(LatticePoint p) const
    {
        const int period = azimuth_period();
        const int half = period / 2;
        for (std::size_t axis : {kUlAz, kDlAz})
        {
            int k = (p[axis] + half) % period;
            if (k < 0)
                k += period;
            p[axis] = k - half;
        }
        return p;
    }

    LatticePoint Lattice::quantize(const DirectionTuple &omega) const
    {
        LatticePoint p{};
        for (std::size_t axis = 0; axis < 4; ++axis)
            p[axis] = static_cast<int>(std::lround((omega[axis] + bias[axis]) / resolution_deg));
        return canonical(p);
    }

    DirectionTuple Lattice::direction(const LatticePoint &p) const
    {
        DirectionTuple d{};
        for (std::size_t axis = 0; axis < 4; ++axis)
        {
            d[axis] = p[axis] * resolution_deg - bias[axis];
            if (is_azimuth(axis))
                d[axis] = wrap_azimuth_deg(d[axis]);
        }
        return d;
    }

    bool Lattice::visible(const LatticePoint &p) const
    {
        for (std::size_t axis : {kUlEl, kDlEl})
        {
            const double el = p[axis] * resolution_deg - bias[axis];
            if (el < -kAngleTol || el > 90.0 + kAngleTol)
                return false;
        }
        return true;
    }

    std::optional<std::size_t> CandidateSet::find(const LatticePoint &p) const
    {
        auto it = std::lower_bound(points.begin(), points.end(), p);
        if (it == points.end() || *it != p)
            return std::nullopt;
        return static_cast<std::size_t>(it - points.begin());
    }

    double bias_objective(std::span<const double> angles, double beta, double resolution_deg)
    {
        double acc = 0.0;
        for (double a : angles)
        {
            const double x = (a + beta) / resolution_deg;
            const double r = (x - std::round(x)) * resolution_deg;
            acc += r * r;
        }
        return acc;
    }

    double fit_bias_1d(std::span<const double> angles, double search_step, double resolution_deg)
    {
        if (angles.empty())
            throw ContractViolation("bias fit needs at least one angle");
        if (!(search_step > 0.0) || !(resolution_deg > 0.0))
            throw ContractViolation("bias search step and resolution must be positive");

        const double half = 0.5 * resolution_deg;
        const auto steps = static_cast<long>(std::floor(resolution_deg / search_step + 1e-9));
        double best_beta = -half;
        double best = bias_objective(angles, best_beta, resolution_deg);
        for (long i = 1; i <= steps; ++i)
        {
            const double beta = -half + static_cast<double>(i) * search_step;
            const double obj = bias_objective(angles, beta, resolution_deg);
            if (obj < best)
            {
                best = obj;
                best_beta = beta;
            }
        }
        return best_beta;
    }

    BiasVector fit_bias(const Trajectory &traj, double search_step, double resolution_deg)
    {
        if (traj.empty())
            throw ContractViolation("bias fit needs a non-empty trajectory");
        BiasVector b;
        std::vector<double> stream(traj.size());
        for (std::size_t axis = 0; axis < 4; ++axis)
        {
            for (std::size_t i = 0; i < traj.size(); ++i)
                stream[i] = direction_tuple(traj[i])[axis];
            b.beta[axis] = fit_bias_1d(stream, search_step, resolution_deg);
        }
        return b;
    }

    DirectionGrid build_grid(const Trajectory &traj, const BiasVector &bias, double resolution_deg)
    {
        DirectionGrid g;
        g.lattice = {resolution_deg, bias};
        g.lattice.validate();
        g.points.reserve(traj.size());
        for (const auto &s : traj)
            g.points.push_back(g.lattice.quantize(direction_tuple(s)));
        std::sort(g.points.begin(), g.points.end());
        g.points.erase(std::unique(g.points.begin(), g.points.end()), g.points.end());
        return g;
    }

    Neighborhood build_neighborhood(int delta_az, int delta_el)
    {
        if (delta_az < 0 || delta_el < 0)
            throw ContractViolation("neighborhood extents must be non-negative");
        Neighborhood n{delta_az, delta_el, {}};
        n.offsets.reserve(static_cast<std::size_t>((2 * delta_az + 1) * (2 * delta_az + 1)) *
                          static_cast<std::size_t>((2 * delta_el + 1) * (2 * delta_el + 1)));
        for (int a = -delta_az; a <= delta_az; ++a)
            for (int b = -delta_el; b <= delta_el; ++b)
                for (int c = -delta_az; c <= delta_az; ++c)
                    for (int d = -delta_el; d <= delta_el; ++d)
                        n.offsets.push_back({a, b, c, d});
        return n;
    }

    CandidateSet build_candidates(const DirectionGrid &grid, const Neighborhood &nbr)
    {
        if (grid.points.empty())
            throw ContractViolation("candidate construction needs a non-empty grid");
        CandidateSet cs;
        cs.lattice = grid.lattice;
        std::vector<LatticePoint> dropped;
        cs.points.reserve(grid.points.size() * nbr.offsets.size());
        for (const auto &g : grid.points)
        {
            for (const auto &o : nbr.offsets)
            {
                const LatticePoint p = cs.lattice.canonical({g[0] + o[0], g[1] + o[1], g[2] + o[2], g[3] + o[3]});
                (cs.lattice.visible(p) ? cs.points : dropped).push_back(p);
            }
        }
        std::sort(cs.points.begin(), cs.points.end());
        cs.points.erase(std::unique(cs.points.begin(), cs.points.end()), cs.points.end());
        cs.points.shrink_to_fit();
        std::sort(dropped.begin(), dropped.end());
        cs.clipped = static_cast<std::size_t>(std::unique(dropped.begin(), dropped.end()) - dropped.begin());
        return cs;
    }

    CandidateSet measure_candidates(CandidateSet cands, const SiChannel &si, const LinkBudget &budget,
                                    const ArraySetup &arrays)
    {
        const SideBook ul = make_side(cands, kUlAz, arrays.tx, arrays.quant, BeamKind::transmit);
        const SideBook dl = make_side(cands, kDlAz, arrays.rx, arrays.quant, BeamKind::receive);

        // H f once per distinct transmit direction; each candidate then costs one N_r inner product.
        std::vector<CVector> coupled;
        coupled.reserve(ul.beams.size());
        for (const auto &f : ul.beams)
            coupled.push_back(si_apply(si, f));

        const double scale = from_db(budget.ut_tx_power_dbm - budget.ut_noise_dbm);
        cands.inr_db.resize(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i)
        {
            const cdouble z = beam_coupling(dl.beams[dl.index_of[i]], coupled[ul.index_of[i]]);
            cands.inr_db[i] = to_db(scale * std::norm(z));
        }
        return cands;
    }

    PassChannels build_pass_channels(const Trajectory &traj, const LinkBudget &budget, const ArraySetup &arrays)
    {
        PassChannels ch;
        ch.uplink.reserve(traj.size());
        ch.downlink.reserve(traj.size());
        for (const auto &s : traj)
        {
            ch.uplink.push_back(los_channel(arrays.tx, {s.ul_az, s.ul_el}, s.ul_range_km, budget, Link::uplink));
            ch.downlink.push_back(los_channel(arrays.rx, {s.dl_az, s.dl_el}, s.dl_range_km, budget, Link::downlink));
        }
        return ch;
    }

    BeamSchedule select_beams(const Trajectory &traj, const CandidateSet &cands, const LinkBudget &budget,
                              const ArraySetup &arrays, const PassChannels &channels)
    {
        if (!cands.measured())
            throw ContractViolation("select_beams needs a fully measured candidate set");
        if (cands.points.empty())
            throw ContractViolation("select_beams needs at least one candidate");
        if (channels.uplink.size() != traj.size() || channels.downlink.size() != traj.size())
            throw ContractViolation("channel count does not match trajectory length");

        const SideBook ul = make_side(cands, kUlAz, arrays.tx, arrays.quant, BeamKind::transmit);
        const SideBook dl = make_side(cands, kDlAz, arrays.rx, arrays.quant, BeamKind::receive);

        std::vector<double> inr(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i)
            inr[i] = cands.inr_db[i] <= kDbFloor ? 0.0 : from_db(cands.inr_db[i]);

        const double ul_scale = from_db(budget.ut_tx_power_dbm + budget.sat_rx_gain_dbi - budget.sat_noise_dbm);
        const double dl_scale = from_db(budget.sat_tx_power_dbm + budget.sat_tx_gain_dbi - budget.ut_noise_dbm);

        std::vector<double> snr_ul(ul.beams.size()), rate_ul(ul.beams.size()), snr_dl(dl.beams.size());

        BeamSchedule sched;
        sched.entries.reserve(traj.size());
        for (std::size_t t = 0; t < traj.size(); ++t)
        {
            for (std::size_t j = 0; j < ul.beams.size(); ++j)
            {
                snr_ul[j] = ul_scale * std::norm(beam_coupling(ul.beams[j], channels.uplink[t].coeffs));
                rate_ul[j] = std::log2(1.0 + snr_ul[j]);
            }
            for (std::size_t j = 0; j < dl.beams.size(); ++j)
                snr_dl[j] = dl_scale * std::norm(beam_coupling(dl.beams[j], channels.downlink[t].coeffs));

            std::size_t best = 0;
            double best_rate = -1.0;
            for (std::size_t c = 0; c < cands.size(); ++c)
            {
                const double r = rate_ul[ul.index_of[c]] + std::log2(1.0 + snr_dl[dl.index_of[c]] / (1.0 + inr[c]));
                if (r > best_rate)
                {
                    best_rate = r;
                    best = c;
                }
            }

            const std::uint32_t ju = ul.index_of[best], jd = dl.index_of[best];
            ScheduleEntry e;
            e.t = traj[t].t;
            e.lattice_point = cands.points[best];
            e.direction = cands.direction(best);
            e.f = ul.beams[ju];
            e.w = dl.beams[jd];
            e.metrics.snr_ul_db = to_db(snr_ul[ju]);
            e.metrics.snr_dl_db = to_db(snr_dl[jd]);
            e.metrics.inr_db = cands.inr_db[best];
            e.metrics.sinr_dl_db = to_db(snr_dl[jd] / (1.0 + inr[best]));
            e.metrics.sum_se_bps_hz = best_rate;
            sched.entries.push_back(std::move(e));
        }
        return sched;
    }

    BeamSchedule track_conventional(const Trajectory &traj, const SiChannel &si, const LinkBudget &budget,
                                    const ArraySetup &arrays, const PassChannels &channels)
    {
        if (channels.uplink.size() != traj.size() || channels.downlink.size() != traj.size())
            throw ContractViolation("channel count does not match trajectory length");
        BeamSchedule sched;
        sched.entries.reserve(traj.size());
        for (std::size_t t = 0; t < traj.size(); ++t)
        {
            const auto &s = traj[t];
            ScheduleEntry e;
            e.t = s.t;
            e.direction = direction_tuple(s);
            e.f = matched_filter_beam(arrays.tx, {s.ul_az, s.ul_el}, arrays.quant, BeamKind::transmit);
            e.w = matched_filter_beam(arrays.rx, {s.dl_az, s.dl_el}, arrays.quant, BeamKind::receive);
            e.metrics = evaluate_metrics(snr_uplink_db(e.f, channels.uplink[t], budget),
                                         snr_downlink_db(e.w, channels.downlink[t], budget),
                                         inr_db(e.w, si, e.f, budget));
            sched.entries.push_back(std::move(e));
        }
        return sched;
    }

    void write_candidates_json(const CandidateSet &cands, const std::filesystem::path &path)
    {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < cands.size(); ++i)
        {
            const DirectionTuple d = cands.direction(i);
            nlohmann::json rec = {{"ul_az", d[kUlAz]}, {"ul_el", d[kUlEl]}, {"dl_az", d[kDlAz]}, {"dl_el", d[kDlEl]}};
            rec["inr_db"] = cands.measured() ? nlohmann::json(cands.inr_db[i]) : nlohmann::json(nullptr);
            arr.push_back(std::move(rec));
        }
        write_file_atomic(path, arr.dump(1) + "\n");
    }
} // namespace fdx
