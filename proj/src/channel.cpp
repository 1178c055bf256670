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

#include "fdx/channel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <random>

namespace fdx
{
    void LinkBudget::validate() const
    {
        if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz))
            throw ConfigError("carrier frequency must be positive");
        for (double v : {sat_tx_power_dbm, sat_tx_gain_dbi, sat_rx_gain_dbi, sat_noise_dbm, ut_tx_power_dbm,
                         ut_noise_dbm, ut_tx_elem_gain_dbi, ut_rx_elem_gain_dbi})
            if (!std::isfinite(v))
                throw ConfigError("link budget values must be finite");
    }

    double element_gain_for_peak(const UpaGeometry &geom, double peak_gain_dbi)
    {
        return peak_gain_dbi - 10.0 * std::log10(static_cast<double>(geom.size()));
    }

    LinkBudget default_link_budget(const UpaGeometry &tx, const UpaGeometry &rx)
    {
        LinkBudget b;
        b.ut_tx_elem_gain_dbi = element_gain_for_peak(tx, 29.0);
        b.ut_rx_elem_gain_dbi = element_gain_for_peak(rx, 39.7);
        return b;
    }

    double path_gain(double range_km, double carrier_hz)
    {
        if (!(range_km > 0.0))
            throw ContractViolation("range must be positive");
        const double lambda = kSpeedOfLight / carrier_hz;
        const double x = lambda / (4.0 * std::numbers::pi * range_km * 1000.0);
        return x * x;
    }

    ChannelVector los_channel(const UpaGeometry &geom, SteeringDirection dir, double range_km, const LinkBudget &budget,
                              Link link)
    {
        const double elem_db = link == Link::uplink ? budget.ut_tx_elem_gain_dbi : budget.ut_rx_elem_gain_dbi;
        const double amplitude = std::sqrt(path_gain(range_km, budget.carrier_hz) * from_db(elem_db));
        const double cycles = std::fmod(range_km * 1000.0 / budget.wavelength_m(), 1.0);
        const cdouble rot = std::polar(amplitude, -2.0 * std::numbers::pi * cycles);

        ChannelVector h{array_response(geom, dir), link};
        for (auto &c : h.coeffs)
            c *= rot;
        return h;
    }

    double snr_uplink_db(const BeamWeights &f, const ChannelVector &h_ul, const LinkBudget &budget)
    {
        const double g = std::norm(beam_coupling(f, h_ul.coeffs));
        return to_db(from_db(budget.ut_tx_power_dbm + budget.sat_rx_gain_dbi - budget.sat_noise_dbm) * g);
    }

    double snr_downlink_db(const BeamWeights &w, const ChannelVector &h_dl, const LinkBudget &budget)
    {
        const double g = std::norm(beam_coupling(w, h_dl.coeffs));
        return to_db(from_db(budget.sat_tx_power_dbm + budget.sat_tx_gain_dbi - budget.ut_noise_dbm) * g);
    }

    namespace
    {
        CVector iid_rayleigh(std::size_t n_r, std::size_t n_t, double variance, std::uint64_t seed)
        {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
            CVector m(n_r * n_t);
            for (auto &x : m)
            {
                const double re = normal(rng);
                const double im = normal(rng);
                x = {re, im};
            }
            return m;
        }

        CVector zero_model(std::size_t n_r, std::size_t n_t, double, std::uint64_t)
        {
            return CVector(n_r * n_t, cdouble{0.0, 0.0});
        }

        struct Registry
        {
            std::mutex mutex;
            std::map<std::string, SiModelFactory> models{{"iid-rayleigh", iid_rayleigh}, {"zero", zero_model}};
        };

        Registry &registry()
        {
            static Registry r;
            return r;
        }
    } // namespace

    void register_si_model(const std::string &model_id, SiModelFactory factory)
    {
        auto &r = registry();
        std::lock_guard lock(r.mutex);
        r.models[model_id] = std::move(factory);
    }

    std::vector<std::string> si_model_ids()
    {
        auto &r = registry();
        std::lock_guard lock(r.mutex);
        std::vector<std::string> ids;
        for (const auto &[k, v] : r.models)
            ids.push_back(k);
        return ids;
    }

    SiChannel build_si_channel(std::string_view model_id, std::size_t n_r, std::size_t n_t, double entry_variance,
                               std::uint64_t seed)
    {
        if (n_r == 0 || n_t == 0)
            throw ContractViolation("self-interference channel dimensions must be positive");
        if (!(entry_variance >= 0.0))
            throw ContractViolation("self-interference entry variance must be non-negative");
        SiModelFactory factory;
        {
            auto &r = registry();
            std::lock_guard lock(r.mutex);
            auto it = r.models.find(std::string(model_id));
            if (it == r.models.end())
                throw ConfigError(fmt::format("unknown self-interference model '{}'", model_id));
            factory = it->second;
        }
        SiChannel si;
        si.n_r = n_r;
        si.n_t = n_t;
        si.model_id = std::string(model_id);
        si.seed = seed;
        si.entry_variance = entry_variance;
        si.matrix = factory(n_r, n_t, entry_variance, seed);
        if (si.matrix.size() != n_r * n_t)
            throw ContractViolation(fmt::format("model '{}' returned a matrix of the wrong size", model_id));
        return si;
    }

    CVector si_apply(const SiChannel &si, const BeamWeights &f)
    {
        if (f.size() != si.n_t)
            throw ContractViolation(fmt::format("transmit beam length {} does not match N_t = {}", f.size(), si.n_t));
        CVector out(si.n_r);
        for (std::size_t r = 0; r < si.n_r; ++r)
        {
            const cdouble *row = si.matrix.data() + r * si.n_t;
            double re = 0.0, im = 0.0;
            for (std::size_t c = 0; c < si.n_t; ++c)
            {
                const double a = row[c].real(), b = row[c].imag();
                const double x = f.weights[c].real(), y = f.weights[c].imag();
                re += a * x - b * y;
                im += a * y + b * x;
            }
            out[r] = {re, im};
        }
        return out;
    }

    cdouble si_coupling(const BeamWeights &w, const SiChannel &si, const BeamWeights &f)
    {
        if (w.size() != si.n_r)
            throw ContractViolation(fmt::format("receive beam length {} does not match N_r = {}", w.size(), si.n_r));
        return beam_coupling(w, si_apply(si, f));
    }

    double inr_db(const BeamWeights &w, const SiChannel &si, const BeamWeights &f, const LinkBudget &budget)
    {
        const double g = std::norm(si_coupling(w, si, f));
        return to_db(from_db(budget.ut_tx_power_dbm - budget.ut_noise_dbm) * g);
    }

    std::vector<DirectionPair> sample_direction_pairs(std::size_t count, double max_el_deg, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> az(-180.0, 180.0);
        std::uniform_real_distribution<double> cos_el(std::cos(deg2rad(max_el_deg)), 1.0);
        auto draw = [&]
        {
            const double a = az(rng);
            return SteeringDirection{a, rad2deg(std::acos(cos_el(rng)))};
        };
        std::vector<DirectionPair> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
        {
            const SteeringDirection ul = draw();
            const SteeringDirection dl = draw();
            out.emplace_back(ul, dl);
        }
        return out;
    }

    double median(std::vector<double> values)
    {
        if (values.empty())
            throw ContractViolation("median of an empty sample");
        const std::size_t mid = values.size() / 2;
        std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
        const double upper = values[mid];
        if (values.size() % 2 == 1)
            return upper;
        const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (lower + upper);
    }

    double calibrate_si(const LinkBudget &budget, const UpaGeometry &geom_tx, const UpaGeometry &geom_rx,
                        std::span<const DirectionPair> sample_dirs, double target_median_inr_db, std::uint64_t seed,
                        QuantizerSpec quant)
    {
        if (sample_dirs.empty())
            throw ContractViolation("calibration needs at least one direction pair");
        if (!std::isfinite(target_median_inr_db))
            throw ContractViolation("calibration target must be finite");

        const SiChannel unit = build_si_channel("iid-rayleigh", geom_rx.size(), geom_tx.size(), 1.0, seed);
        std::vector<double> coupling;
        coupling.reserve(sample_dirs.size());
        for (const auto &[ul, dl] : sample_dirs)
        {
            const BeamWeights f = matched_filter_beam(geom_tx, ul, quant, BeamKind::transmit);
            const BeamWeights w = matched_filter_beam(geom_rx, dl, quant, BeamKind::receive);
            coupling.push_back(std::norm(si_coupling(w, unit, f)));
        }
        const double m = median(std::move(coupling));
        if (!(m > 0.0))
            throw ContractViolation("reference coupling median is zero; cannot calibrate");
        // INR is linear in the entry variance.
        const double inr_per_unit = from_db(budget.ut_tx_power_dbm - budget.ut_noise_dbm) * m;
        return from_db(target_median_inr_db) / inr_per_unit;
    }

    double sinr_downlink_db(double snr_dl_db, double inr_db)
    {
        const double snr = snr_dl_db <= kDbFloor ? 0.0 : from_db(snr_dl_db);
        const double inr = inr_db <= kDbFloor ? 0.0 : from_db(inr_db);
        if (inr == 0.0)
            return snr_dl_db;
        return to_db(snr / (1.0 + inr));
    }

    double sum_se(double snr_ul_db, double sinr_dl_db)
    {
        const double ul = snr_ul_db <= kDbFloor ? 0.0 : from_db(snr_ul_db);
        const double dl = sinr_dl_db <= kDbFloor ? 0.0 : from_db(sinr_dl_db);
        return std::log2(1.0 + ul) + std::log2(1.0 + dl);
    }

    Metrics evaluate_metrics(double snr_ul_db, double snr_dl_db, double inr_db)
    {
        Metrics m;
        m.snr_ul_db = snr_ul_db;
        m.snr_dl_db = snr_dl_db;
        m.inr_db = inr_db;
        m.sinr_dl_db = sinr_downlink_db(snr_dl_db, inr_db);
        m.sum_se_bps_hz = sum_se(snr_ul_db, m.sinr_dl_db);
        return m;
    }
} // namespace fdx
