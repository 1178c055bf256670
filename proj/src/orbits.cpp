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

#include "fdx/orbits.hpp"

#include "fdx/common.hpp"
#include "fdx/io_util.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace fdx
{
    void GroundSite::validate() const
    {
        if (!(latitude_deg >= -90.0 && latitude_deg <= 90.0))
            throw ConfigError(fmt::format("site latitude {} outside [-90, 90]", latitude_deg));
        if (!(longitude_deg >= -180.0 && longitude_deg < 180.0))
            throw ConfigError(fmt::format("site longitude {} outside [-180, 180)", longitude_deg));
        if (!std::isfinite(altitude_m))
            throw ConfigError("site altitude must be finite");
    }

    void ShellSpec::validate() const
    {
        if (!(altitude_km > 0.0))
            throw ConfigError(fmt::format("shell altitude {} km must be positive", altitude_km));
        if (!(inclination_deg >= 0.0 && inclination_deg <= 180.0))
            throw ConfigError(fmt::format("shell inclination {} outside [0, 180]", inclination_deg));
        if (plane_count <= 0 || sats_per_plane <= 0)
            throw ConfigError("shell needs positive plane_count and sats_per_plane");
    }

    std::vector<ShellSpec> default_shells()
    {
        return {
            {590.0, 33.0, 28, 28, 1},
            {610.0, 42.0, 36, 36, 1},
            {630.0, 51.9, 34, 34, 1},
        };
    }

    double OrbitalElements::mean_motion() const
    {
        const double a = radius_km();
        return std::sqrt(kEarthMu / (a * a * a));
    }

    double OrbitalElements::period_s() const { return 2.0 * std::numbers::pi / mean_motion(); }

    void TimeHorizon::validate() const
    {
        if (!(t_end > t_start))
            throw ConfigError("time horizon needs t_end > t_start");
        if (!(step > 0.0))
            throw ConfigError("time horizon step must be positive");
        const double n = (t_end - t_start) / step;
        if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
            throw ConfigError(fmt::format("horizon length {} s is not a multiple of step {} s", t_end - t_start, step));
    }

    std::size_t TimeHorizon::sample_count() const
    {
        return static_cast<std::size_t>(std::llround((t_end - t_start) / step)) + 1;
    }

    std::vector<OrbitalElements> generate_constellation(std::span<const ShellSpec> shells, std::uint64_t seed)
    {
        if (shells.empty())
            throw ConfigError("constellation needs at least one shell");
        for (const auto &s : shells)
            s.validate();

        std::vector<OrbitalElements> out;
        int id = 0;
        for (std::size_t k = 0; k < shells.size(); ++k)
        {
            const ShellSpec &s = shells[k];
            // Each shell gets its own seeded reference RAAN and argument of latitude.
            std::mt19937_64 rng(mix_seed(seed, k));
            std::uniform_real_distribution<double> angle(0.0, 360.0);
            const double raan0 = angle(rng);
            const double u0 = angle(rng);

            const double total = static_cast<double>(s.total());
            for (int p = 0; p < s.plane_count; ++p)
            {
                for (int q = 0; q < s.sats_per_plane; ++q)
                {
                    OrbitalElements el;
                    el.sat_id = id++;
                    el.shell = static_cast<int>(k);
                    el.plane = p;
                    el.slot = q;
                    el.altitude_km = s.altitude_km;
                    el.inclination_deg = s.inclination_deg;
                    el.raan_deg = std::fmod(raan0 + 360.0 * p / s.plane_count, 360.0);
                    el.arg_latitude_deg = std::fmod(u0 + 360.0 * q / s.sats_per_plane + 360.0 * s.phasing * p / total, 360.0);
                    out.push_back(el);
                }
            }
        }
        return out;
    }

    Vec3 propagate_inertial(const OrbitalElements &el, double t)
    {
        const double r = el.radius_km();
        const double u = deg2rad(el.arg_latitude_deg) + el.mean_motion() * t;
        const double raan = deg2rad(el.raan_deg);
        const double inc = deg2rad(el.inclination_deg);
        const double cu = std::cos(u), su = std::sin(u);
        const double cO = std::cos(raan), sO = std::sin(raan);
        const double ci = std::cos(inc), si = std::sin(inc);
        return {r * (cO * cu - sO * su * ci),
                r * (sO * cu + cO * su * ci),
                r * (su * si)};
    }

    SatState propagate(const OrbitalElements &el, double t)
    {
        const Vec3 p = propagate_inertial(el, t);
        // Inertial and Earth-fixed frames coincide at t = 0.
        const double theta = kEarthRotationRate * t;
        const double c = std::cos(theta), s = std::sin(theta);
        return {el.sat_id, {c * p[0] + s * p[1], -s * p[0] + c * p[1], p[2]}, t};
    }

    Vec3 site_ecef(const GroundSite &site)
    {
        const double r = kEarthRadiusKm + site.altitude_m / 1000.0;
        const double lat = deg2rad(site.latitude_deg);
        const double lon = deg2rad(site.longitude_deg);
        return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
    }

    LookAngles look_angles(const GroundSite &site, const SatState &sat)
    {
        const Vec3 o = site_ecef(site);
        const double dx = sat.position_km[0] - o[0];
        const double dy = sat.position_km[1] - o[1];
        const double dz = sat.position_km[2] - o[2];

        const double lat = deg2rad(site.latitude_deg);
        const double lon = deg2rad(site.longitude_deg);
        const double sl = std::sin(lat), cl = std::cos(lat);
        const double so = std::sin(lon), co = std::cos(lon);

        const double east = -so * dx + co * dy;
        const double north = -sl * co * dx - sl * so * dy + cl * dz;
        const double up = cl * co * dx + cl * so * dy + sl * dz;

        LookAngles la;
        la.range_km = std::sqrt(dx * dx + dy * dy + dz * dz);
        la.elevation_deg = rad2deg(std::atan2(up, std::hypot(east, north)));
        la.azimuth_deg = wrap_azimuth_deg(rad2deg(std::atan2(east, north)));
        return la;
    }

    namespace
    {
        bool visible_throughout(const OrbitalElements &el, const GroundSite &site, double t0, std::size_t samples,
                                double step, double mask)
        {
            // Endpoints first; most satellites fail there.
            if (look_angles(site, propagate(el, t0)).elevation_deg < mask)
                return false;
            const double t_last = t0 + static_cast<double>(samples - 1) * step;
            if (look_angles(site, propagate(el, t_last)).elevation_deg < mask)
                return false;
            for (std::size_t i = 1; i + 1 < samples; ++i)
                if (look_angles(site, propagate(el, t0 + static_cast<double>(i) * step)).elevation_deg < mask)
                    return false;
            return true;
        }
    } // namespace

    SatellitePair select_pair(std::span<const OrbitalElements> constellation, const GroundSite &site,
                              const PairSearch &search, std::uint64_t seed)
    {
        if (!(search.mask_el_deg > 0.0 && search.mask_el_deg < 90.0))
            throw ConfigError(fmt::format("elevation mask {} outside (0, 90)", search.mask_el_deg));
        if (!(search.min_duration_s > 0.0))
            throw ConfigError("minimum pass duration must be positive");
        if (!(search.scan_step_s > 0.0) || search.scan_limit_s < 0.0)
            throw ConfigError("scan step must be positive and scan limit non-negative");

        TimeHorizon shape{0.0, search.min_duration_s, search.step_s};
        shape.validate();
        const std::size_t samples = shape.sample_count();

        std::mt19937_64 rng(seed);
        const auto slots_per_day = static_cast<std::int64_t>(std::floor(86400.0 / search.scan_step_s));
        std::uniform_int_distribution<std::int64_t> start_slot(0, std::max<std::int64_t>(slots_per_day - 1, 0));
        const double scan_start = static_cast<double>(start_slot(rng)) * search.scan_step_s;

        std::vector<int> qualifying;
        for (double offset = 0.0; offset <= search.scan_limit_s; offset += search.scan_step_s)
        {
            const double t0 = scan_start + offset;
            qualifying.clear();
            for (std::size_t k = 0; k < constellation.size(); ++k)
                if (visible_throughout(constellation[k], site, t0, samples, search.step_s, search.mask_el_deg))
                    qualifying.push_back(static_cast<int>(k));
            if (qualifying.size() < 2)
                continue;

            // Uniform over ordered pairs: covers both the pair and the role assignment.
            const auto n = static_cast<std::int64_t>(qualifying.size());
            std::uniform_int_distribution<std::int64_t> first(0, n - 1);
            std::uniform_int_distribution<std::int64_t> second(0, n - 2);
            const std::int64_t i = first(rng);
            std::int64_t j = second(rng);
            if (j >= i)
                ++j;

            SatellitePair pair;
            pair.qualifying_count = qualifying.size();
            const OrbitalElements &ul = constellation[static_cast<std::size_t>(qualifying[static_cast<std::size_t>(i)])];
            const OrbitalElements &dl = constellation[static_cast<std::size_t>(qualifying[static_cast<std::size_t>(j)])];
            pair.ul_sat = ul.sat_id;
            pair.dl_sat = dl.sat_id;
            pair.horizon = {t0, t0 + search.min_duration_s, search.step_s};
            pair.trajectory.reserve(samples);
            for (std::size_t s = 0; s < samples; ++s)
            {
                const double t = pair.horizon.time_at(s);
                const LookAngles lu = look_angles(site, propagate(ul, t));
                const LookAngles ld = look_angles(site, propagate(dl, t));
                pair.trajectory.push_back({t, lu.azimuth_deg, lu.el_from_broadside(), ld.azimuth_deg,
                                           ld.el_from_broadside(), lu.range_km, ld.range_km});
            }
            return pair;
        }
        throw NoVisiblePairError(fmt::format(
            "no-visible-pair: no two satellites stay above {} deg for {} s in scan window [{}, {}] s",
            search.mask_el_deg, search.min_duration_s, scan_start, scan_start + search.scan_limit_s));
    }

    void write_trajectory_csv(const Trajectory &traj, const std::filesystem::path &path)
    {
        std::string body = "t,ul_az,ul_el,dl_az,dl_el,ul_range_km,dl_range_km\n";
        const double t0 = traj.empty() ? 0.0 : traj.front().t;
        for (const auto &s : traj)
            body += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", s.t - t0, s.ul_az, s.ul_el,
                                s.dl_az, s.dl_el, s.ul_range_km, s.dl_range_km);
        write_file_atomic(path, body);
    }

    void write_constellation_csv(std::span<const OrbitalElements> constellation, const std::filesystem::path &path)
    {
        std::string body = "sat_id,shell,plane,slot,altitude_km,inclination_deg,raan_deg,arg_latitude_deg\n";
        for (const auto &e : constellation)
            body += fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", e.sat_id, e.shell, e.plane, e.slot,
                                e.altitude_km, e.inclination_deg, e.raan_deg, e.arg_latitude_deg);
        write_file_atomic(path, body);
    }
} // namespace fdx
