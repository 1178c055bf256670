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
#include "fdx/orbits.hpp"
#include "fdx/phased_array.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

/*
Measurement-driven full-duplex beam tracking.

Given the uplink/downlink direction tuples along a pass, the tracker
  1. fits a per-axis bias so a shifted 1-degree lattice best matches the trajectory,
  2. quantizes the trajectory onto that lattice (the grid),
  3. takes the Minkowski sum of the grid with an integer neighborhood (the candidates),
  4. measures self-interference once per candidate,
  5. picks, per timestep, the candidate maximizing the sum spectral efficiency.

Candidates are stored as integer lattice coordinates plus the shared bias, so set
operations (dedup, union, membership) are exact.
*/

namespace fdx
{
    /// Axis order of every 4-tuple: uplink az, uplink el, downlink az, downlink el.
    enum Axis : std::size_t
    {
        kUlAz = 0,
        kUlEl = 1,
        kDlAz = 2,
        kDlEl = 3
    };

    using DirectionTuple = std::array<double, 4>; // degrees
    using LatticePoint = std::array<int, 4>;

    DirectionTuple direction_tuple(const TrajectorySample &s);

    struct BiasVector
    {
        std::array<double, 4> beta{};

        double operator[](std::size_t axis) const { return beta[axis]; }
        void validate(double resolution_deg = 1.0) const;
    };

    /// Biased lattice: point k maps to k * resolution - bias, azimuths wrapped modulo 360.
    struct Lattice
    {
        double resolution_deg = 1.0;
        BiasVector bias;

        void validate() const;
        int azimuth_period() const; // lattice steps per 360 degrees
        LatticePoint canonical(LatticePoint p) const;
        LatticePoint quantize(const DirectionTuple &omega) const;
        DirectionTuple direction(const LatticePoint &p) const;
        /// Both elevations in [0, 90] degrees from broadside.
        bool visible(const LatticePoint &p) const;
    };

    struct DirectionGrid
    {
        Lattice lattice;
        std::vector<LatticePoint> points; // sorted, unique
    };

    struct Neighborhood
    {
        int delta_az = 0;
        int delta_el = 0;
        std::vector<LatticePoint> offsets; // lexicographic
    };

    struct CandidateSet
    {
        Lattice lattice;
        std::vector<LatticePoint> points; // sorted, unique, all visible
        std::vector<double> inr_db;       // parallel to points once measured
        std::size_t clipped = 0;          // distinct tuples dropped for leaving the visible hemisphere

        std::size_t size() const { return points.size(); }
        bool measured() const { return inr_db.size() == points.size(); }
        std::optional<std::size_t> find(const LatticePoint &p) const;
        DirectionTuple direction(std::size_t i) const { return lattice.direction(points[i]); }
    };

    struct ArraySetup
    {
        UpaGeometry tx;
        UpaGeometry rx;
        QuantizerSpec quant;
    };

    /// Per-timestep uplink and downlink LOS channels.
    struct PassChannels
    {
        std::vector<ChannelVector> uplink;
        std::vector<ChannelVector> downlink;
    };

    struct ScheduleEntry
    {
        double t = 0.0;
        DirectionTuple direction{};
        std::optional<LatticePoint> lattice_point; // set for candidate-based schedules
        BeamWeights f;
        BeamWeights w;
        Metrics metrics;
    };

    struct BeamSchedule
    {
        std::vector<ScheduleEntry> entries;
    };

    /// Sum over angles of the squared distance to the biased lattice.
    double bias_objective(std::span<const double> angles, double beta, double resolution_deg = 1.0);

    /// Exhaustive scan of beta over [-res/2, res/2] at search_step; ties go to the smallest beta.
    double fit_bias_1d(std::span<const double> angles, double search_step = 0.001, double resolution_deg = 1.0);

    BiasVector fit_bias(const Trajectory &traj, double search_step = 0.001, double resolution_deg = 1.0);

    DirectionGrid build_grid(const Trajectory &traj, const BiasVector &bias, double resolution_deg = 1.0);

    Neighborhood build_neighborhood(int delta_az, int delta_el);

    /// Grid (+) neighborhood, deduplicated, invisible tuples dropped. Empty grid is a contract violation.
    CandidateSet build_candidates(const DirectionGrid &grid, const Neighborhood &nbr);

    /// Fills inr_db with one measurement per candidate.
    CandidateSet measure_candidates(CandidateSet cands, const SiChannel &si, const LinkBudget &budget,
                                    const ArraySetup &arrays);

    PassChannels build_pass_channels(const Trajectory &traj, const LinkBudget &budget, const ArraySetup &arrays);

    /// Exhaustive per-timestep sum-rate maximization over the measured candidates.
    BeamSchedule select_beams(const Trajectory &traj, const CandidateSet &cands, const LinkBudget &budget,
                              const ArraySetup &arrays, const PassChannels &channels);

    /// Matched-filter beams straight at both satellites.
    BeamSchedule track_conventional(const Trajectory &traj, const SiChannel &si, const LinkBudget &budget,
                                    const ArraySetup &arrays, const PassChannels &channels);

    /// Array of {ul_az, ul_el, dl_az, dl_el, inr_db} records.
    void write_candidates_json(const CandidateSet &cands, const std::filesystem::path &path);
} // namespace fdx
