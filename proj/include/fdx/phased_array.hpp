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

#include "fdx/common.hpp"

#include <cstddef>
#include <span>

namespace fdx
{
    /// Uniform planar array in the x-y plane, broadside along +z (zenith).
    /// Element (m, n) sits at index m * cols + n.
    struct UpaGeometry
    {
        int rows = 16;
        int cols = 16;
        double spacing_wavelengths = 0.5;

        std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
        void validate() const;
    };

    /// Azimuth and elevation-from-broadside, degrees.
    struct SteeringDirection
    {
        double az = 0.0;
        double el = 0.0;
    };

    enum class BeamKind
    {
        transmit,
        receive
    };

    /// phase_bits = 0 means ideal (continuous) phase shifters.
    struct QuantizerSpec
    {
        int phase_bits = 0;

        std::size_t lattice_size() const { return std::size_t{1} << phase_bits; }
    };

    /// Phase-only analog beam with per-element magnitude 1/sqrt(N).
    struct BeamWeights
    {
        CVector weights;
        BeamKind kind = BeamKind::transmit;

        std::size_t size() const { return weights.size(); }
    };

    /// Direction cosines (u, v) of a steering direction.
    std::pair<double, double> direction_cosines(SteeringDirection dir);

    /// exp(j 2 pi d (m u + n v)) for every element.
    CVector array_response(const UpaGeometry &geom, SteeringDirection dir);

    /// Matched-filter beam toward dir, phases snapped to the quantizer lattice when phase_bits > 0.
    BeamWeights matched_filter_beam(const UpaGeometry &geom, SteeringDirection dir, QuantizerSpec quant = {},
                                    BeamKind kind = BeamKind::transmit);

    /// w^H x. Throws ContractViolation on a length mismatch.
    cdouble beam_coupling(std::span<const cdouble> w, std::span<const cdouble> x);

    inline cdouble beam_coupling(const BeamWeights &w, std::span<const cdouble> x)
    {
        return beam_coupling(std::span<const cdouble>(w.weights), x);
    }

    /// |w^H a(dir)|^2 in dB.
    double beam_gain_db(const BeamWeights &w, const UpaGeometry &geom, SteeringDirection dir);
} // namespace fdx
