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

#include "fdx/phased_array.hpp"

#include <fmt/format.h>

namespace fdx
{
    void UpaGeometry::validate() const
    {
        if (rows <= 0 || cols <= 0)
            throw ConfigError(fmt::format("array dimensions {}x{} must be positive", rows, cols));
        if (!(spacing_wavelengths > 0.0))
            throw ConfigError("array element spacing must be positive");
    }

    std::pair<double, double> direction_cosines(SteeringDirection dir)
    {
        const double s = std::sin(deg2rad(dir.el));
        const double az = deg2rad(dir.az);
        return {s * std::cos(az), s * std::sin(az)};
    }

    namespace
    {
        // Element phase in radians, unwrapped.
        template <typename F>
        void for_each_phase(const UpaGeometry &geom, SteeringDirection dir, F &&f)
        {
            const auto [u, v] = direction_cosines(dir);
            const double k = 2.0 * std::numbers::pi * geom.spacing_wavelengths;
            std::size_t idx = 0;
            for (int m = 0; m < geom.rows; ++m)
                for (int n = 0; n < geom.cols; ++n)
                    f(idx++, k * (m * u + n * v));
        }
    } // namespace

    CVector array_response(const UpaGeometry &geom, SteeringDirection dir)
    {
        CVector a(geom.size());
        for_each_phase(geom, dir, [&](std::size_t i, double phase) { a[i] = std::polar(1.0, phase); });
        return a;
    }

    BeamWeights matched_filter_beam(const UpaGeometry &geom, SteeringDirection dir, QuantizerSpec quant, BeamKind kind)
    {
        if (quant.phase_bits < 0 || quant.phase_bits > 30)
            throw ContractViolation("phase_bits must lie in [0, 30]");
        const double scale = 1.0 / std::sqrt(static_cast<double>(geom.size()));
        const double lsb = 2.0 * std::numbers::pi / static_cast<double>(quant.lattice_size());

        BeamWeights w;
        w.kind = kind;
        w.weights.resize(geom.size());
        for_each_phase(geom, dir,
                       [&](std::size_t i, double phase)
                       {
                           if (quant.phase_bits > 0)
                           {
                               const double steps = std::round(phase / lsb);
                               const auto lattice = static_cast<double>(quant.lattice_size());
                               phase = std::fmod(steps, lattice) * lsb;
                           }
                           w.weights[i] = std::polar(scale, phase);
                       });
        return w;
    }

    cdouble beam_coupling(std::span<const cdouble> w, std::span<const cdouble> x)
    {
        if (w.size() != x.size())
            throw ContractViolation(fmt::format("beam length {} does not match vector length {}", w.size(), x.size()));
        // Split real/imag accumulation; std::complex multiply is slow without -ffast-math.
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
        {
            const double a = w[i].real(), b = w[i].imag();
            const double c = x[i].real(), d = x[i].imag();
            re += a * c + b * d;
            im += a * d - b * c;
        }
        return {re, im};
    }

    double beam_gain_db(const BeamWeights &w, const UpaGeometry &geom, SteeringDirection dir)
    {
        return to_db(std::norm(beam_coupling(w, array_response(geom, dir))));
    }
} // namespace fdx
