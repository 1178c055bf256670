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

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdx
{
    using cdouble = std::complex<double>;
    using CVector = std::vector<cdouble>;

    /// Reported value for any linear quantity below kLinearFloor.
    inline constexpr double kDbFloor = -300.0;
    inline constexpr double kLinearFloor = 1e-30;

    inline constexpr double kSpeedOfLight = 299792458.0; // m/s

    inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
    inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

    inline double to_db(double linear)
    {
        if (!(linear >= kLinearFloor))
            return kDbFloor;
        return 10.0 * std::log10(linear);
    }

    inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

    /// Maps any angle in degrees onto [-180, 180).
    inline double wrap_azimuth_deg(double az)
    {
        double w = std::fmod(az + 180.0, 360.0);
        if (w < 0.0)
            w += 360.0;
        return w - 180.0;
    }

    // Error types. Each maps onto one CLI exit code.

    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class NoVisiblePairError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Violated precondition on a library call (dimension mismatch, empty input, ...).
    class ContractViolation : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// splitmix64 finalizer; used for every seed derivation in the project.
    inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
    {
        std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
} // namespace fdx
