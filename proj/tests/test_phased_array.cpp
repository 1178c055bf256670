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

#include "fdx/phased_array.hpp"

#include <random>
#include <tuple>

using namespace fdx;

namespace
{
    // Straight from the definition, no shared helpers with the library.
    CVector response_oracle(int rows, int cols, double d, double az_deg, double el_deg)
    {
        const double pi = std::numbers::pi;
        const double u = std::sin(el_deg * pi / 180.0) * std::cos(az_deg * pi / 180.0);
        const double v = std::sin(el_deg * pi / 180.0) * std::sin(az_deg * pi / 180.0);
        CVector a;
        for (int m = 0; m < rows; ++m)
            for (int n = 0; n < cols; ++n)
                a.push_back(std::exp(cdouble(0.0, 2.0 * pi * d * (m * u + n * v))));
        return a;
    }

    double max_abs_diff(const CVector &a, const CVector &b)
    {
        double e = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            e = std::max(e, std::abs(a[i] - b[i]));
        return e;
    }
} // namespace

TEST_CASE("broadside response is all ones")
{
    const auto a = array_response(UpaGeometry{}, {0.0, 0.0});
    REQUIRE(a.size() == 256);
    for (const auto &x : a)
        CHECK(std::abs(x - cdouble(1.0, 0.0)) < 1e-15);
}

TEST_CASE("two-element endfire responses")
{
    // Row axis carries u = sin(el) cos(az); column axis carries v = sin(el) sin(az).
    const auto rows2 = array_response({2, 1, 0.5}, {0.0, 90.0});
    CHECK(std::abs(rows2[0] - cdouble(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(rows2[1] - cdouble(-1.0, 0.0)) < 1e-12);

    const auto cols2 = array_response({1, 2, 0.5}, {90.0, 90.0});
    CHECK(std::abs(cols2[0] - cdouble(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(cols2[1] - cdouble(-1.0, 0.0)) < 1e-12);

    // A single row sees only v, which is zero at az = 0.
    const auto flat = array_response({1, 2, 0.5}, {0.0, 90.0});
    CHECK(std::abs(flat[1] - cdouble(1.0, 0.0)) < 1e-12);
}

TEST_CASE("array response matches the oracle on random directions")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> az(-180.0, 180.0), el(0.0, 90.0);
    for (const UpaGeometry g : {UpaGeometry{}, UpaGeometry{3, 5, 0.5}, UpaGeometry{4, 2, 0.7}})
        for (int i = 0; i < 200; ++i)
        {
            const SteeringDirection d{az(rng), el(rng)};
            CHECK(max_abs_diff(array_response(g, d), response_oracle(g.rows, g.cols, g.spacing_wavelengths, d.az,
                                                                     d.el)) < 1e-12);
        }
}

TEST_CASE("direction cosines")
{
    auto [u, v] = direction_cosines({30.0, 90.0});
    CHECK(u == doctest::Approx(std::sqrt(3.0) / 2.0));
    CHECK(v == doctest::Approx(0.5));
    std::tie(u, v) = direction_cosines({123.0, 0.0});
    CHECK(u == doctest::Approx(0.0));
    CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("response is 360-periodic in azimuth")
{
    const UpaGeometry g;
    CHECK(max_abs_diff(array_response(g, {-170.0, 40.0}), array_response(g, {190.0, 40.0})) < 1e-9);
}

TEST_CASE("matched-filter beam: unit norm and peak gain N")
{
    const UpaGeometry g;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> az(-180.0, 180.0), el(0.0, 90.0);
    for (int i = 0; i < 100; ++i)
    {
        const SteeringDirection d{az(rng), el(rng)};
        const BeamWeights w = matched_filter_beam(g, d);
        double norm2 = 0.0;
        for (const auto &x : w.weights)
        {
            norm2 += std::norm(x);
            CHECK(std::abs(x) == doctest::Approx(1.0 / 16.0));
        }
        CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));
        // 10 log10(256) = 24.0824 dB
        CHECK(beam_gain_db(w, g, d) == doctest::Approx(24.082399653118497).epsilon(1e-10));

        // Cauchy-Schwarz bound holds off-target as well.
        const SteeringDirection other{az(rng), el(rng)};
        CHECK(beam_gain_db(w, g, other) <= 24.082399653118497 + 1e-9);
    }
}

TEST_CASE("phase quantization snaps to the lattice and costs gain")
{
    const UpaGeometry g;
    const SteeringDirection d{37.0, 41.0};
    const double ideal = beam_gain_db(matched_filter_beam(g, d), g, d);
    double previous = -1e9;
    for (int bits : {1, 2, 3, 6})
    {
        const QuantizerSpec q{bits};
        const BeamWeights w = matched_filter_beam(g, d, q);
        const double lsb = 2.0 * std::numbers::pi / static_cast<double>(q.lattice_size());
        for (const auto &x : w.weights)
        {
            const double steps = std::arg(x) / lsb;
            CHECK(std::abs(steps - std::round(steps)) < 1e-9);
            CHECK(std::abs(x) == doctest::Approx(1.0 / 16.0));
        }
        const double gain = beam_gain_db(w, g, d);
        CHECK(gain <= ideal + 1e-9);
        CHECK(gain >= previous - 0.5); // roughly improves with resolution
        previous = gain;
    }
    CHECK(ideal - previous < 0.05); // 6 bits is close to ideal
    CHECK_THROWS_AS(matched_filter_beam(g, d, QuantizerSpec{-1}), ContractViolation);
}

TEST_CASE("beam coupling conjugates the weights and checks lengths")
{
    const CVector w{{0.0, 1.0}, {1.0, 0.0}};
    const CVector x{{0.0, 1.0}, {2.0, 0.0}};
    // conj(j) * j + 1 * 2 = 3
    const cdouble c = beam_coupling(w, x);
    CHECK(c.real() == doctest::Approx(3.0));
    CHECK(c.imag() == doctest::Approx(0.0));
    const CVector short_x{{1.0, 0.0}};
    CHECK_THROWS_AS(beam_coupling(w, short_x), ContractViolation);
}

TEST_CASE("geometry validation")
{
    CHECK_THROWS_AS((UpaGeometry{0, 4, 0.5}.validate()), ConfigError);
    CHECK_THROWS_AS((UpaGeometry{4, 4, 0.0}.validate()), ConfigError);
    CHECK_NOTHROW(UpaGeometry{}.validate());
}

TEST_CASE("response norm, matched coupling, zero vector")
{
    const UpaGeometry g;
    const SteeringDirection d{-33.0, 48.0};
    const CVector a = array_response(g, d);
    double n2 = 0.0;
    for (const auto &x : a)
    {
        CHECK(std::abs(x) == doctest::Approx(1.0).epsilon(1e-14));
        n2 += std::norm(x);
    }
    CHECK(std::sqrt(n2) == doctest::Approx(16.0));
    const cdouble c = beam_coupling(matched_filter_beam(g, d), a);
    CHECK(c.real() == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(std::abs(c.imag()) < 1e-12);
    const CVector zero(256);
    CHECK(beam_coupling(matched_filter_beam(g, d), zero) == cdouble(0.0, 0.0));
}

TEST_CASE("beam coupling equals a naive sum on random vectors")
{
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 100; ++trial)
    {
        CVector w(37), x(37);
        cdouble naive{};
        for (std::size_t i = 0; i < w.size(); ++i)
        {
            w[i] = {n01(rng), n01(rng)};
            x[i] = {n01(rng), n01(rng)};
            naive += std::conj(w[i]) * x[i];
        }
        CHECK(std::abs(beam_coupling(w, x) - naive) <= 1e-12 * std::abs(naive));
    }
}

TEST_CASE("reciprocity and azimuth mirror symmetry")
{
    const UpaGeometry g{5, 7, 0.5};
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> az(-180.0, 180.0), el(0.0, 90.0);
    for (int i = 0; i < 200; ++i)
    {
        const SteeringDirection d{az(rng), el(rng)};
        // az + 180 at the same elevation flips the sign of both direction cosines.
        const SteeringDirection m{d.az + 180.0, d.el};
        const CVector a = array_response(g, d), b = array_response(g, m);
        for (std::size_t k = 0; k < a.size(); ++k)
            CHECK(std::abs(b[k] - std::conj(a[k])) < 1e-9);

        const SteeringDirection probe{az(rng), el(rng)};
        const SteeringDirection probe_m{probe.az + 180.0, probe.el};
        CHECK(beam_gain_db(matched_filter_beam(g, m), g, probe_m) ==
              doctest::Approx(beam_gain_db(matched_filter_beam(g, d), g, probe)).epsilon(1e-9));
    }
}

TEST_CASE("6-bit quantization: lattice phases and < 0.05 dB loss over 1000 directions")
{
    const UpaGeometry g;
    const QuantizerSpec q{6};
    const double lsb = 2.0 * std::numbers::pi / 64.0;
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> az(-180.0, 180.0), el(0.0, 90.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i)
    {
        const SteeringDirection d{az(rng), el(rng)};
        const BeamWeights w = matched_filter_beam(g, d, q);
        for (const auto &x : w.weights)
        {
            const double steps = std::arg(x) / lsb;
            REQUIRE(std::abs(steps - std::round(steps)) * lsb < 1e-12);
        }
        worst = std::max(worst, beam_gain_db(matched_filter_beam(g, d), g, d) - beam_gain_db(w, g, d));
    }
    CHECK(worst < 0.05);
}
