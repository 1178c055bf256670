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


#include "fdx/harness.hpp"

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace fdx;

namespace
{
    py::array_t<cdouble> to_numpy(const CVector &v)
    {
        py::array_t<cdouble> out(static_cast<py::ssize_t>(v.size()));
        std::copy(v.begin(), v.end(), out.mutable_data());
        return out;
    }

    py::array_t<double> to_array(const std::vector<double> &v)
    {
        return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
    }

    // Rows of t, ul_az, ul_el, dl_az, dl_el, snr_ul_db, snr_dl_db, inr_db, sinr_dl_db, sum_se.
    py::array_t<double> trace_array(const MetricTrace &tr)
    {
        py::array_t<double> out({static_cast<py::ssize_t>(tr.rows.size()), py::ssize_t{10}});
        auto a = out.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < a.shape(0); ++i)
        {
            const auto &r = tr.rows[static_cast<std::size_t>(i)];
            const double row[10] = {r.t, r.direction[0], r.direction[1], r.direction[2], r.direction[3],
                                    r.metrics.snr_ul_db, r.metrics.snr_dl_db, r.metrics.inr_db, r.metrics.sinr_dl_db,
                                    r.metrics.sum_se_bps_hz};
            for (py::ssize_t k = 0; k < 10; ++k)
                a(i, k) = row[k];
        }
        return out;
    }

    // Rows of t, ul_az, ul_el, dl_az, dl_el, ul_range_km, dl_range_km.
    py::array_t<double> trajectory_array(const Trajectory &traj)
    {
        py::array_t<double> out({static_cast<py::ssize_t>(traj.size()), py::ssize_t{7}});
        auto a = out.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < a.shape(0); ++i)
        {
            const auto &s = traj[static_cast<std::size_t>(i)];
            const double row[7] = {s.t, s.ul_az, s.ul_el, s.dl_az, s.dl_el, s.ul_range_km, s.dl_range_km};
            for (py::ssize_t k = 0; k < 7; ++k)
                a(i, k) = row[k];
        }
        return out;
    }

    py::dict pass_dict(const PassResult &r, const Scenario &s)
    {
        py::dict d;
        d["pair_seed"] = r.pair_seed;
        d["si_seed"] = r.si_seed;
        d["ul_sat"] = r.pair.ul_sat;
        d["dl_sat"] = r.pair.dl_sat;
        d["horizon_start_s"] = r.pair.horizon.t_start;
        d["bias_deg"] = r.bias.beta;
        d["grid_size"] = r.grid_size;
        d["trajectory"] = trajectory_array(r.pair.trajectory);
        py::dict traces;
        for (const auto &t : r.traces)
            traces[py::str(t.scheme)] = trace_array(t);
        d["traces"] = traces;
        py::dict cands;
        for (std::size_t i = 0; i < r.candidates.size(); ++i)
        {
            const CandidateSet &cs = r.candidates[i];
            py::array_t<double> arr({static_cast<py::ssize_t>(cs.size()), py::ssize_t{5}});
            auto a = arr.mutable_unchecked<2>();
            for (std::size_t k = 0; k < cs.size(); ++k)
            {
                const DirectionTuple dir = cs.direction(k);
                for (py::ssize_t j = 0; j < 4; ++j)
                    a(static_cast<py::ssize_t>(k), j) = dir[static_cast<std::size_t>(j)];
                a(static_cast<py::ssize_t>(k), 4) = cs.inr_db[k];
            }
            cands[py::str(s.neighborhoods[i].scheme())] = arr;
        }
        d["candidates"] = cands;
        return d;
    }

    Scenario scenario_from_dict(const std::map<std::string, std::string> &overrides, bool use_env)
    {
        if (use_env)
            return scenario_from_config(overrides);
        return scenario_from_config(overrides, [](const std::string &) { return std::nullopt; });
    }
} // namespace

PYBIND11_MODULE(_fdxtrack, m)
{
    m.doc() = "Full-duplex LEO beam tracking core";
    m.attr("__version__") = FDXTRACK_VERSION;
    m.attr("DB_FLOOR") = kDbFloor;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NoVisiblePairError>(m, "NoVisiblePairError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

    // Scenario ------------------------------------------------------------------
    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("trials", &Scenario::trials)
        .def_readwrite("master_seed", &Scenario::master_seed)
        .def_readwrite("threads", &Scenario::threads)
        .def_readwrite("constellation_seed", &Scenario::constellation_seed)
        .def("scheme_names", &Scenario::scheme_names)
        .def("to_config", [](const Scenario &s) { return scenario_to_config(s); })
        .def("validate", &Scenario::validate);

    m.def("scenario", &scenario_from_dict, py::arg("overrides") = std::map<std::string, std::string>{},
          py::arg("use_env") = true,
          "Default scenario with 'section.key' overrides (string values), then FDXTRACK__* environment overrides.");
    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("trial_seed", &trial_seed, py::arg("master_seed"), py::arg("trial_index"));
    m.def("mix_seed", &mix_seed, py::arg("a"), py::arg("b"));

    // Orbits ----------------------------------------------------------------------
    py::class_<OrbitalElements>(m, "OrbitalElements")
        .def_readonly("sat_id", &OrbitalElements::sat_id)
        .def_readonly("shell", &OrbitalElements::shell)
        .def_readonly("plane", &OrbitalElements::plane)
        .def_readonly("slot", &OrbitalElements::slot)
        .def_readonly("altitude_km", &OrbitalElements::altitude_km)
        .def_readonly("inclination_deg", &OrbitalElements::inclination_deg)
        .def_readonly("raan_deg", &OrbitalElements::raan_deg)
        .def_readonly("arg_latitude_deg", &OrbitalElements::arg_latitude_deg)
        .def_property_readonly("period_s", &OrbitalElements::period_s);

    m.def("generate_constellation", [](const Scenario &s) { return generate_constellation(s.shells, s.constellation_seed); },
          py::arg("scenario"));
    m.def("select_pair",
          [](const Scenario &s, std::uint64_t seed)
          {
              const auto c = generate_constellation(s.shells, s.constellation_seed);
              const SatellitePair p = select_pair(c, s.site, s.search, seed);
              py::dict d;
              d["ul_sat"] = p.ul_sat;
              d["dl_sat"] = p.dl_sat;
              d["horizon_start_s"] = p.horizon.t_start;
              d["trajectory"] = trajectory_array(p.trajectory);
              return d;
          },
          py::arg("scenario"), py::arg("pair_seed"));

    // Array and link --------------------------------------------------------------
    m.def("array_response",
          [](int rows, int cols, double spacing, double az, double el)
          { return to_numpy(array_response({rows, cols, spacing}, {az, el})); },
          py::arg("rows"), py::arg("cols"), py::arg("spacing"), py::arg("az_deg"), py::arg("el_deg"));
    m.def("matched_filter_beam",
          [](int rows, int cols, double spacing, double az, double el, int phase_bits)
          { return to_numpy(matched_filter_beam({rows, cols, spacing}, {az, el}, {phase_bits}).weights); },
          py::arg("rows"), py::arg("cols"), py::arg("spacing"), py::arg("az_deg"), py::arg("el_deg"),
          py::arg("phase_bits") = 0);
    m.def("path_gain", &path_gain, py::arg("range_km"), py::arg("carrier_hz"));
    m.def("sinr_downlink_db", &sinr_downlink_db, py::arg("snr_dl_db"), py::arg("inr_db"));
    m.def("sum_se", &sum_se, py::arg("snr_ul_db"), py::arg("sinr_dl_db"));
    m.def("si_model_ids", &si_model_ids);

    // Tracker -----------------------------------------------------------------------
    m.def("fit_bias_1d",
          [](const std::vector<double> &angles, double step, double res) { return fit_bias_1d(angles, step, res); },
          py::arg("angles"), py::arg("step") = 0.001, py::arg("resolution_deg") = 1.0);
    m.def("neighborhood_size",
          [](int daz, int del) { return build_neighborhood(daz, del).offsets.size(); }, py::arg("delta_az"),
          py::arg("delta_el"));

    // Runs ---------------------------------------------------------------------------
    m.def("run_pass",
          [](const Scenario &s, std::uint64_t seed, bool keep)
          {
              PassResult r;
              {
                  py::gil_scoped_release release;
                  r = run_pass(s, seed, {.keep_candidates = keep});
              }
              return pass_dict(r, s);
          },
          py::arg("scenario"), py::arg("pair_seed"), py::arg("keep_candidates") = false);

    m.def("run_campaign",
          [](const Scenario &s)
          {
              CampaignResult r;
              {
                  py::gil_scoped_release release;
                  r = run_campaign(s);
              }
              py::dict d;
              d["trial_indices"] = r.trial_indices;
              py::list passes;
              for (const auto &p : r.passes)
                  passes.append(pass_dict(p, s));
              d["passes"] = passes;
              py::list failures;
              for (const auto &f : r.failures)
                  failures.append(py::make_tuple(f.trial, f.seed, f.message));
              d["failures"] = failures;
              py::dict cdfs;
              for (const auto &c : r.cdfs)
                  cdfs[py::make_tuple(c.metric, c.scheme)] = py::make_tuple(to_array(c.values), to_array(c.probs));
              d["cdfs"] = cdfs;
              return d;
          },
          py::arg("scenario"));
}
