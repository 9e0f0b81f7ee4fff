// Python bindings over the core library. Structured results cross the
// boundary as plain dicts and lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "geocohort/dbscan.hpp"
#include "geocohort/entities.hpp"
#include "geocohort/errors.hpp"
#include "geocohort/evaluation.hpp"
#include "geocohort/gazetteer.hpp"
#include "geocohort/metrics.hpp"
#include "geocohort/pipeline.hpp"
#include "geocohort/regression.hpp"
#include "geocohort/synthetic.hpp"
#include "geocohort/text.hpp"

namespace py = pybind11;
namespace gc = geocohort;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict candidate_dict(const gc::GeoCandidate& c) {
  py::dict d;
  d["gazetteer_id"] = c.gazetteer_id;
  d["name"] = c.primary_name;
  d["lat"] = c.latitude;
  d["lon"] = c.longitude;
  d["country"] = c.country_code;
  d["admin1"] = c.admin1;
  d["city"] = c.city;
  d["population"] = c.population;
  d["granularity"] = std::string(gc::to_string(c.granularity));
  return d;
}

gc::Grade grade_from_name(const std::string& name) {
  for (auto g : gc::kAllGrades) {
    if (gc::to_string(g) == name) return g;
  }
  throw py::value_error("unknown grade: " + name);
}

const gc::NormalizationTables& default_tables() {
  static const auto t = gc::NormalizationTables::defaults();
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Home-location inference and cohort topic analysis";

  static py::exception<gc::Error> error(m, "GeocohortError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const gc::Error& e) {
      py::set_error(error, (std::string(gc::to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.attr("COMMANDS") = std::vector<std::string>(gc::kCommands.begin(), gc::kCommands.end());

  m.def(
      "dbscan",
      [](const std::vector<std::pair<double, double>>& points, double eps, int min_pts) {
        std::vector<gc::LatLon> pts;
        pts.reserve(points.size());
        for (const auto& [lat, lon] : points) pts.push_back({lat, lon});
        return gc::dbscan(pts, eps, min_pts);
      },
      py::arg("points"), py::arg("eps") = 2.5, py::arg("min_pts") = 2,
      "Cluster labels for (lat, lon) points; -1 marks noise.");

  py::class_<gc::GazetteerIndex>(m, "Gazetteer")
      .def_static(
          "load", [](const std::filesystem::path& path) { return gc::GazetteerIndex::load(path); },
          py::arg("path"))
      .def("__len__", [](const gc::GazetteerIndex& g) { return g.candidates().size(); })
      .def("__contains__", &gc::GazetteerIndex::contains)
      .def(
          "lookup",
          [](const gc::GazetteerIndex& g, const std::string& name) {
            py::list out;
            for (const auto& c : g.lookup(name)) out.append(candidate_dict(c));
            return out;
          },
          py::arg("name"), "Candidates for a normalized name, population descending.");

  m.def(
      "normalize",
      [](const std::string& surface, const gc::GazetteerIndex& gazetteer) {
        return gc::normalize_and_expand(gc::to_lower_ascii(surface), default_tables(), gazetteer,
                                        gc::is_all_upper(surface));
      },
      py::arg("surface"), py::arg("gazetteer"),
      "Normalized and expanded names for one raw mention, as written in the text.");

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return gc::evaluate_auc(scores, labels);
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "accuracy",
      [](const std::vector<std::string>& grades) {
        std::vector<gc::Grade> gs;
        gs.reserve(grades.size());
        for (const auto& g : grades) gs.push_back(grade_from_name(g));
        return to_python(gc::accuracy_report(gs).to_json());
      },
      py::arg("grades"), "Accuracy rates for grade names such as 'full' or 'missed_none'.");

  m.def(
      "ols",
      [](const std::vector<std::tuple<double, bool, bool>>& rows) {
        std::vector<gc::DesignRow> design;
        design.reserve(rows.size());
        for (const auto& [y, post_covid, red_state] : rows) {
          design.push_back(gc::DesignRow::make({2020, 1}, y, post_covid, red_state));
        }
        const auto r = gc::ols_fit(design);
        py::dict d;
        d["terms"] = std::vector<std::string>(gc::kTermNames.begin(), gc::kTermNames.end());
        d["coefficients"] = r.coefficients;
        d["standard_errors"] = r.standard_errors;
        d["t_stats"] = r.t_stats;
        d["p_values"] = r.p_values;
        d["rss"] = r.rss;
        d["n"] = r.n;
        d["df"] = r.df;
        return d;
      },
      py::arg("rows"), "Fit y ~ post_covid * red_state from (y, post_covid, red_state) rows.");

  m.def(
      "write_synthetic",
      [](const gc::GazetteerIndex& gazetteer, const std::filesystem::path& out_dir, std::size_t users,
         std::uint64_t seed) {
        gc::SyntheticOptions o;
        o.users = users;
        o.seed = seed;
        const auto cohort = gc::generate_cohort(gazetteer, default_tables(), o);
        gc::write_cohort(cohort, out_dir);
        return cohort.posts.size();
      },
      py::arg("gazetteer"), py::arg("out_dir"), py::arg("users") = 200, py::arg("seed") = 1,
      "Write corpus.jsonl and annotations.tsv with planted homes; returns the post count.");

  m.def(
      "default_config", [] { return to_python(gc::PipelineConfig{}.to_json()); },
      "The effective default pipeline config.");

  m.def(
      "run",
      [](const std::string& command, const py::object& config) {
        const auto parsed = gc::PipelineConfig::from_json(config.is_none() ? nlohmann::json::object()
                                                                            : from_python(config));
        std::ostringstream log, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = gc::run_command(command, parsed, log, err);
        }
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("command"), py::arg("config") = py::none(),
      "Run one pipeline stage; returns (exit_code, log, stderr).");
}
