#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fuzzymon/acceptance.hpp"
#include "fuzzymon/config.hpp"
#include "fuzzymon/emit.hpp"
#include "fuzzymon/errors.hpp"
#include "fuzzymon/presets.hpp"
#include "fuzzymon/theory.hpp"

namespace py = pybind11;
namespace fm = fuzzymon;

namespace {

// JSON crosses the boundary as text; the Python side wraps json.loads/dumps.
std::string canonical(const std::string& text) { return fm::dump_json(fm::config_to_json(fm::parse_config_text(text))); }

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict trace_dict(const fm::SampleSeries& s) {
  py::array_t<double> occ({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(s.dim)});
  std::copy(s.occupation.begin(), s.occupation.end(), occ.mutable_data());
  py::dict d;
  d["k"] = to_array(s.step);
  d["t"] = to_array(s.time);
  d["f"] = to_array(s.readout);
  d["occ"] = occ;
  d["X"] = to_array(s.walk);
  return d;
}

py::dict run(const std::string& text, unsigned workers) {
  const fm::ExperimentConfig c = fm::parse_config_text(text);
  fm::EnsembleSummary s;
  {
    py::gil_scoped_release release;
    s = fm::run_batch(fm::build_experiment(c), fm::build_analysis(c), c.run.M, c.run.master_seed, workers);
  }
  py::dict d;
  d["summary"] = fm::dump_json(fm::summary_to_json(s));
  d["derived"] = fm::dump_json(fm::derived_to_json(fm::derive(c)));
  d["final_walk"] = to_array(s.final_walk);
  d["theta"] = to_array(s.theta);
  d["readout_mean"] = to_array(s.readout_mean);
  d["first_reduction_step"] = to_array(s.first_reduction_step);
  d["switch_count"] = to_array(s.switch_count);
  py::list traces;
  for (const fm::TrajectoryRecord& r : s.traces) traces.append(trace_dict(r.samples));
  d["traces"] = traces;
  return d;
}

std::vector<std::string> write_files(const std::string& text, const std::string& out, unsigned workers) {
  fm::ExperimentConfig c = fm::parse_config_text(text);
  c.output.directory = out;
  py::gil_scoped_release release;
  const fm::EnsembleSummary s =
      fm::run_batch(fm::build_experiment(c), fm::build_analysis(c), c.run.M, c.run.master_seed, workers);
  const fm::OutputMetadata meta{c.run.master_seed, c.plan.K, c.run.M, 1.0, "unscaled"};
  return fm::write_artifacts(out, c, s, meta, {});
}

py::list checks_list(const std::vector<fm::CheckResult>& checks) {
  py::list l;
  for (const auto& c : checks) l.append(py::make_tuple(c.name, c.passed, c.detail));
  return l;
}

py::dict preset(const std::string& name, std::optional<double> scale, std::optional<std::uint64_t> seed,
                const std::string& out, unsigned workers) {
  fm::PresetRunOptions opt;
  opt.scale = scale;
  opt.seed = seed;
  opt.out = out;
  opt.workers = workers;
  fm::PresetReport r;
  {
    py::gil_scoped_release release;
    r = fm::run_preset(name, opt);
  }
  py::dict d;
  d["passed"] = r.passed();
  d["checks"] = checks_list(r.checks);
  std::vector<std::string> files;
  for (const auto& f : r.files) files.push_back(f.string());
  d["files"] = files;
  return d;
}

py::dict criterion(int id, unsigned workers, std::uint64_t seed) {
  fm::AcceptanceOptions opt;
  opt.workers = workers;
  opt.seed = seed;
  fm::CriterionResult r;
  {
    py::gil_scoped_release release;
    r = fm::run_criterion(id, opt);
  }
  py::dict d;
  d["id"] = r.id;
  d["title"] = r.title;
  d["passed"] = r.passed();
  d["seconds"] = r.seconds;
  d["checks"] = checks_list(r.checks);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Monte Carlo engine for continuous fuzzy measurement";

  auto base = py::register_exception<fm::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<fm::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<fm::IoError>(m, "IoError", base.ptr());

  m.def("canonical_config", &canonical, py::arg("text"));
  m.def("load_config", [](const std::string& path) { return fm::dump_json(fm::config_to_json(fm::load_config(path))); },
        py::arg("path"));
  m.def("derive", [](const std::string& text) { return fm::dump_json(fm::derived_to_json(fm::derive(fm::parse_config_text(text)))); },
        py::arg("text"));
  m.def("run", &run, py::arg("text"), py::arg("workers") = 1);
  m.def("write_artifacts", &write_files, py::arg("text"), py::arg("out"), py::arg("workers") = 1);

  m.def("preset_names", &fm::preset_names);
  m.def("run_preset", &preset, py::arg("name"), py::arg("scale") = py::none(), py::arg("seed") = py::none(),
        py::arg("out") = "out", py::arg("workers") = 1);
  m.def("run_criterion", &criterion, py::arg("id"), py::arg("workers") = 1,
        py::arg("seed") = fm::kAcceptanceSeed);
  m.attr("criterion_count") = fm::kCriterionCount;

  m.def("theta_pdf", &fm::theta_pdf, py::arg("x"), py::arg("K"), py::arg("delta_a_T"));
  m.def("theta_cdf", &fm::theta_cdf, py::arg("x"), py::arg("K"), py::arg("delta_a_T"));
  m.def("theta_mode", &fm::theta_mode, py::arg("K"), py::arg("delta_a_T"));
  m.def("coherence_decay", &fm::coherence_decay, py::arg("kappa"), py::arg("T"), py::arg("delta_a"));
  m.def("survival_prob", &fm::survival_prob, py::arg("kappa_prime"), py::arg("T"), py::arg("delta_a"));
  m.def("zeno_ratio", [](double omega, double kappa, double a, double T) { return fm::zeno_beta2(omega, kappa, a, T).ratio; },
        py::arg("omega"), py::arg("kappa"), py::arg("a"), py::arg("T"));
  m.def("zeno_ratio_asymptote", &fm::zeno_ratio_asymptote, py::arg("kappa"), py::arg("a"), py::arg("T"));
}
