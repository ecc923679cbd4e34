#include "fuzzymon/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "fuzzymon/errors.hpp"
#include "fuzzymon/theory.hpp"

namespace fuzzymon {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (v.is_number_integer()) {
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::uint64_t{std::numeric_limits<std::int64_t>::max()}) {
      fail(path, "integer out of range");
    }
    return v.get<std::int64_t>();
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 9.0e15) return static_cast<std::int64_t>(x);
  }
  fail(path, "expected an integer");
}

std::uint64_t as_uint(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const std::int64_t x = as_int(v, path);
  if (x < 0) fail(path, "must be >= 0");
  return static_cast<std::uint64_t>(x);
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

Complex as_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {as_real(v, path), 0.0};
  if (v.is_array() && v.size() == 2) return {as_real(v[0], index(path, 0)), as_real(v[1], index(path, 1))};
  fail(path, "expected a number or [re, im]");
}

std::vector<double> as_real_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real(v[i], index(path, i)));
  return out;
}

std::vector<Complex> as_complex_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected a list");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_complex(v[i], index(path, i)));
  return out;
}

/// Object view that remembers which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* find(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  const json& need(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(join(path_, key), "required key is missing");
    return *v;
  }

  std::string at(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) fail(join(path_, it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

MeterKind parse_kind(const json& v, const std::string& path) {
  const std::string s = as_string(v, path);
  if (s == "gaussian") return MeterKind::gaussian;
  if (s == "hard_wall") return MeterKind::hard_wall;
  fail(path, "unknown meter kind '" + s + "' (gaussian, hard_wall)");
}

PostSelectionMode parse_mode(const json& v, const std::string& path) {
  const std::string s = as_string(v, path);
  if (s == "born_weight") return PostSelectionMode::born_weight;
  if (s == "verdict_indicator") return PostSelectionMode::verdict_indicator;
  fail(path, "unknown post-selection mode '" + s + "' (born_weight, verdict_indicator)");
}

HistogramSpec parse_histogram(const json& v, const std::string& path) {
  Section s(v, path);
  HistogramSpec h;
  h.lo = as_real(s.need("lo"), s.at("lo"));
  h.hi = as_real(s.need("hi"), s.at("hi"));
  const std::int64_t bins = as_int(s.need("bins"), s.at("bins"));
  if (bins < 1) fail(s.at("bins"), "must be >= 1");
  h.bins = static_cast<std::size_t>(bins);
  s.finish();
  return h;
}

json complex_list_to_json(const std::vector<Complex>& v) {
  json out = json::array();
  for (const Complex& z : v) out.push_back(json::array({z.real(), z.imag()}));
  return out;
}

json histogram_to_json(const HistogramSpec& h) { return {{"lo", h.lo}, {"hi", h.hi}, {"bins", h.bins}}; }

CVector to_cvector(const std::vector<Complex>& v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

StateVector build_state(const std::vector<Complex>& amps, bool normalize) {
  return normalize ? StateVector::normalized(to_cvector(amps)) : StateVector(to_cvector(amps));
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  Section root(j, "");
  ExperimentConfig c;
  if (const json* v = root.find("name")) c.name = as_string(*v, "name");

  {
    Section s(root.need("system"), "system");
    c.system.eigenvalues = as_real_list(s.need("eigenvalues"), s.at("eigenvalues"));
    if (const json* v = s.find("energies")) c.system.energies = as_real_list(*v, s.at("energies"));
    if (const json* v = s.find("omega")) c.system.omega = as_real(*v, s.at("omega"));
    s.finish();
  }
  {
    Section s(root.need("meter"), "meter");
    c.meter.kind = parse_kind(s.need("kind"), s.at("kind"));
    if (const json* v = s.find("delta_f")) c.meter.delta_f = as_real(*v, s.at("delta_f"));
    if (const json* v = s.find("coupling")) c.meter.coupling = as_real(*v, s.at("coupling"));
    s.finish();
  }
  {
    Section s(root.need("plan"), "plan");
    c.plan.T = as_real(s.need("T"), s.at("T"));
    c.plan.K = as_int(s.need("K"), s.at("K"));
    s.finish();
  }
  {
    Section s(root.need("initial_state"), "initial_state");
    c.initial_state.amplitudes = as_complex_list(s.need("amplitudes"), s.at("amplitudes"));
    if (const json* v = s.find("normalize")) c.initial_state.normalize = as_bool(*v, s.at("normalize"));
    s.finish();
  }
  if (const json* rv = root.find("run")) {
    Section s(*rv, "run");
    if (const json* v = s.find("M")) c.run.M = as_int(*v, s.at("M"));
    if (const json* v = s.find("master_seed")) c.run.master_seed = as_uint(*v, s.at("master_seed"));
    if (const json* v = s.find("s_max")) c.run.s_max = as_int(*v, s.at("s_max"));
    if (const json* v = s.find("workers")) {
      const std::int64_t w = as_int(*v, s.at("workers"));
      if (w < 1 || w > 4096) fail(s.at("workers"), "must be in 1..4096");
      c.run.workers = static_cast<unsigned>(w);
    }
    s.finish();
  }
  if (const json* av = root.find("analysis")) {
    Section s(*av, "analysis");
    if (const json* v = s.find("grid_points")) c.analysis.grid_points = as_int(*v, s.at("grid_points"));
    if (const json* v = s.find("survival_points")) c.analysis.survival_points = as_int(*v, s.at("survival_points"));
    if (const json* v = s.find("keep_traces")) c.analysis.keep_traces = as_int(*v, s.at("keep_traces"));
    if (const json* v = s.find("walk_histogram")) c.analysis.walk_histogram = parse_histogram(*v, s.at("walk_histogram"));
    if (const json* v = s.find("theta_histogram")) {
      c.analysis.theta_histogram = parse_histogram(*v, s.at("theta_histogram"));
    }
    if (const json* v = s.find("post_selection")) {
      const std::string path = s.at("post_selection");
      if (!v->is_array()) fail(path, "expected a list");
      for (std::size_t i = 0; i < v->size(); ++i) {
        Section p((*v)[i], index(path, i));
        PostSelectionSpec ps;
        ps.target = as_complex_list(p.need("target"), p.at("target"));
        if (const json* m = p.find("mode")) ps.mode = parse_mode(*m, p.at("mode"));
        if (const json* l = p.find("label")) ps.label = as_string(*l, p.at("label"));
        if (ps.label.empty()) ps.label = "post_" + std::to_string(i);
        p.finish();
        c.analysis.post_selection.push_back(std::move(ps));
      }
    }
    s.finish();
  }
  if (const json* ov = root.find("output")) {
    Section s(*ov, "output");
    if (const json* v = s.find("directory")) c.output.directory = as_string(*v, s.at("directory"));
    if (const json* v = s.find("formats")) {
      const std::string path = s.at("formats");
      if (!v->is_array()) fail(path, "expected a list");
      c.output.formats.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string f = as_string((*v)[i], index(path, i));
        if (f != "csv" && f != "json") fail(index(path, i), "unknown format '" + f + "' (csv, json)");
        c.output.formats.push_back(f);
      }
    }
    s.finish();
  }
  root.finish();
  validate(c);
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("<root>: malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open configuration file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["system"] = {{"eigenvalues", c.system.eigenvalues}, {"energies", c.system.energies}, {"omega", c.system.omega}};
  json meter = {{"kind", std::string(to_string(c.meter.kind))}};
  if (c.meter.delta_f) meter["delta_f"] = *c.meter.delta_f;
  if (c.meter.coupling) meter["coupling"] = *c.meter.coupling;
  j["meter"] = meter;
  j["plan"] = {{"T", c.plan.T}, {"K", c.plan.K}};
  j["initial_state"] = {{"amplitudes", complex_list_to_json(c.initial_state.amplitudes)},
                        {"normalize", c.initial_state.normalize}};
  j["run"] = {{"M", c.run.M}, {"master_seed", c.run.master_seed}, {"s_max", c.run.s_max}, {"workers", c.run.workers}};
  json analysis = {{"grid_points", c.analysis.grid_points},
                   {"survival_points", c.analysis.survival_points},
                   {"keep_traces", c.analysis.keep_traces}};
  if (c.analysis.walk_histogram) analysis["walk_histogram"] = histogram_to_json(*c.analysis.walk_histogram);
  if (c.analysis.theta_histogram) analysis["theta_histogram"] = histogram_to_json(*c.analysis.theta_histogram);
  json ps = json::array();
  for (const PostSelectionSpec& p : c.analysis.post_selection) {
    ps.push_back({{"target", complex_list_to_json(p.target)},
                  {"mode", std::string(to_string(p.mode))},
                  {"label", p.label}});
  }
  analysis["post_selection"] = ps;
  j["analysis"] = analysis;
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  return j;
}

void validate(const ExperimentConfig& c) {
  const std::size_t n = c.system.eigenvalues.size();
  at_path("system.eigenvalues", [&] { return Observable(c.system.eigenvalues); });
  if (!c.system.energies.empty() && c.system.energies.size() != n) {
    fail("system.energies", "needs one entry per eigenvalue (" + std::to_string(n) + ")");
  }
  if (c.meter.delta_f.has_value() == c.meter.coupling.has_value()) {
    fail("meter", "exactly one of delta_f and coupling must be given");
  }
  if (c.meter.delta_f && !(*c.meter.delta_f > 0.0)) fail("meter.delta_f", "must be > 0");
  if (c.meter.coupling && !(*c.meter.coupling > 0.0)) fail("meter.coupling", "must be > 0");
  if (!(c.plan.T > 0.0)) fail("plan.T", "must be > 0");
  if (c.plan.K < 1) fail("plan.K", "must be >= 1");
  if (c.initial_state.amplitudes.size() != n) {
    fail("initial_state.amplitudes", "needs one amplitude per eigenvalue (" + std::to_string(n) + ")");
  }
  at_path("initial_state.amplitudes", [&] { return build_state(c.initial_state.amplitudes, c.initial_state.normalize); });
  if (c.run.M < 1) fail("run.M", "must be >= 1");
  if (c.run.s_max < 2) fail("run.s_max", "must be >= 2");
  if (c.run.workers < 1) fail("run.workers", "must be >= 1");
  if (c.analysis.grid_points < 0 || c.analysis.grid_points == 1) fail("analysis.grid_points", "must be 0 or >= 2");
  if (c.analysis.grid_points > c.plan.K) fail("analysis.grid_points", "must not exceed plan.K");
  if (c.analysis.survival_points < 0) fail("analysis.survival_points", "must be >= 0");
  if (c.analysis.keep_traces < 0) fail("analysis.keep_traces", "must be >= 0");
  for (const auto& [key, h] : {std::pair{"analysis.walk_histogram", c.analysis.walk_histogram},
                               std::pair{"analysis.theta_histogram", c.analysis.theta_histogram}}) {
    if (h && !(h->hi > h->lo)) fail(key, "hi must exceed lo");
  }
  for (std::size_t i = 0; i < c.analysis.post_selection.size(); ++i) {
    const PostSelectionSpec& p = c.analysis.post_selection[i];
    const std::string path = index("analysis.post_selection", i);
    if (p.target.size() != n) fail(path + ".target", "needs one amplitude per eigenvalue");
    const StateVector t = at_path(path + ".target", [&] { return StateVector(to_cvector(p.target)); });
    if (p.mode == PostSelectionMode::verdict_indicator) {
      bool basis = false;
      for (std::size_t j = 0; j < n; ++j) basis = basis || std::norm(t[j]) > 1.0 - 1e-12;
      if (!basis) fail(path + ".mode", "verdict_indicator needs a basis-state target");
    }
  }
  if (c.output.directory.empty()) fail("output.directory", "must not be empty");
  at_path("meter", [&] { return build_experiment(c); });
}

DerivedQuantities derive(const ExperimentConfig& c) {
  DerivedQuantities d;
  const MeterModel m = build_meter(c);
  const MonitoringPlan plan(c.plan.T, c.plan.K, m);
  d.tau = plan.tau();
  d.delta_f = plan.delta_f();
  d.coupling = plan.coupling();
  const Observable obs(c.system.eigenvalues);
  d.delta_a = std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r < obs.dim(); ++r) {
    d.delta_a = std::min(d.delta_a, obs.sorted_values()[r] - obs.sorted_values()[r - 1]);
  }
  if (c.system.omega != 0.0) d.t_r = 2.0 * std::numbers::pi / std::fabs(c.system.omega);
  const LevelResolutionTimes lr = level_resolution_times(d.coupling, d.delta_a, d.t_r.value_or(1.0));
  if (m.kind() == MeterKind::gaussian) {
    d.delta_a_T = plan.delta_a_T();
    d.t_lr = lr.t_lr;
  } else {
    d.t_lr_prime = lr.t_lr_prime;
    if (d.t_r) d.t_stay = lr.t_stay;
  }
  return d;
}

json derived_to_json(const DerivedQuantities& d) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"tau", d.tau},
          {"delta_f", d.delta_f},
          {"coupling", d.coupling},
          {"delta_a", d.delta_a},
          {"delta_a_T", opt(d.delta_a_T)},
          {"T_LR", opt(d.t_lr)},
          {"T_LR_prime", opt(d.t_lr_prime)},
          {"T_R", opt(d.t_r)},
          {"T_stay", opt(d.t_stay)}};
}

Hamiltonian build_hamiltonian(const SystemSpec& s) {
  const std::size_t n = s.eigenvalues.size();
  std::vector<double> e = s.energies;
  if (e.empty()) e.assign(n, 0.0);
  if (n == 2) return Hamiltonian::two_level(e[0], e[1], s.omega);
  CMatrix h = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    h(jj, jj) = e[j];
    if (j + 1 < n) h(jj, jj + 1) = h(jj + 1, jj) = s.omega;
  }
  return Hamiltonian::general(std::move(h));
}

MeterModel build_meter(const ExperimentConfig& c) {
  const double tau = c.plan.T / static_cast<double>(c.plan.K);
  const double df =
      c.meter.delta_f ? *c.meter.delta_f : MonitoringPlan::delta_f_for_coupling(c.meter.kind, *c.meter.coupling, tau);
  return c.meter.kind == MeterKind::gaussian ? MeterModel::gaussian(df) : MeterModel::hard_wall(df);
}

Experiment build_experiment(const ExperimentConfig& c) {
  const MeterModel m = build_meter(c);
  Experiment exp{build_hamiltonian(c.system),
                 Observable(c.system.eigenvalues),
                 build_state(c.initial_state.amplitudes, c.initial_state.normalize),
                 m,
                 MonitoringPlan(c.plan.T, c.plan.K, m),
                 c.run.s_max};
  exp.validate();
  return exp;
}

AnalysisSpec build_analysis(const ExperimentConfig& c) {
  AnalysisSpec a;
  a.grid_points = c.analysis.grid_points;
  a.survival_points = c.analysis.survival_points;
  a.keep_traces = c.analysis.keep_traces;
  if (c.analysis.walk_histogram) {
    const HistogramSpec& h = *c.analysis.walk_histogram;
    a.walk_edges = uniform_edges(h.lo, h.hi, h.bins);
  }
  if (c.analysis.theta_histogram) {
    const HistogramSpec& h = *c.analysis.theta_histogram;
    a.theta_edges = uniform_edges(h.lo, h.hi, h.bins);
  }
  for (const PostSelectionSpec& p : c.analysis.post_selection) {
    a.post_selection.push_back({StateVector(to_cvector(p.target)), p.mode, p.label});
  }
  return a;
}

}  // namespace fuzzymon
