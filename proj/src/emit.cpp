#include "fuzzymon/emit.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fuzzymon/errors.hpp"
#include "fuzzymon/theory.hpp"

namespace fuzzymon {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json metadata_to_json(const OutputMetadata& meta) {
  return {{"master_seed", meta.master_seed},
          {"K", meta.K},
          {"M", meta.M},
          {"scale", meta.scale},
          {"scale_note", meta.scale_note}};
}

namespace {

void write_meta(std::ostream& out, const OutputMetadata& meta) {
  out << "# master_seed=" << meta.master_seed << '\n'
      << "# K=" << meta.K << '\n'
      << "# M=" << meta.M << '\n'
      << "# scale=" << format_number(meta.scale) << '\n'
      << "# scale_note=" << meta.scale_note << '\n';
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

json moments_to_json(const std::vector<double>& v) {
  const MeanStd m = mean_std(v);
  if (m.n == 0) return nullptr;
  return {{"mean", m.mean}, {"stddev", m.stddev}, {"stderr", m.stderr_mean}, {"n", m.n}};
}

json histogram_to_json(const Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}, {"underflow", h.underflow}, {"overflow", h.overflow}};
}

std::string_view to_string(ReductionDiagnostic d) {
  switch (d) {
    case ReductionDiagnostic::hard_wall_region: return "hard_wall_region";
    case ReductionDiagnostic::walk_threshold: return "walk_threshold";
    case ReductionDiagnostic::none: return "none";
  }
  return "none";
}

bool has_format(const ExperimentConfig& c, const std::string& f) {
  for (const std::string& x : c.output.formats) {
    if (x == f) return true;
  }
  return false;
}

template <class F>
std::string render(F&& f) {
  std::ostringstream out;
  f(out);
  return out.str();
}

}  // namespace

void write_trace_csv(std::ostream& out, const SampleSeries& samples, std::size_t dim, const OutputMetadata& meta) {
  write_meta(out, meta);
  out << "k,t,f";
  for (std::size_t j = 1; j <= dim; ++j) out << ",occ_" << j;
  out << ",X\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << samples.step[i] << ',' << format_number(samples.time[i]) << ',' << format_number(samples.readout[i]);
    for (std::size_t j = 0; j < dim; ++j) out << ',' << format_number(samples.occupation_at(i, j));
    out << ',' << format_number(samples.walk[i]) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const Histogram& h, const std::function<double(double)>* cdf,
                         const OutputMetadata& meta) {
  write_meta(out, meta);
  out << "# underflow=" << h.underflow << '\n' << "# overflow=" << h.overflow << '\n';
  out << "lo,hi,count";
  if (cdf) out << ",expected";
  out << '\n';
  const auto total = static_cast<double>(h.total());
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out << format_number(h.edges[i]) << ',' << format_number(h.edges[i + 1]) << ',' << h.counts[i];
    if (cdf) out << ',' << format_number(total * ((*cdf)(h.edges[i + 1]) - (*cdf)(h.edges[i])));
    out << '\n';
  }
}

void write_conditional_means_csv(std::ostream& out, const std::vector<ConditionalMeanCurve>& curves,
                                 const OutputMetadata& meta) {
  write_meta(out, meta);
  out << "label,mode,k,t,mean,se_model,se_empirical,total_weight,m_eff\n";
  for (const ConditionalMeanCurve& c : curves) {
    const std::string mode = c.mode ? std::string(to_string(*c.mode)) : "none";
    for (const ConditionalMeanPoint& p : c.points) {
      out << c.label << ',' << mode << ',' << p.step << ',' << format_number(p.time) << ',' << format_number(p.mean)
          << ',' << format_number(p.se_model) << ',' << format_number(p.se_empirical) << ','
          << format_number(p.total_weight) << ',' << format_number(p.m_eff) << '\n';
    }
  }
}

void write_survival_csv(std::ostream& out, const std::vector<SurvivalPoint>& points,
                        const std::function<double(std::int64_t)>* theory, const OutputMetadata& meta) {
  write_meta(out, meta);
  out << "k,t,fraction,se";
  if (theory) out << ",theory";
  out << '\n';
  for (const SurvivalPoint& p : points) {
    out << p.step << ',' << format_number(p.time) << ',' << format_number(p.fraction) << ',' << format_number(p.se);
    if (theory) out << ',' << format_number((*theory)(p.step));
    out << '\n';
  }
}

void write_runs_csv(std::ostream& out, const EnsembleSummary& s, const OutputMetadata& meta) {
  write_meta(out, meta);
  out << "stream,final_walk,theta,readout_mean,first_reduction_step,switches\n";
  for (std::size_t i = 0; i < s.final_walk.size(); ++i) {
    out << i << ',' << format_number(s.final_walk[i]) << ',' << format_number(s.theta[i]) << ','
        << format_number(s.readout_mean[i]) << ',' << s.first_reduction_step[i] << ',' << s.switch_count[i] << '\n';
  }
}

json summary_to_json(const EnsembleSummary& s) {
  const CMatrix& rho = s.rho_hat.matrix();
  json j;
  j["M"] = s.M;
  j["master_seed"] = s.master_seed;
  j["dim"] = s.dim;
  j["rho_hat"] = {{"re", matrix_to_json(rho.real())}, {"im", matrix_to_json(rho.imag())}};
  j["rho_se"] = {{"re", matrix_to_json(s.rho_se_re)}, {"im", matrix_to_json(s.rho_se_im)}, {"abs", matrix_to_json(s.rho_abs_se)}};
  j["verdict_counts"] = s.verdict_counts;
  j["mixed_count"] = s.mixed_count;
  j["leaning_counts"] = s.leaning_counts;
  j["final_walk"] = moments_to_json(s.final_walk);
  j["theta"] = moments_to_json(s.theta);
  j["readout_mean"] = moments_to_json(s.readout_mean);
  j["reduction_diagnostic"] = std::string(to_string(s.reduction_diagnostic));
  j["first_reduction"] = {{"events", s.first_reduction.events},
                          {"exposure_steps", s.first_reduction.exposure_steps},
                          {"mean_time", s.first_reduction.mean_time},
                          {"se", s.first_reduction.se}};
  j["total_switches"] = s.total_switches;
  j["mean_residence_time"] = s.mean_residence_time;
  if (s.walk_histogram) j["walk_histogram"] = histogram_to_json(*s.walk_histogram);
  if (s.theta_histogram) j["theta_histogram"] = histogram_to_json(*s.theta_histogram);
  return j;
}

json checks_to_json(const std::vector<CheckResult>& checks) {
  json out = json::array();
  for (const CheckResult& c : checks) out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return out;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string() + ": write failed");
}

std::optional<std::function<double(double)>> walk_theory_cdf(const ExperimentConfig& c) {
  if (c.system.eigenvalues.size() != 2 || c.meter.kind != MeterKind::gaussian) return std::nullopt;
  const Experiment exp = build_experiment(c);
  if (!exp.system.commutes_with_observable()) return std::nullopt;
  const WalkPdfParams p{exp.plan.coupling(),          exp.plan.total_time(),
                        exp.observable.value(0),      exp.observable.value(1),
                        std::norm(exp.initial_state[0]), std::norm(exp.initial_state[1])};
  p.validate();
  return [p](double x) { return walk_cdf(x, p); };
}

std::optional<std::function<double(double)>> theta_theory_cdf(const ExperimentConfig& c) {
  if (c.meter.kind != MeterKind::gaussian) return std::nullopt;
  const Experiment exp = build_experiment(c);
  if (!exp.system.commutes_with_observable() || std::norm(exp.initial_state[0]) < 1.0 - 1e-12) return std::nullopt;
  const std::int64_t K = exp.plan.steps();
  const double dat = exp.plan.delta_a_T();
  return [K, dat](double x) { return theta_cdf(x, K, dat); };
}

std::optional<std::function<double(std::int64_t)>> survival_theory(const ExperimentConfig& c) {
  if (c.system.eigenvalues.size() != 2 || c.meter.kind != MeterKind::hard_wall) return std::nullopt;
  const Experiment exp = build_experiment(c);
  const double kp = exp.plan.coupling();
  const double tau = exp.plan.tau();
  const double da = exp.observable.value(1) - exp.observable.value(0);
  return [kp, tau, da](std::int64_t k) {
    return k == 0 ? 1.0 : survival_prob_discrete(kp, tau * static_cast<double>(k), da, k);
  };
}

std::vector<std::string> write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& c,
                                         const EnsembleSummary& s, const OutputMetadata& meta,
                                         const std::vector<CheckResult>& checks, const json& extra) {
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    files.push_back(name);
  };
  if (has_format(c, "csv")) {
    for (std::size_t i = 0; i < s.traces.size(); ++i) {
      put("trace_" + std::to_string(i) + ".csv",
          render([&](std::ostream& o) { write_trace_csv(o, s.traces[i].samples, s.dim, meta); }));
    }
    put("runs.csv", render([&](std::ostream& o) { write_runs_csv(o, s, meta); }));
    if (s.walk_histogram) {
      const auto cdf = walk_theory_cdf(c);
      put("walk_histogram.csv", render([&](std::ostream& o) {
            write_histogram_csv(o, *s.walk_histogram, cdf ? &*cdf : nullptr, meta);
          }));
    }
    if (s.theta_histogram) {
      const auto cdf = theta_theory_cdf(c);
      put("theta_histogram.csv", render([&](std::ostream& o) {
            write_histogram_csv(o, *s.theta_histogram, cdf ? &*cdf : nullptr, meta);
          }));
    }
    if (!s.survival_curve.empty()) {
      const auto th = survival_theory(c);
      put("survival.csv",
          render([&](std::ostream& o) { write_survival_csv(o, s.survival_curve, th ? &*th : nullptr, meta); }));
    }
    if (!s.conditional_means.empty()) {
      put("conditional_means.csv",
          render([&](std::ostream& o) { write_conditional_means_csv(o, s.conditional_means, meta); }));
    }
  }
  if (has_format(c, "json")) {
    json j;
    j["metadata"] = metadata_to_json(meta);
    j["config"] = config_to_json(c);
    j["derived"] = derived_to_json(derive(c));
    j["statistics"] = summary_to_json(s);
    j["checks"] = checks_to_json(checks);
    if (!extra.is_null()) j["extra"] = extra;
    j["files"] = files;
    put("summary.json", dump_json(j));
  }
  return files;
}

}  // namespace fuzzymon
