#include "fuzzymon/presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "fuzzymon/errors.hpp"

namespace fuzzymon {

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<double> kLevels{-1.0, 1.0};
const double kDeltaA = 2.0;

std::vector<Complex> equal_superposition() {
  const double h = 1.0 / std::sqrt(2.0);
  return {h, h};
}

std::vector<Complex> ground() { return {1.0, 0.0}; }

ExperimentConfig base(const std::string& name, MeterKind kind, double coupling, double T, std::int64_t K,
                      std::vector<Complex> psi0, double omega, std::int64_t M) {
  ExperimentConfig c;
  c.name = name;
  c.system.eigenvalues = kLevels;
  c.system.omega = omega;
  c.meter.kind = kind;
  c.meter.coupling = coupling;
  c.plan = {T, K};
  c.initial_state.amplitudes = std::move(psi0);
  c.run.M = M;
  c.run.master_seed = kPresetSeed;
  return c;
}

std::vector<PostSelectionSpec> level_selection() {
  return {{{1.0, 0.0}, PostSelectionMode::born_weight, "post_a1"},
          {{0.0, 1.0}, PostSelectionMode::born_weight, "post_a2"}};
}

std::string count_text(std::int64_t v) { return std::to_string(v); }

// Checks on single traces.

CheckResult occupations_normalised(const EnsembleSummary& s) {
  double worst = 0.0;
  for (const TrajectoryRecord& r : s.traces) {
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < r.samples.dim; ++j) sum += r.samples.occupation_at(i, j);
      worst = std::max(worst, std::fabs(sum - 1.0));
    }
  }
  return {"occupations_normalised", worst <= 1e-9, "max |sum occ - 1| = " + format_number(worst)};
}

std::vector<CheckResult> readout_moments(const EnsembleSummary& s, const ExperimentConfig& c) {
  if (s.traces.empty()) return {{"readout_moments", false, "no trace kept"}};
  const SampleSeries& t = s.traces.front().samples;
  const MeanStd m = mean_std(t.readout);
  const double df = derive(c).delta_f;
  const double sd = df / std::sqrt(2.0);
  const auto n = static_cast<double>(m.n);
  return {check_within("readout_stddev", m.stddev, sd, sd / std::sqrt(2.0 * (n - 1.0))),
          check_within("readout_mean", m.mean, c.system.eigenvalues[0], sd / std::sqrt(n))};
}

CheckResult single_step(const EnsembleSummary& s) {
  if (s.traces.empty()) return {"single_step", false, "no trace kept"};
  const SampleSeries& t = s.traces.front().samples;
  int changes = 0;
  double prev = t.occupation_at(0, 0);
  const double first = prev;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double cur = t.occupation_at(i, 0);
    if (std::fabs(cur - prev) > 1e-12) ++changes;
    prev = cur;
  }
  const bool starts_half = std::fabs(first - 0.5) <= 1e-12;
  const bool ends_ok = std::fabs(prev - 0.5) <= 1e-12 || prev <= 1e-12 || prev >= 1.0 - 1e-12;
  return {"single_step", changes <= 1 && ends_ok && (starts_half || changes == 0),
          "first=" + format_number(first) + " last=" + format_number(prev) + " changes=" + std::to_string(changes)};
}

CheckResult walk_occupation_identity(const EnsembleSummary& s) {
  if (s.traces.empty()) return {"walk_occupation_identity", false, "no trace kept"};
  const SampleSeries& t = s.traces.front().samples;
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    // |alpha_k|^2 = xi0 e^-X / (1 + xi0 e^-X) with xi0 = 1.
    const double pred = 1.0 / (1.0 + std::exp(t.walk[i]));
    worst = std::max(worst, std::fabs(pred - t.occupation_at(i, 0)));
  }
  return {"walk_occupation_identity", worst <= 1e-6, "max deviation " + format_number(worst)};
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"}; }

Preset make_preset(const std::string& name) {
  Preset p;
  p.name = name;
  const std::int64_t K9 = 1'000'000'000;
  if (name == "fig1") {
    p.summary = "Gaussian readout for |a1>, H = 0, delta_a_T = 0.03";
    ExperimentConfig c = base("fig1", MeterKind::gaussian, 1.0 / (0.03 * 0.03), 1.0, K9, ground(), 0.0, 1);
    p.cases.push_back({"fig1", c});
  } else if (name == "fig2") {
    p.summary = "Hard-wall sudden reduction, equal superposition, df/da = 4e8";
    // kappa' = K / (T df)
    ExperimentConfig c = base("fig2", MeterKind::hard_wall, 1e9 / (4e8 * kDeltaA), 1.0, K9, equal_superposition(), 0.0, 1);
    p.cases.push_back({"fig2", c});
  } else if (name == "fig3") {
    p.summary = "Final walk X(T) histograms, df/da = 250, gamma in {2, 8, 32}";
    for (int gamma : {2, 8, 32}) {
      // gamma = 2 kappa T da^2; df = 250 da at K = gamma * 62500.
      const std::int64_t K = static_cast<std::int64_t>(gamma) * 62500;
      ExperimentConfig c = base("fig3_gamma" + std::to_string(gamma), MeterKind::gaussian,
                                gamma / (2.0 * kDeltaA * kDeltaA), 1.0, K, equal_superposition(), 0.0, 20000);
      c.analysis.keep_traces = 1;
      p.cases.push_back({"gamma" + std::to_string(gamma), c});
    }
  } else if (name == "fig4") {
    p.summary = "Single Gaussian walk trajectory, equal superposition, df/da = 1e4";
    const double df = 1e4 * kDeltaA;
    ExperimentConfig c = base("fig4", MeterKind::gaussian, 1e9 / (2.0 * df * df), 1.0, K9, equal_superposition(), 0.0, 1);
    p.cases.push_back({"fig4", c});
  } else if (name == "fig5") {
    p.summary = "Driven hard-wall monitoring, omega T = 25, T'_LR/T_R in {0.5, 0.08, 0.008}";
    const double omega = 25.0;
    const double t_r = 2.0 * kPi / omega;
    for (auto [label, ratio] : {std::pair{"a", 0.5}, std::pair{"b", 0.08}, std::pair{"c", 0.008}}) {
      ExperimentConfig c = base(std::string("fig5") + label, MeterKind::hard_wall, 1.0 / (ratio * t_r * kDeltaA), 1.0,
                                K9, ground(), omega, 1);
      p.cases.push_back({label, c});
    }
  } else if (name == "fig6") {
    p.summary = "Driven Gaussian monitoring, omega T = 10 pi, T_LR/T_R in {0.4, 0.03}";
    const double omega = 10.0 * kPi;
    const double t_r = 2.0 * kPi / omega;
    for (auto [label, ratio] : {std::pair{"a", 0.4}, std::pair{"b", 0.03}}) {
      ExperimentConfig c = base(std::string("fig6") + label, MeterKind::gaussian,
                                1.0 / (ratio * t_r * kDeltaA * kDeltaA), 1.0, K9, ground(), omega, 1);
      p.cases.push_back({label, c});
    }
  } else if (name == "fig7") {
    p.summary = "Near-Zeno Gaussian monitoring, T_LR/T_R = 0.002, omega T = 10 pi";
    const double omega = 10.0 * kPi;
    const double t_r = 2.0 * kPi / omega;
    ExperimentConfig c = base("fig7", MeterKind::gaussian, 1.0 / (0.002 * t_r * kDeltaA * kDeltaA), 1.0, K9, ground(),
                              omega, 1);
    p.cases.push_back({"fig7", c});
  } else if (name == "fig8") {
    p.summary = "Post-selected mean readouts, hard wall (a) and Gaussian (b)";
    {
      // kappa' = 2.5, K = 100, df = 20 da: tau = 1 / (kappa' df), T = K tau.
      const double kp = 2.5;
      const double T = 100.0 / (kp * 20.0 * kDeltaA);
      ExperimentConfig c = base("fig8a", MeterKind::hard_wall, kp, T, 100, equal_superposition(), 0.0, 500000);
      c.analysis.grid_points = 20;
      c.analysis.post_selection = level_selection();
      p.cases.push_back({"a", c});
    }
    {
      // kappa = 5, K = 2000, df = 10 da: tau = 1 / (2 kappa df^2).
      const double kappa = 5.0;
      const double df = 10.0 * kDeltaA;
      const double T = 2000.0 / (2.0 * kappa * df * df);
      ExperimentConfig c = base("fig8b", MeterKind::gaussian, kappa, T, 2000, equal_superposition(), 0.0, 500000);
      c.analysis.grid_points = 20;
      c.analysis.post_selection = level_selection();
      p.cases.push_back({"b", c});
    }
  } else {
    throw ValidationError("unknown preset '" + name + "' (fig1..fig8)");
  }
  for (PresetCase& pc : p.cases) validate(pc.config);
  return p;
}

ScaledCase scale_case(const ExperimentConfig& full, std::optional<double> scale) {
  ScaledCase out{full, {}};
  ExperimentConfig& c = out.config;
  std::string note = "full-scale K=" + count_text(full.plan.K) + " M=" + count_text(full.run.M) + "; ";
  if (scale) {
    if (!(*scale > 0.0 && *scale <= 1.0)) throw ValidationError("scale: must be in (0, 1]");
    if (full.run.M == 1) {
      c.plan.K = std::max<std::int64_t>(1, std::llround(static_cast<double>(full.plan.K) * *scale));
      note += "K multiplied by scale";
    } else {
      c.run.M = std::max<std::int64_t>(1, std::llround(static_cast<double>(full.run.M) * *scale));
      note += "M multiplied by scale";
    }
    out.meta.scale = *scale;
  } else {
    c.plan.K = std::min(full.plan.K, kDeskMaxSteps);
    c.run.M = std::min(full.run.M, kDeskMaxRuns);
    out.meta.scale = static_cast<double>(c.plan.K) / static_cast<double>(full.plan.K);
    note += "desk default caps K<=" + count_text(kDeskMaxSteps) + " M<=" + count_text(kDeskMaxRuns) +
            ", scale field is K/K_full";
  }
  note += "; coupling and T fixed, delta_f rederived";
  c.analysis.grid_points = std::min(c.analysis.grid_points, c.plan.K);
  if (c.analysis.grid_points == 1) c.analysis.grid_points = 0;
  validate(c);
  out.meta.master_seed = c.run.master_seed;
  out.meta.K = c.plan.K;
  out.meta.M = c.run.M;
  out.meta.scale_note = note;
  return out;
}

std::vector<CheckResult> preset_checks(const std::string& preset, const ExperimentConfig& c, const EnsembleSummary& s) {
  std::vector<CheckResult> out{occupations_normalised(s)};
  auto add = [&](std::vector<CheckResult> v) { out.insert(out.end(), v.begin(), v.end()); };
  if (preset == "fig1") {
    add(readout_moments(s, c));
  } else if (preset == "fig2") {
    out.push_back(single_step(s));
  } else if (preset == "fig3") {
    if (s.M >= 2) out.push_back(check_walk_fit(s, c));
    add(check_leaning(s, {0.5, 0.5}));
  } else if (preset == "fig4") {
    out.push_back(walk_occupation_identity(s));
  } else if (preset == "fig8") {
    const double a1 = c.system.eigenvalues[0];
    const double a2 = c.system.eigenvalues[1];
    out.push_back(check_flat_curve(s, "post_a1", a1));
    out.push_back(check_flat_curve(s, "post_a2", a2));
    out.push_back(check_flat_curve(s, "unconditional", 0.5 * (a1 + a2)));
  }
  return out;
}

PresetReport run_preset(const std::string& name, const PresetRunOptions& opt, std::ostream* log) {
  const Preset p = make_preset(name);
  PresetReport report;
  for (const PresetCase& pc : p.cases) {
    ScaledCase sc = scale_case(pc.config, opt.scale);
    if (opt.seed) sc.config.run.master_seed = sc.meta.master_seed = *opt.seed;
    sc.config.run.workers = opt.workers;
    const std::filesystem::path dir = p.cases.size() == 1 ? opt.out / name : opt.out / name / pc.name;
    sc.config.output.directory = dir.string();
    if (log) {
      *log << name << "/" << pc.name << ": K=" << sc.config.plan.K << " M=" << sc.config.run.M
           << " delta_f=" << format_number(derive(sc.config).delta_f) << '\n';
    }
    const Experiment exp = build_experiment(sc.config);
    const EnsembleSummary s =
        run_batch(exp, build_analysis(sc.config), sc.config.run.M, sc.config.run.master_seed, opt.workers);
    std::vector<CheckResult> checks = preset_checks(name, sc.config, s);
    nlohmann::json extra = {{"preset", name}, {"case", pc.name}, {"summary", p.summary},
                            {"full_config", config_to_json(pc.config)}};
    for (const std::string& f : write_artifacts(dir, sc.config, s, sc.meta, checks, extra)) report.files.push_back(dir / f);
    for (CheckResult& ch : checks) {
      ch.name = pc.name + "." + ch.name;
      report.checks.push_back(std::move(ch));
    }
  }
  return report;
}

}  // namespace fuzzymon
