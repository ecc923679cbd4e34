#include "fuzzymon/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fuzzymon/config.hpp"
#include "fuzzymon/emit.hpp"
#include "fuzzymon/errors.hpp"
#include "fuzzymon/theory.hpp"

namespace fuzzymon {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double x) { return format_number(x); }

ExperimentConfig make_config(MeterKind kind, std::vector<double> levels, double coupling, double T, std::int64_t K,
                             std::vector<Complex> psi0, double omega, std::int64_t M, std::uint64_t seed) {
  ExperimentConfig c;
  c.system.eigenvalues = std::move(levels);
  c.system.omega = omega;
  c.meter.kind = kind;
  c.meter.coupling = coupling;
  c.plan = {T, K};
  c.initial_state.amplitudes = std::move(psi0);
  c.run.M = M;
  c.run.master_seed = seed;
  c.analysis.keep_traces = 0;
  validate(c);
  return c;
}

std::vector<Complex> equal_superposition() {
  const double h = 1.0 / std::sqrt(2.0);
  return {h, h};
}

EnsembleSummary run_config(const ExperimentConfig& c, unsigned workers) {
  return run_batch(build_experiment(c), build_analysis(c), c.run.M, c.run.master_seed, workers);
}

void note(const AcceptanceOptions& opt, const std::string& text) {
  if (opt.log) *opt.log << "  .. " << text << std::endl;
}

// 1. Decoherence of the off-diagonal element.
std::vector<CheckResult> decoherence(const AcceptanceOptions& opt) {
  std::vector<CheckResult> out;
  const auto t0 = Clock::now();
  for (double g : {0.5, 1.0, 2.0, 4.0}) {
    // kappa T da^2 = g with da = 2, T = 1.
    const ExperimentConfig c =
        make_config(MeterKind::gaussian, {-1.0, 1.0}, g / 4.0, 1.0, 2000, equal_superposition(), 0.0, 10000, opt.seed);
    const EnsembleSummary s = run_config(c, opt.workers);
    const double expected = 0.5 * coherence_decay(g / 4.0, 1.0, 2.0);
    out.push_back(check_within("rho12_g" + num(g), std::abs(s.rho_hat(0, 1)), expected, s.rho_abs_se(0, 1)));
    note(opt, out.back().name + " " + out.back().detail);
  }
  out.push_back(check_runtime("runtime", seconds_since(t0), 60.0));
  return out;
}

// 2. Hard-wall survival and mean first-reduction time.
std::vector<CheckResult> survival(const AcceptanceOptions& opt) {
  std::vector<CheckResult> out;
  const auto t0 = Clock::now();
  for (double x : {0.5, 1.0, 2.0, 5.0}) {
    // kappa' T da = x with da = 2, T = 1.
    const ExperimentConfig c = make_config(MeterKind::hard_wall, {-1.0, 1.0}, x / 2.0, 1.0, 10000,
                                           equal_superposition(), 0.0, 10000, opt.seed);
    const EnsembleSummary s = run_config(c, opt.workers);
    std::int64_t alive = 0;
    for (std::int64_t r : s.first_reduction_step) alive += r < 0 ? 1 : 0;
    const double p = survival_prob(x / 2.0, 1.0, 2.0);
    const auto m = static_cast<double>(s.M);
    out.push_back(check_within("p_surv_x" + num(x), static_cast<double>(alive) / m, p, std::sqrt(p * (1.0 - p) / m)));
    note(opt, out.back().name + " " + out.back().detail);
    const double t_lr_prime = level_resolution_times(x / 2.0, 2.0, 1.0).t_lr_prime;
    out.push_back(check_within("first_reduction_x" + num(x), s.first_reduction.mean_time, t_lr_prime,
                               s.first_reduction.se));
    note(opt, out.back().name + " " + out.back().detail);
  }
  out.push_back(check_runtime("runtime", seconds_since(t0), 60.0));
  return out;
}

// 3. Readout statistics of an eigenstate.
std::vector<CheckResult> theta_statistics(const AcceptanceOptions& opt) {
  const double dat = 0.03;
  const std::int64_t K = 10000;
  const ExperimentConfig c = make_config(MeterKind::gaussian, {-1.0, 1.0}, 1.0 / (dat * dat), 1.0, K, {1.0, 0.0}, 0.0,
                                         2000, opt.seed);
  const EnsembleSummary s = run_config(c, opt.workers);
  const double df = derive(c).delta_f;
  std::vector<CheckResult> out;
  if (s.theta_histogram) {
    out.push_back(check_histogram_fit("theta_fit", *s.theta_histogram,
                                      [&](double x) { return theta_pdf(x, K, dat); }));
    out.push_back(check_relative("theta_mode", histogram_mode(*s.theta_histogram), 0.5 * df * df, 0.05));
  } else {
    out.push_back({"theta_fit", false, "no theta histogram"});
  }
  // Mean Theta / delta_a_T^2 = (df^2 / 2) / (2 df^2 / K) = K / 4: far outside the narrow band.
  out.push_back(check_relative("narrow_band_violation", mean_std(s.theta).mean / (dat * dat), K / 4.0, 0.05));
  // The time-averaged readout stays within delta_a_T of a1: E (fbar - a1)^2 / delta_a_T^2 = 1/4.
  std::vector<double> dev2;
  for (double f : s.readout_mean) dev2.push_back((f + 1.0) * (f + 1.0) / (dat * dat));
  const MeanStd m = mean_std(dev2);
  out.push_back({"averaged_band", m.mean <= 1.0, "mean (fbar-a1)^2/da_T^2 = " + num(m.mean) + " (expected 0.25)"});
  for (const CheckResult& r : out) note(opt, r.name + " " + r.detail);
  return out;
}

// 4. Bimodal final walk.
std::vector<CheckResult> walk_bimodality(const AcceptanceOptions& opt) {
  std::vector<CheckResult> out;
  const auto t0 = Clock::now();
  for (int gamma : {2, 8, 32}) {
    // df = 250 da with da = 2: K = gamma * 62500 at kappa = gamma / 8, T = 1.
    const ExperimentConfig c = make_config(MeterKind::gaussian, {-1.0, 1.0}, gamma / 8.0, 1.0,
                                           static_cast<std::int64_t>(gamma) * 62500, equal_superposition(), 0.0,
                                           20000, opt.seed);
    const auto t1 = Clock::now();
    const EnsembleSummary s = run_config(c, opt.workers);
    note(opt, "gamma=" + std::to_string(gamma) + " ran in " + num(std::round(seconds_since(t1))) + " s");
    CheckResult fit = check_walk_fit(s, c);
    fit.name += "_gamma" + std::to_string(gamma);
    out.push_back(fit);
    for (CheckResult r : check_leaning(s, {0.5, 0.5})) {
      r.name += "_gamma" + std::to_string(gamma);
      out.push_back(r);
    }
    for (std::size_t i = out.size() - 3; i < out.size(); ++i) note(opt, out[i].name + " " + out[i].detail);
  }
  out.push_back(check_runtime("runtime", seconds_since(t0), 300.0));
  return out;
}

// 5. Path sum, product form, non-Hermitian evolution and the master recursion.
double rel_diff(const CVector& a, const CVector& b) { return (a - b).norm() / b.norm(); }

std::vector<CheckResult> oracle_triangle(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  double worst_path = 0.0;
  double worst_split = 0.0;
  double worst_order_dev = 0.0;
  int rho_fail = 0;
  double worst_rho_z = 0.0;
  const int instances = 20;
  for (int i = 0; i < instances; ++i) {
    RngStream gen(opt.seed, 1'000'000 + static_cast<std::uint64_t>(i));
    const double a1 = 2.0 * gen.uniform() - 1.0;
    const double a2 = a1 + 0.5 + 1.5 * gen.uniform();
    const double e1 = 2.0 * gen.uniform() - 1.0;
    const double e2 = 2.0 * gen.uniform() - 1.0;
    const double omega = 0.2 + 1.8 * gen.uniform();
    const double T = 0.5 + 1.5 * gen.uniform();
    const double df = (a2 - a1) * (1.0 + 2.0 * gen.uniform());
    CVector raw(2);
    raw << Complex(gen.normal(), gen.normal()), Complex(gen.normal(), gen.normal());
    const StateVector psi0 = StateVector::normalized(raw);

    const Observable obs({a1, a2});
    const Hamiltonian h = Hamiltonian::two_level(e1, e2, omega);
    const std::int64_t K = 12;
    const MeterModel m = MeterModel::gaussian(df);
    const MonitoringPlan plan(T, K, m);
    const UnitaryMatrix u = propagator(h, plan.tau());
    RngStream rng(opt.seed, 2'000'000 + static_cast<std::uint64_t>(i));
    const TrajectoryRecord rec = run(h, obs, psi0, m, plan, rng, K);
    const std::vector<double>& f = rec.samples.readout;

    const CVector product = product_form_amplitude(f, u, m, obs, psi0);
    worst_path = std::max(worst_path, rel_diff(path_sum_amplitude(f, u, m, obs, psi0), product));
    worst_split = std::max(worst_split, rel_diff(nonhermitian_evolve(f, h, m, obs, plan, psi0).normalized(),
                                                 product.normalized()));

    // Refine tau with f held piecewise constant and the coupling fixed.
    // Start at 4x refinement: at K=12 kappa*tau*da^2 is O(1), pre-asymptotic.
    std::vector<double> err;
    for (int r = 2; r <= 6; ++r) {
      const std::int64_t Kr = K << r;
      const MeterModel mr =
          MeterModel::gaussian(MonitoringPlan::delta_f_for_coupling(MeterKind::gaussian, plan.coupling(), T / Kr));
      const MonitoringPlan pr(T, Kr, mr);
      std::vector<double> fr(static_cast<std::size_t>(Kr));
      for (std::int64_t k = 0; k < Kr; ++k) fr[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k >> r)];
      const CVector split = nonhermitian_evolve(fr, h, mr, obs, pr, psi0, NonHermitianScheme::split).normalized();
      const CVector exact = nonhermitian_evolve(fr, h, mr, obs, pr, psi0, NonHermitianScheme::exact).normalized();
      err.push_back(rel_diff(split, exact));
    }
    for (std::size_t r = 1; r < err.size(); ++r) {
      worst_order_dev = std::max(worst_order_dev, std::fabs(std::log2(err[r - 1] / err[r]) - 1.0));
    }

    ExperimentConfig c;
    c.system = {{a1, a2}, {e1, e2}, omega};
    c.meter.kind = MeterKind::gaussian;
    c.meter.delta_f = df;
    c.plan = {T, 50};
    c.initial_state.amplitudes = {psi0[0], psi0[1]};
    c.run.M = 100000;
    c.run.master_seed = opt.seed + static_cast<std::uint64_t>(i);
    c.analysis.keep_traces = 0;
    validate(c);
    const EnsembleSummary s = run_config(c, opt.workers);
    const Experiment exp = build_experiment(c);
    const DensityMatrix ref =
        master_recursion(DensityMatrix::pure(psi0), propagator(h, exp.plan.tau()), exp.meter, obs, 50);
    const double z[3] = {
        std::fabs(s.rho_hat(0, 0).real() - ref(0, 0).real()) / s.rho_se_re(0, 0),
        std::fabs(s.rho_hat(0, 1).real() - ref(0, 1).real()) / s.rho_se_re(0, 1),
        std::fabs(s.rho_hat(0, 1).imag() - ref(0, 1).imag()) / s.rho_se_im(0, 1),
    };
    for (double zz : z) {
      worst_rho_z = std::max(worst_rho_z, zz);
      if (!(zz <= kSigmaBand)) ++rho_fail;
    }
  }
  std::vector<CheckResult> out{
      {"path_sum_vs_product", worst_path <= 1e-10, "max rel diff " + num(worst_path) + " over 20 instances"},
      {"split_equals_product", worst_split <= 1e-10, "max rel diff " + num(worst_split)},
      {"split_first_order", worst_order_dev <= 0.2,
       "max |log2(err ratio) - 1| = " + num(worst_order_dev) + " over 4 halvings from K=48"},
      {"rho_vs_master_recursion", rho_fail == 0,
       "elements outside 3 se: " + std::to_string(rho_fail) + " of 60, max z " + num(worst_rho_z)},
  };
  out.push_back(check_runtime("runtime", seconds_since(t0), 120.0));
  for (const CheckResult& r : out) note(opt, r.name + " " + r.detail);
  return out;
}

// 6. Zeno suppression in the weak-drive limit.
std::vector<CheckResult> zeno(const AcceptanceOptions& opt) {
  std::vector<CheckResult> out;
  const auto t0 = Clock::now();
  const double omega = 0.1;
  const double T = 1.0;
  const double a = 1.0;
  double last_ratio = 0.0;
  for (double g : {20.0, 80.0, 320.0}) {
    const ExperimentConfig c =
        make_config(MeterKind::gaussian, {0.0, a}, g, T, 10000, {1.0, 0.0}, omega, 100000, opt.seed);
    const EnsembleSummary s = run_config(c, opt.workers);
    const double wt2 = (omega * T) * (omega * T);
    const double ratio = s.rho_hat(1, 1).real() / wt2;
    out.push_back(check_within("ratio_g" + num(g), ratio, zeno_beta2(omega, g, a, T).ratio, s.rho_se_re(1, 1) / wt2));
    note(opt, out.back().name + " " + out.back().detail);
    last_ratio = ratio;
  }
  out.push_back(check_relative("asymptote_8_over_g320", last_ratio, 8.0 / 320.0, 0.2));
  note(opt, out.back().name + " " + out.back().detail);
  out.push_back(check_runtime("runtime", seconds_since(t0), 600.0));
  return out;
}

// 7. Telegraph residence times near the Zeno regime.
std::vector<CheckResult> telegraph(const AcceptanceOptions& opt) {
  const double omega = 1.0;
  const double t_r = 2.0 * std::numbers::pi / omega;
  const double t_lr_prime = 0.008 * t_r;
  const double da = 2.0;
  const double kp = 1.0 / (t_lr_prime * da);
  const double t_stay = level_resolution_times(kp, da, t_r).t_stay;
  const double T = 1000.0;
  // tau = 1e-3: one hard-wall reduction per 50 steps on average.
  const ExperimentConfig c =
      make_config(MeterKind::hard_wall, {-1.0, 1.0}, kp, T, 1'000'000, {1.0, 0.0}, omega, 100, opt.seed);
  const EnsembleSummary s = run_config(c, opt.workers);
  std::vector<CheckResult> out{
      {"duration", T >= 50.0 * t_stay, "T / T_stay = " + num(T / t_stay)},
      check_factor("mean_residence", s.mean_residence_time, t_stay, 2.0),
  };
  out.back().detail += " switches=" + std::to_string(s.total_switches);
  for (const CheckResult& r : out) note(opt, r.name + " " + r.detail);
  return out;
}

// 8. Post-selected mean readouts.
std::vector<CheckResult> post_selected(const AcceptanceOptions& opt) {
  std::vector<CheckResult> out;
  const auto t0 = Clock::now();
  const std::vector<PostSelectionSpec> ps{{{1.0, 0.0}, PostSelectionMode::born_weight, "post_a1"},
                                          {{0.0, 1.0}, PostSelectionMode::born_weight, "post_a2"}};
  struct Case {
    std::string name;
    MeterKind kind;
    double coupling;
    double T;
    std::int64_t K;
  };
  const std::vector<Case> cases{
      {"a", MeterKind::hard_wall, 2.5, 100.0 / (2.5 * 40.0), 100},
      {"b", MeterKind::gaussian, 5.0, 2000.0 / (2.0 * 5.0 * 400.0), 2000},
  };
  for (const Case& k : cases) {
    ExperimentConfig c =
        make_config(k.kind, {-1.0, 1.0}, k.coupling, k.T, k.K, equal_superposition(), 0.0, 500000, opt.seed);
    c.analysis.grid_points = 20;
    c.analysis.post_selection = ps;
    validate(c);
    const EnsembleSummary s = run_config(c, opt.workers);
    for (auto [label, level] : {std::pair{"post_a1", -1.0}, std::pair{"post_a2", 1.0}, std::pair{"unconditional", 0.0}}) {
      CheckResult r = check_flat_curve(s, label, level);
      r.name = k.name + "." + r.name;
      out.push_back(r);
      note(opt, r.name + " " + r.detail);
    }
  }
  out.push_back(check_runtime("runtime", seconds_since(t0), 900.0));
  return out;
}

// 9. Byte-identical artifacts across repeats and worker counts.
std::map<std::string, std::string> read_tree(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    files[e.path().filename().string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

std::vector<CheckResult> determinism(const AcceptanceOptions& opt) {
  ExperimentConfig g = make_config(MeterKind::gaussian, {-1.0, 1.0}, 0.25, 1.0, 2000, equal_superposition(), 0.0,
                                   3000, opt.seed);
  g.name = "determinism_gaussian";
  g.analysis.keep_traces = 3;
  g.analysis.grid_points = 10;
  g.analysis.post_selection = {{{1.0, 0.0}, PostSelectionMode::born_weight, "post_a1"}};
  ExperimentConfig h = make_config(MeterKind::hard_wall, {-1.0, 1.0}, 1.0, 1.0, 1000, equal_superposition(), 0.5,
                                   3000, opt.seed);
  h.name = "determinism_hard_wall";
  h.analysis.keep_traces = 2;
  h.analysis.survival_points = 50;
  const std::filesystem::path root =
      std::filesystem::temp_directory_path() / ("fuzzymon_determinism_" + std::to_string(opt.seed));
  std::filesystem::remove_all(root);
  std::vector<CheckResult> out;
  for (const ExperimentConfig& c : {g, h}) {
    std::map<std::string, std::map<std::string, std::string>> trees;
    const std::vector<std::pair<std::string, unsigned>> runs{{"w1", 1}, {"w1_repeat", 1}, {"w4", 4}, {"w16", 16}};
    for (const auto& [tag, w] : runs) {
      const EnsembleSummary s = run_config(c, w);
      const OutputMetadata meta{c.run.master_seed, c.plan.K, c.run.M, 1.0, "unscaled"};
      const std::filesystem::path dir = root / c.name / tag;
      write_artifacts(dir, c, s, meta, {});
      trees[tag] = read_tree(dir);
    }
    for (const auto& [tag, w] : runs) {
      if (tag == "w1") continue;
      const bool same = trees[tag] == trees["w1"];
      out.push_back({c.name + "." + tag, same,
                     std::to_string(trees[tag].size()) + " files " + (same ? "identical" : "differ") + " vs w1"});
      note(opt, out.back().name + " " + out.back().detail);
    }
  }
  std::filesystem::remove_all(root);
  return out;
}

// 10. Single long trajectory timing.
std::vector<CheckResult> performance(const AcceptanceOptions& opt) {
  const std::int64_t K = 10'000'000;
  const Observable obs({-1.0, 1.0});
  const MeterModel m = MeterModel::gaussian(MonitoringPlan::delta_f_for_coupling(MeterKind::gaussian, 1.0, 1.0 / K));
  const MonitoringPlan plan(1.0, K, m);
  const Hamiltonian h = Hamiltonian::two_level(0.0, 0.0, 3.0);
  const StateVector psi0 = StateVector::basis(2, 0);
  RngStream rng(opt.seed, 0);
  const auto t0 = Clock::now();
  const TrajectoryRecord rec = run(h, obs, psi0, m, plan, rng);
  const double sec = seconds_since(t0);
  CheckResult r = check_runtime("k1e7_trajectory", sec, 10.0);
  r.detail += " ns_per_step=" + num(std::round(sec * 1e9 / static_cast<double>(K))) +
              " samples=" + std::to_string(rec.samples.size());
  note(opt, r.detail);
  return {r};
}

}  // namespace

std::string criterion_title(int id) {
  static const char* titles[kCriterionCount] = {
      "decoherence law",         "hard-wall survival",    "readout chi-squared statistics",
      "walk bimodality",         "oracle triangle",       "Zeno suppression",
      "telegraph regime",        "post-selected averages", "determinism and parallel invariance",
      "performance guardrail",
  };
  if (id < 1 || id > kCriterionCount) throw ValidationError("criterion id must be in 1.." + std::to_string(kCriterionCount));
  return titles[id - 1];
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  CriterionResult r;
  r.id = id;
  r.title = criterion_title(id);
  const auto t0 = Clock::now();
  switch (id) {
    case 1: r.checks = decoherence(opt); break;
    case 2: r.checks = survival(opt); break;
    case 3: r.checks = theta_statistics(opt); break;
    case 4: r.checks = walk_bimodality(opt); break;
    case 5: r.checks = oracle_triangle(opt); break;
    case 6: r.checks = zeno(opt); break;
    case 7: r.checks = telegraph(opt); break;
    case 8: r.checks = post_selected(opt); break;
    case 9: r.checks = determinism(opt); break;
    case 10: r.checks = performance(opt); break;
  }
  r.seconds = seconds_since(t0);
  return r;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream out;
  out << (r.passed() ? "PASS" : "FAIL") << ' ' << r.id << ' ' << r.title << " ("
      << format_number(std::round(r.seconds * 10.0) / 10.0) << " s)\n";
  for (const CheckResult& c : r.checks) {
    out << "    " << (c.passed ? "ok  " : "bad ") << c.name << ": " << c.detail << '\n';
  }
  return out.str();
}

}  // namespace fuzzymon
