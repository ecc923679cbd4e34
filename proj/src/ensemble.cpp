#include "fuzzymon/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "fuzzymon/errors.hpp"

namespace fuzzymon {

void Experiment::validate() const {
  const std::size_t n = observable.dim();
  if (system.dim() != n) throw ValidationError("Hamiltonian and observable dimensions differ");
  if (initial_state.dim() != n) throw ValidationError("initial state and observable dimensions differ");
  if (plan.meter_kind() != meter.kind() || plan.delta_f() != meter.delta_f()) {
    throw ValidationError("monitoring plan was built for a different meter");
  }
  if (s_max < 2) throw ValidationError("s_max must be >= 2");
}

std::string_view to_string(PostSelectionMode mode) noexcept {
  return mode == PostSelectionMode::born_weight ? "born_weight" : "verdict_indicator";
}

namespace {

std::optional<std::size_t> basis_index(const StateVector& s) {
  for (std::size_t j = 0; j < s.dim(); ++j) {
    if (std::norm(s[j]) > 1.0 - 1e-12) return j;
  }
  return std::nullopt;
}

}  // namespace

double PostSelection::weight(const StateVector& final_state, const std::optional<std::size_t>& verdict) const {
  if (final_state.dim() != target.dim()) throw ValidationError("post-selection target dimension differs");
  if (mode == PostSelectionMode::born_weight) {
    return std::norm(target.amplitudes().dot(final_state.amplitudes()));
  }
  const auto idx = basis_index(target);
  if (!idx) throw ValidationError("verdict_indicator post-selection needs a basis-state target");
  return verdict && *verdict == *idx ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// Conditional means

ConditionalMeanAccumulator::ConditionalMeanAccumulator(std::size_t grid_size) : wf_(grid_size), wf2_(grid_size) {}

void ConditionalMeanAccumulator::add(std::span<const double> readouts, double weight) {
  if (readouts.size() != wf_.size()) throw ValidationError("readout count differs from grid size");
  if (weight == 0.0) return;
  for (std::size_t g = 0; g < readouts.size(); ++g) {
    wf_[g].add(weight * readouts[g]);
    wf2_[g].add(weight * readouts[g] * readouts[g]);
  }
  w_.add(weight);
  w2_.add(weight * weight);
}

void ConditionalMeanAccumulator::merge(const ConditionalMeanAccumulator& other) {
  if (other.wf_.size() != wf_.size()) throw ValidationError("merging accumulators of different grid size");
  for (std::size_t g = 0; g < wf_.size(); ++g) {
    wf_[g].merge(other.wf_[g]);
    wf2_[g].merge(other.wf2_[g]);
  }
  w_.merge(other.w_);
  w2_.merge(other.w2_);
}

std::vector<ConditionalMeanPoint> ConditionalMeanAccumulator::finish(std::span<const std::int64_t> steps, double tau,
                                                                     double delta_f) const {
  if (steps.size() != wf_.size()) throw ValidationError("grid size differs from accumulator");
  const double w = w_.value();
  if (!(w > 0.0)) throw EmptySelectionError("post-selection has zero total weight");
  const double m_eff = w * w / w2_.value();
  std::vector<ConditionalMeanPoint> out;
  out.reserve(steps.size());
  for (std::size_t g = 0; g < steps.size(); ++g) {
    const double mean = wf_[g].value() / w;
    const double var = std::max(wf2_[g].value() / w - mean * mean, 0.0);
    out.push_back({steps[g], static_cast<double>(steps[g]) * tau, mean, delta_f / std::sqrt(2.0 * m_eff),
                   std::sqrt(var / m_eff), w, m_eff});
  }
  return out;
}

std::vector<ConditionalMeanPoint> conditional_mean_readout(std::span<const TrajectoryRecord> records,
                                                           const std::optional<PostSelection>& ps,
                                                           std::span<const std::int64_t> grid, double tau,
                                                           double delta_f) {
  ConditionalMeanAccumulator acc(grid.size());
  std::vector<double> f(grid.size());
  for (const TrajectoryRecord& r : records) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto it = std::lower_bound(r.samples.step.begin(), r.samples.step.end(), grid[g]);
      if (it == r.samples.step.end() || *it != grid[g]) {
        throw ValidationError("record has no sample at grid step " + std::to_string(grid[g]));
      }
      f[g] = r.samples.readout[static_cast<std::size_t>(it - r.samples.step.begin())];
    }
    acc.add(f, ps ? ps->weight(r.final_state, r.collapse_verdict) : 1.0);
  }
  return acc.finish(grid, tau, delta_f);
}

// ---------------------------------------------------------------------------
// Survival

std::vector<SurvivalPoint> survival_curve(std::span<const std::int64_t> first_reduction, std::int64_t K, double tau,
                                          std::int64_t points) {
  if (first_reduction.empty()) throw ValidationError("survival curve of an empty batch");
  std::vector<std::int64_t> sorted;
  sorted.reserve(first_reduction.size());
  for (std::int64_t s : first_reduction) sorted.push_back(s < 0 ? std::numeric_limits<std::int64_t>::max() : s);
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  std::vector<std::int64_t> steps{0};
  if (points >= 2) {
    for (std::int64_t k : decimation_steps(K, points)) steps.push_back(k);
  } else {
    steps.push_back(K);
  }
  std::vector<SurvivalPoint> out;
  out.reserve(steps.size());
  for (std::int64_t k : steps) {
    // Survived through step k: no reduction at any step <= k.
    const auto alive = static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), k));
    const double p = alive / m;
    out.push_back({k, static_cast<double>(k) * tau, p, std::sqrt(p * (1.0 - p) / m)});
  }
  return out;
}

FirstReductionStats first_reduction_stats(std::span<const std::int64_t> first_reduction, std::int64_t K, double tau) {
  FirstReductionStats s;
  for (std::int64_t r : first_reduction) {
    if (r >= 0) {
      ++s.events;
      s.exposure_steps += r;
    } else {
      s.exposure_steps += K;
    }
  }
  if (s.events == 0) {
    s.mean_time = std::numeric_limits<double>::quiet_NaN();
    s.se = std::numeric_limits<double>::quiet_NaN();
  } else {
    s.mean_time = tau * static_cast<double>(s.exposure_steps) / static_cast<double>(s.events);
    s.se = s.mean_time / std::sqrt(static_cast<double>(s.events));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Batch

void ElementStats::add(Complex z) {
  re.add(z.real());
  im.add(z.imag());
  re2.add(z.real() * z.real());
  im2.add(z.imag() * z.imag());
  reim.add(z.real() * z.imag());
}

void ElementStats::merge(const ElementStats& o) {
  re.merge(o.re);
  im.merge(o.im);
  re2.merge(o.re2);
  im2.merge(o.im2);
  reim.merge(o.reim);
}

namespace {

struct ChunkResult {
  std::vector<ElementStats> rho;
  std::vector<std::int64_t> verdicts;
  std::vector<std::int64_t> leaning;
  std::int64_t mixed = 0;
  std::int64_t switches = 0;
  std::vector<ConditionalMeanAccumulator> means;
};

struct BatchFailure {
  std::uint64_t stream;
  std::string message;
};

}  // namespace

EnsembleSummary run_batch(const Experiment& exp, const AnalysisSpec& analysis, std::int64_t M,
                          std::uint64_t master_seed, unsigned workers) {
  exp.validate();
  if (M < 1) throw ValidationError("M must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (analysis.grid_points == 1 || analysis.grid_points < 0) throw ValidationError("grid_points must be 0 or >= 2");
  for (const PostSelection& ps : analysis.post_selection) {
    if (ps.target.dim() != exp.observable.dim()) throw ValidationError("post-selection target dimension differs");
    if (ps.mode == PostSelectionMode::verdict_indicator && !basis_index(ps.target)) {
      throw ValidationError("verdict_indicator post-selection needs a basis-state target");
    }
  }

  const std::size_t n = exp.observable.dim();
  const std::int64_t K = exp.plan.steps();
  const double tau = exp.plan.tau();

  EnsembleSummary sum;
  sum.M = M;
  sum.master_seed = master_seed;
  sum.dim = n;
  if (analysis.grid_points >= 2) sum.grid_steps = decimation_steps(K, analysis.grid_points);
  const auto um = static_cast<std::size_t>(M);
  sum.final_walk.assign(um, 0.0);
  sum.theta.assign(um, 0.0);
  sum.readout_mean.assign(um, 0.0);
  sum.first_reduction_step.assign(um, -1);
  sum.switch_count.assign(um, 0);

  const std::int64_t keep = std::clamp<std::int64_t>(analysis.keep_traces, 0, M);
  std::vector<std::optional<TrajectoryRecord>> traces(static_cast<std::size_t>(keep));

  const std::int64_t chunks = (M + kChunkSize - 1) / kChunkSize;
  std::vector<std::optional<ChunkResult>> results(static_cast<std::size_t>(chunks));
  const std::size_t curves = 1 + analysis.post_selection.size();

  std::atomic<std::int64_t> next_chunk{0};
  std::atomic<std::int64_t> failed_chunk{std::numeric_limits<std::int64_t>::max()};
  std::mutex failure_mutex;
  std::optional<BatchFailure> failure;

  auto work = [&]() {
    std::vector<double> probe;
    for (;;) {
      const std::int64_t c = next_chunk.fetch_add(1);
      if (c >= chunks) return;
      if (c > failed_chunk.load()) continue;
      ChunkResult r;
      r.rho.resize(n * n);
      r.verdicts.assign(n, 0);
      r.leaning.assign(n, 0);
      r.means.assign(curves, ConditionalMeanAccumulator(sum.grid_steps.size()));
      const std::int64_t first = c * kChunkSize;
      const std::int64_t last = std::min(M, first + kChunkSize);
      for (std::int64_t s = first; s < last; ++s) {
        const auto sid = static_cast<std::uint64_t>(s);
        try {
          RngStream rng(master_seed, sid);
          const std::int64_t cap = s < keep ? exp.s_max : 2;
          TrajectoryRecord rec = run(exp.system, exp.observable, exp.initial_state, exp.meter, exp.plan, rng, cap,
                                     sum.grid_steps, probe);
          const auto idx = static_cast<std::size_t>(s);
          sum.final_walk[idx] = rec.final_walk;
          sum.theta[idx] = rec.theta;
          sum.readout_mean[idx] = rec.readout_mean;
          sum.first_reduction_step[idx] = rec.first_reduction_step.value_or(-1);
          sum.switch_count[idx] = static_cast<std::int64_t>(rec.switch_steps.size());

          const StateVector& fin = rec.final_state;
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) r.rho[i * n + j].add(fin[i] * std::conj(fin[j]));
          }
          if (rec.collapse_verdict) {
            ++r.verdicts[*rec.collapse_verdict];
          } else {
            ++r.mixed;
          }
          std::size_t lean = 0;
          for (std::size_t j = 1; j < n; ++j) {
            if (std::norm(fin[j]) > std::norm(fin[lean])) lean = j;
          }
          ++r.leaning[lean];
          r.switches += static_cast<std::int64_t>(rec.switch_steps.size());
          if (!sum.grid_steps.empty()) {
            r.means[0].add(probe, 1.0);
            for (std::size_t p = 0; p < analysis.post_selection.size(); ++p) {
              r.means[p + 1].add(probe, analysis.post_selection[p].weight(fin, rec.collapse_verdict));
            }
          }
          if (s < keep) traces[idx].emplace(std::move(rec));
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure || sid < failure->stream) failure = BatchFailure{sid, e.what()};
          std::int64_t cur = failed_chunk.load();
          while (c < cur && !failed_chunk.compare_exchange_weak(cur, c)) {
          }
          break;
        }
      }
      results[static_cast<std::size_t>(c)].emplace(std::move(r));
    }
  };

  const unsigned threads = static_cast<unsigned>(std::min<std::int64_t>(workers, chunks));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) throw BatchError(failure->stream, failure->message);

  // Ordered merge.
  std::vector<ElementStats> rho(n * n);
  sum.verdict_counts.assign(n, 0);
  sum.leaning_counts.assign(n, 0);
  std::vector<ConditionalMeanAccumulator> means(curves, ConditionalMeanAccumulator(sum.grid_steps.size()));
  for (const auto& slot : results) {
    const ChunkResult& r = *slot;
    for (std::size_t e = 0; e < rho.size(); ++e) rho[e].merge(r.rho[e]);
    for (std::size_t j = 0; j < n; ++j) {
      sum.verdict_counts[j] += r.verdicts[j];
      sum.leaning_counts[j] += r.leaning[j];
    }
    sum.mixed_count += r.mixed;
    sum.total_switches += r.switches;
    for (std::size_t p = 0; p < curves; ++p) means[p].merge(r.means[p]);
  }

  const auto md = static_cast<double>(M);
  CMatrix est(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  sum.rho_se_re = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  sum.rho_se_im = sum.rho_se_re;
  sum.rho_abs_se = sum.rho_se_re;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const ElementStats& e = rho[i * n + j];
      const double mr = e.re.value() / md;
      const double mi = e.im.value() / md;
      double vr = 0.0;
      double vi = 0.0;
      double cov = 0.0;
      if (M > 1) {
        vr = std::max((e.re2.value() - md * mr * mr) / (md - 1.0), 0.0);
        vi = std::max((e.im2.value() - md * mi * mi) / (md - 1.0), 0.0);
        cov = (e.reim.value() - md * mr * mi) / (md - 1.0);
      }
      const double mod2 = mr * mr + mi * mi;
      const double vabs = mod2 > 0.0 ? std::max((mr * mr * vr + mi * mi * vi + 2.0 * mr * mi * cov) / mod2, 0.0)
                                     : std::max(vr, vi);
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      est(ii, jj) = Complex(mr, mi);
      est(jj, ii) = Complex(mr, -mi);
      sum.rho_se_re(ii, jj) = sum.rho_se_re(jj, ii) = std::sqrt(vr / md);
      sum.rho_se_im(ii, jj) = sum.rho_se_im(jj, ii) = std::sqrt(vi / md);
      sum.rho_abs_se(ii, jj) = sum.rho_abs_se(jj, ii) = std::sqrt(vabs / md);
    }
  }
  sum.rho_hat = DensityMatrix(std::move(est));

  const bool has_walk = n == 2 && exp.meter.kind() == MeterKind::gaussian;
  if (has_walk) {
    if (!analysis.walk_edges.empty()) {
      sum.walk_histogram = histogram(sum.final_walk, analysis.walk_edges);
    } else if (M >= 2) {
      sum.walk_histogram = histogram(sum.final_walk, freedman_diaconis_edges(sum.final_walk));
    }
  }
  {
    bool spread = false;
    for (double t : sum.theta) spread = spread || t != sum.theta.front();
    if (!analysis.theta_edges.empty()) {
      sum.theta_histogram = histogram(sum.theta, analysis.theta_edges);
    } else if (spread) {
      sum.theta_histogram = histogram(sum.theta, freedman_diaconis_edges(sum.theta));
    }
  }

  sum.reduction_diagnostic = exp.meter.kind() == MeterKind::hard_wall
                                 ? ReductionDiagnostic::hard_wall_region
                                 : (has_walk ? ReductionDiagnostic::walk_threshold : ReductionDiagnostic::none);
  if (analysis.survival_points > 0) {
    sum.survival_curve = survival_curve(sum.first_reduction_step, K, tau, analysis.survival_points);
  }
  sum.first_reduction = first_reduction_stats(sum.first_reduction_step, K, tau);
  sum.mean_residence_time = sum.total_switches > 0
                                ? md * exp.plan.total_time() / static_cast<double>(sum.total_switches)
                                : std::numeric_limits<double>::quiet_NaN();

  if (!sum.grid_steps.empty()) {
    const double df = exp.meter.delta_f();
    sum.conditional_means.push_back({"unconditional", std::nullopt, means[0].finish(sum.grid_steps, tau, df)});
    for (std::size_t p = 0; p < analysis.post_selection.size(); ++p) {
      const PostSelection& ps = analysis.post_selection[p];
      sum.conditional_means.push_back({ps.label, ps.mode, means[p + 1].finish(sum.grid_steps, tau, df)});
    }
  }

  sum.traces.reserve(traces.size());
  for (auto& t : traces) sum.traces.push_back(std::move(*t));
  return sum;
}

}  // namespace fuzzymon
