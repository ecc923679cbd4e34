#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "fuzzymon/emit.hpp"
#include "fuzzymon/errors.hpp"

using namespace fuzzymon;

namespace {

const OutputMetadata kMeta{42, 3, 1, 0.5, "test"};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.name = "emit";
  c.system.eigenvalues = {-1.0, 1.0};
  c.meter.kind = MeterKind::gaussian;
  c.meter.coupling = 0.5;
  c.plan = {1.0, 200};
  c.initial_state.amplitudes = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  c.run.M = 40;
  c.run.master_seed = 9;
  c.analysis.keep_traces = 2;
  c.analysis.grid_points = 5;
  c.analysis.survival_points = 4;
  c.analysis.post_selection = {{{1.0, 0.0}, PostSelectionMode::born_weight, "a1"}};
  return c;
}

}  // namespace

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(-2.5e-300), "-2.5e-300");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(TraceCsv, EmptyRecordIsHeaderOnly) {
  std::ostringstream out;
  write_trace_csv(out, SampleSeries{2, {}, {}, {}, {}, {}}, 2, kMeta);
  EXPECT_EQ(out.str(),
            "# master_seed=42\n# K=3\n# M=1\n# scale=0.5\n# scale_note=test\n"
            "k,t,f,occ_1,occ_2,X\n");
}

TEST(TraceCsv, RowsInStepOrder) {
  SampleSeries s;
  s.dim = 2;
  s.step = {1, 2, 3};
  s.time = {0.25, 0.5, 0.75};
  s.readout = {1.5, -0.5, 2.0};
  s.walk = {0.1, 0.2, std::numeric_limits<double>::quiet_NaN()};
  s.occupation = {0.5, 0.5, 0.25, 0.75, 1.0, 0.0};
  std::ostringstream out;
  write_trace_csv(out, s, 2, kMeta);
  const std::string text = out.str();
  EXPECT_NE(text.find("k,t,f,occ_1,occ_2,X\n1,0.25,1.5,0.5,0.5,0.1\n2,0.5,-0.5,0.25,0.75,0.2\n3,0.75,2,1,0,nan\n"),
            std::string::npos);
}

TEST(HistogramCsv, ExpectedColumn) {
  Histogram h;
  h.edges = {0.0, 0.5, 1.0};
  h.counts = {3, 1};
  const std::function<double(double)> cdf = [](double x) { return x; };
  std::ostringstream out;
  write_histogram_csv(out, h, &cdf, kMeta);
  EXPECT_NE(out.str().find("lo,hi,count,expected\n0,0.5,3,2\n0.5,1,1,2\n"), std::string::npos);
}

TEST(WriteArtifacts, ByteIdenticalRerun) {
  const ExperimentConfig c = small_config();
  const auto root = std::filesystem::temp_directory_path() / "fuzzymon_emit_test";
  std::filesystem::remove_all(root);
  std::vector<std::string> names;
  for (const char* tag : {"a", "b"}) {
    const EnsembleSummary s = run_batch(build_experiment(c), build_analysis(c), c.run.M, c.run.master_seed, 2);
    names = write_artifacts(root / tag, c, s, {c.run.master_seed, c.plan.K, c.run.M, 1.0, "unscaled"}, {});
  }
  ASSERT_GE(names.size(), 6u);
  for (const std::string& n : names) {
    const std::string a = slurp(root / "a" / n);
    EXPECT_FALSE(a.empty()) << n;
    EXPECT_EQ(a, slurp(root / "b" / n)) << n;
    EXPECT_NE(a.find("9"), std::string::npos) << n;
  }
  const auto j = nlohmann::json::parse(slurp(root / "a" / "summary.json"));
  EXPECT_EQ(j["metadata"]["master_seed"], 9);
  EXPECT_EQ(j["metadata"]["K"], 200);
  EXPECT_EQ(j["metadata"]["M"], 40);
  EXPECT_EQ(j["metadata"]["scale_note"], "unscaled");
  EXPECT_EQ(parse_config(j["config"]), c);
  std::filesystem::remove_all(root);
}

TEST(WriteArtifacts, IoErrorNamesPath) {
  const auto blocker = std::filesystem::temp_directory_path() / "fuzzymon_emit_blocker";
  std::filesystem::remove_all(blocker);
  { std::ofstream(blocker) << "x"; }
  try {
    write_text_file(blocker / "sub" / "file.csv", "x");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("fuzzymon_emit_blocker"), std::string::npos);
  }
  std::filesystem::remove_all(blocker);
}

TEST(TheoryOverlays, Applicability) {
  ExperimentConfig c = small_config();
  EXPECT_TRUE(walk_theory_cdf(c).has_value());
  EXPECT_FALSE(theta_theory_cdf(c).has_value());
  EXPECT_FALSE(survival_theory(c).has_value());
  c.initial_state.amplitudes = {1.0, 0.0};
  EXPECT_TRUE(theta_theory_cdf(c).has_value());
  c.system.omega = 1.0;
  EXPECT_FALSE(walk_theory_cdf(c).has_value());
  c.meter.kind = MeterKind::hard_wall;
  c.meter.coupling = 2.0;
  const auto surv = survival_theory(c);
  ASSERT_TRUE(surv.has_value());
  // (1 - kappa' tau da)^k with kappa' = 2, tau = 1/200, da = 2.
  EXPECT_NEAR((*surv)(50), std::pow(1.0 - 2.0 * 0.005 * 2.0, 50), 1e-12);
}
