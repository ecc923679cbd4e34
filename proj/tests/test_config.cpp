#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "fuzzymon/config.hpp"
#include "fuzzymon/errors.hpp"

using namespace fuzzymon;

namespace {

const char* kMinimal = R"({
  "system": {"eigenvalues": [-1, 1]},
  "meter": {"kind": "gaussian", "delta_f": 10},
  "plan": {"T": 2.0, "K": 400},
  "initial_state": {"amplitudes": [1, 0]}
})";

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LoadConfig, MinimalFreeSystem) {
  const ExperimentConfig c = parse_config_text(kMinimal);
  EXPECT_EQ(c.plan.K, 400);
  EXPECT_EQ(c.run.M, 1);
  const DerivedQuantities d = derive(c);
  EXPECT_DOUBLE_EQ(d.tau, 2.0 / 400.0);
  EXPECT_DOUBLE_EQ(d.delta_f, 10.0);
  // kappa = 1 / (2 tau df^2)
  EXPECT_DOUBLE_EQ(d.coupling, 1.0 / (2.0 * 0.005 * 100.0));
  EXPECT_DOUBLE_EQ(*d.delta_a_T, 1.0 / std::sqrt(d.coupling * 2.0));
  EXPECT_DOUBLE_EQ(*d.t_lr, 1.0 / (d.coupling * 4.0));
  EXPECT_FALSE(d.t_r.has_value());
  EXPECT_FALSE(d.t_lr_prime.has_value());
  EXPECT_EQ(derived_to_json(d)["tau"].get<double>(), 0.005);
}

TEST(LoadConfig, CouplingDerivesDeltaF) {
  std::string text = kMinimal;
  text.replace(text.find("\"delta_f\": 10"), 13, "\"coupling\": 0.25");
  const DerivedQuantities d = derive(parse_config_text(text));
  EXPECT_DOUBLE_EQ(d.delta_f, 1.0 / std::sqrt(2.0 * 0.005 * 0.25));
}

TEST(LoadConfig, HardWallDerived) {
  const ExperimentConfig c = parse_config_text(R"({
    "system": {"eigenvalues": [-1, 1], "omega": 2.0},
    "meter": {"kind": "hard_wall", "coupling": 5},
    "plan": {"T": 1, "K": 1000},
    "initial_state": {"amplitudes": [[0.6, 0], [0, 0.8]]}
  })");
  const DerivedQuantities d = derive(c);
  EXPECT_DOUBLE_EQ(d.delta_f, 1.0 / (0.001 * 5.0));
  EXPECT_DOUBLE_EQ(*d.t_lr_prime, 0.1);
  EXPECT_DOUBLE_EQ(*d.t_r, M_PI);
  EXPECT_DOUBLE_EQ(*d.t_stay, M_PI * M_PI / (4.0 * M_PI * M_PI * 0.1));
  EXPECT_FALSE(d.delta_a_T.has_value());
  EXPECT_EQ(c.initial_state.amplitudes[1], Complex(0.0, 0.8));
}

TEST(LoadConfig, RejectsBothWidthAndCoupling) {
  std::string text = kMinimal;
  text.replace(text.find("\"delta_f\": 10"), 13, "\"delta_f\": 10, \"coupling\": 1");
  EXPECT_NE(error_of(text).find("exactly one of delta_f and coupling"), std::string::npos);
}

TEST(LoadConfig, RejectsNeitherWidthNorCoupling) {
  std::string text = kMinimal;
  text.replace(text.find(", \"delta_f\": 10"), 15, "");
  EXPECT_NE(error_of(text).find("meter:"), std::string::npos);
}

TEST(LoadConfig, UnknownKeyPath) {
  std::string text = kMinimal;
  text.replace(text.find("\"K\": 400"), 8, "\"K\": 400, \"steps\": 3");
  EXPECT_EQ(error_of(text), "plan.steps: unknown key");
}

TEST(LoadConfig, MissingKeyPath) {
  std::string text = kMinimal;
  text.replace(text.find("\"T\": 2.0, "), 10, "");
  EXPECT_EQ(error_of(text), "plan.T: required key is missing");
}

TEST(LoadConfig, InvariantViolationPaths) {
  std::string text = kMinimal;
  text.replace(text.find("[1, 0]"), 6, "[1, 1]");
  EXPECT_EQ(error_of(text).rfind("initial_state.amplitudes:", 0), 0u);
  text = kMinimal;
  text.replace(text.find("[-1, 1]"), 7, "[1, 1]");
  EXPECT_EQ(error_of(text).rfind("system.eigenvalues:", 0), 0u);
  text = kMinimal;
  text.replace(text.find("\"K\": 400"), 8, "\"K\": 2.5");
  EXPECT_EQ(error_of(text), "plan.K: expected an integer");
  EXPECT_EQ(error_of("[1, 2]"), "<root>: expected an object");
  EXPECT_EQ(error_of("{").rfind("<root>: malformed JSON", 0), 0u);
}

TEST(LoadConfig, NormalizeFlag) {
  std::string text = kMinimal;
  text.replace(text.find("[1, 0]"), 6, "[1, 1], \"normalize\": true");
  const Experiment e = build_experiment(parse_config_text(text));
  EXPECT_NEAR(std::norm(e.initial_state[0]), 0.5, 1e-15);
}

TEST(LoadConfig, PostSelectionNeedsBasisTargetForIndicator) {
  const std::string text = R"({
    "system": {"eigenvalues": [-1, 1]},
    "meter": {"kind": "gaussian", "delta_f": 10},
    "plan": {"T": 1, "K": 10},
    "initial_state": {"amplitudes": [1, 0]},
    "analysis": {"post_selection": [{"target": [0.6, 0.8], "mode": "verdict_indicator"}]}
  })";
  EXPECT_EQ(error_of(text), "analysis.post_selection[0].mode: verdict_indicator needs a basis-state target");
}

TEST(LoadConfig, RoundTrip) {
  const ExperimentConfig c = parse_config_text(R"({
    "name": "rt",
    "system": {"eigenvalues": [0, 1, 2.5], "energies": [0.1, 0.2, 0.3], "omega": 0.7},
    "meter": {"kind": "gaussian", "coupling": 0.3},
    "plan": {"T": 1.5, "K": 1e3},
    "initial_state": {"amplitudes": [[1, 1], 0, [0, -1]], "normalize": true},
    "run": {"M": 12, "master_seed": 18446744073709551615, "s_max": 50, "workers": 3},
    "analysis": {"grid_points": 4, "survival_points": 3, "keep_traces": 2,
                 "walk_histogram": {"lo": -3, "hi": 3, "bins": 12},
                 "post_selection": [{"target": [0, 1, 0], "mode": "verdict_indicator", "label": "mid"},
                                    {"target": [[0.6, 0], 0, [0, 0.8]]}]},
    "output": {"directory": "somewhere", "formats": ["json"]}
  })");
  EXPECT_EQ(c.run.master_seed, 18446744073709551615ull);
  EXPECT_EQ(c.analysis.post_selection[1].label, "post_1");
  const ExperimentConfig back = parse_config(config_to_json(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_to_json(back).dump(), config_to_json(c).dump());
}

TEST(BuildHamiltonian, NearestNeighbourCoupling) {
  const Hamiltonian h = build_hamiltonian({{0, 1, 2}, {0.5, 0, -0.5}, 0.3});
  EXPECT_EQ(h.matrix()(0, 1), Complex(0.3));
  EXPECT_EQ(h.matrix()(1, 2), Complex(0.3));
  EXPECT_EQ(h.matrix()(0, 2), Complex(0.0));
  EXPECT_EQ(h.matrix()(2, 2), Complex(-0.5));
  EXPECT_TRUE(build_hamiltonian({{0, 1}, {}, 0.0}).two_level_params().has_value());
}
