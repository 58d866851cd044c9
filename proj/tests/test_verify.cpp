#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gnncert/bounds.hpp"
#include "gnncert/error.hpp"
#include "gnncert/verify.hpp"

using namespace gnncert;

TEST(CheckReport, AssertAndJson) {
  CheckReport r;
  r.check = "demo";
  r.trials = 2;
  r.assert_le(1.0, 2.0, "ok");
  EXPECT_TRUE(r.passed());
  EXPECT_DOUBLE_EQ(r.worst_slack, 1.0);
  r.assert_le(1.0 + 1e-12, 1.0, "within slack");
  EXPECT_TRUE(r.passed());
  r.assert_le(2.0, 1.0, "broken");
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.violations, 1u);
  const nlohmann::json j = r.to_json();
  for (const char* key : {"check", "trials", "violations", "worst_slack", "seed"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["notes"].size(), 1u);
}

TEST(Verify, PerturbationSmallRunsCoverRegimes) {
  const CheckReport g = check_perturbation_bounds(ModelKind::Gcn, 150, 3);
  EXPECT_EQ(g.violations, 0u) << g.to_json().dump();
  const CheckReport m = check_perturbation_bounds(ModelKind::Mpgnn, 150, 3);
  EXPECT_EQ(m.violations, 0u) << m.to_json().dump();
  EXPECT_GT(m.parameters["trials_tau_below_1"].get<int>(), 0);
  EXPECT_GT(m.parameters["trials_tau_above_1"].get<int>(), 0);
  EXPECT_GT(m.parameters["trials_tau_equal_1"].get<int>(), 0);
}

TEST(Verify, ReproducibleFromSeed) {
  const auto a = check_perturbation_bounds(ModelKind::Mpgnn, 60, 9).to_json();
  const auto b = check_perturbation_bounds(ModelKind::Mpgnn, 60, 9).to_json();
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(check_structural_lemmas(40, 2).to_json().dump(),
            check_structural_lemmas(40, 2).to_json().dump());
}

TEST(Verify, PerturbationRhsWithinFactorEOnScalarCase) {
  Graph g;
  g.n = 1;
  g.features = Matrix{{1.0}};
  const GcnWeights w{{Matrix{{1.0}}, Matrix{{1.0}}}};
  const GcnWeights p{{Matrix{{1.25}}, Matrix{{1.0}}}};
  const double change = std::abs(gcn_forward(p, g).logits(0, 0) - gcn_forward(w, g).logits(0, 0));
  EXPECT_NEAR(change, 0.25, 1e-15);
  BoundInputs in = bound_inputs(graph_stats(g), w, 1.0);
  const std::vector<double> u{0.25, 0.0};
  const double rhs = gcn_perturbation_rhs(weight_stats(w, in), in, u);
  EXPECT_NEAR(rhs / change, std::numbers::e, 1e-9);
}

TEST(Verify, StructuralAndConcentration) {
  const CheckReport s = check_structural_lemmas(100, 5);
  EXPECT_EQ(s.violations, 0u) << s.to_json().dump();
  const CheckReport c = check_concentration(8, 1.0, 2, 2000, 5);
  EXPECT_EQ(c.violations, 0u) << c.to_json().dump();
  EXPECT_NEAR(c.parameters["t"].get<double>(), std::sqrt(16.0 * std::log(64.0)), 1e-12);
  EXPECT_THROW(check_concentration(0, 1.0, 2, 10, 0), ConfigError);
}

TEST(Verify, Equivalences) {
  const CheckReport e = check_equivalences(1);
  EXPECT_EQ(e.violations, 0u) << e.to_json().dump();
  EXPECT_EQ(e.trials, 150u);
}

TEST(Verify, IncidenceFormMatchesForward) {
  Graph g;
  g.n = 3;
  g.edges = {{0, 1}, {1, 2}};
  g.features = Matrix{{1, 0}, {0, 1}, {1, 1}};
  CounterRng rng(2);
  const MpgnnWeights w = init_mpgnn(2, 3, 2, 4, rng);
  EXPECT_LT(max_abs_diff(mpgnn_logits_incidence_form(w, g), mpgnn_forward(w, g).logits), 1e-12);
}
