#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gnncert/bounds.hpp"
#include "gnncert/error.hpp"
#include "gnncert/train.hpp"
#include "oracles.hpp"

using namespace gnncert;
using namespace gnncert::oracle;

namespace {

constexpr double kE = std::numbers::e;

void expect_rel(double got, double want, double tol, const std::string& what) {
  EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << what << ": " << got << " vs " << want;
}

}  // namespace

// ---- frozen examples ----

TEST(Xi, Examples) {
  EXPECT_DOUBLE_EQ(xi(1.0, 3, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(xi(1.5, 3, 1.0), 2.5);
  EXPECT_DOUBLE_EQ(xi(2.0, 3, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(xi(0.0, 2, 2.0), 2.0);
  EXPECT_THROW(xi(1.0, 1, 1.0), ConfigError);
}

TEST(GcnRhs, Examples) {
  WeightStats ws;
  ws.spectral = {1.0, 1.0};
  BoundInputs in;
  in.l = 2;
  const std::vector<double> u{0.1, 0.2};
  EXPECT_NEAR(gcn_perturbation_rhs(ws, in, u), 0.3 * kE, 1e-12);
  EXPECT_NEAR(0.3 * kE, 0.815485, 1e-6);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(gcn_perturbation_rhs(ws, in, zero), 0.0);
  const std::vector<double> big{0.6, 0.0};
  EXPECT_THROW(gcn_perturbation_rhs(ws, in, big), HypothesisViolation);
}

TEST(MpgnnRhs, Examples) {
  WeightStats ws;
  ws.lambda = 1.0;
  BoundInputs in;
  in.l = 2;
  ws.tau = 1.0;
  ws.xi = 1.0;
  EXPECT_NEAR(mpgnn_perturbation_rhs(ws, in, 0.5), 4.5 * kE, 1e-12);
  EXPECT_NEAR(4.5 * kE, 12.2322, 1e-4);
  EXPECT_EQ(mpgnn_perturbation_rhs(ws, in, 0.0), 0.0);
  EXPECT_THROW(mpgnn_perturbation_rhs(ws, in, 0.51), HypothesisViolation);

  in.l = 3;
  ws.tau = 2.0;
  ws.xi = xi(2.0, 3, 1.0);
  EXPECT_NEAR(mpgnn_perturbation_rhs(ws, in, 1.0 / 3.0), 3.0 * kE, 1e-12);
  EXPECT_NEAR(3.0 * kE, 8.15485, 1e-5);
}

TEST(PacBayes, MpgnnExample) {
  WeightStats ws;
  ws.zeta = 1.0;
  ws.lambda = 1.0;
  ws.xi = 1.0;
  ws.tau = 0.0;
  ws.w_sq = 3.0;
  BoundInputs in;
  in.l = 2;
  in.h = 2.0;
  in.m = 100.0;
  const BoundValue v = pacbayes_value_mpgnn(ws, in);
  const double want = std::sqrt(1764.0 * 4.0 * 2.0 * std::log(16.0) * 3.0 / 100.0);
  EXPECT_NEAR(v.value, want, 1e-12 * want);
  EXPECT_NEAR(v.value, 34.26, 0.005);
  EXPECT_NEAR(v.log_value, 3.534, 0.001);
  in.gamma = 2.0;
  EXPECT_NEAR(pacbayes_value_mpgnn(ws, in).value, want / 2.0, 1e-12 * want);
}

TEST(PacBayes, GcnExample) {
  WeightStats ws;
  ws.spectral = {1.0, 1.0};
  ws.frobenius = {std::sqrt(2.0), std::sqrt(2.0)};
  BoundInputs in;
  in.l = 2;
  in.h = 2.0;
  in.d = 2.0;
  in.m = 100.0;
  const double want = std::sqrt(1764.0 * 2.0 * 4.0 * 2.0 * std::log(16.0) * 4.0 / 100.0);
  EXPECT_NEAR(pacbayes_value_gcn(ws, in).value, want, 1e-12 * want);
  EXPECT_NEAR(want, 55.95, 0.01);
}

TEST(Rademacher, ExampleWithZ) {
  // ‖W1‖ = 5, d‖W2‖ = 1, l = 2 (ξ = 1): Z = 5 + 5 = 10 beats √2·5.
  WeightStats ws;
  ws.spectral = {5.0, 1.0, 1.0};
  ws.xi = 1.0;
  BoundInputs in;
  in.l = 2;
  in.h = 2.0;
  in.m = 100.0;
  const RademacherValue r = rademacher_value(ws, in);
  EXPECT_EQ(r.which, RademacherCase::A);
  EXPECT_DOUBLE_EQ(r.terms.Z, 10.0);
  EXPECT_DOUBLE_EQ(r.terms.inner, 10.0);
  const double want = 96.0 * 10.0 * std::sqrt(3.0 * std::log(2400.0) / 100.0);
  EXPECT_NEAR(r.value, want, 1e-12 * want);
  EXPECT_NEAR(want, 463.886, 0.001);
}

TEST(Rademacher, CaseClassification) {
  WeightStats ws;
  ws.spectral = {1.0, 1.0, 1.0};
  ws.xi = 1.0;
  BoundInputs in;
  in.l = 2;
  in.h = 2.0;
  in.d = 5.0;
  in.m = 100.0;
  // B‖W1‖ = 1, R̄‖W2‖ = 5, Z = 6 < √2·5.
  const RademacherTerms t = rademacher_terms(ws, in);
  EXPECT_DOUBLE_EQ(t.R_bar, 5.0);
  EXPECT_EQ(t.which, RademacherCase::C);
  ws.spectral = {1.0, 0.01, 1.0};
  in.h = 100.0;
  EXPECT_EQ(rademacher_terms(ws, in).which, RademacherCase::B);
  EXPECT_EQ(to_string(RademacherCase::B), "B");
}

TEST(Rademacher, UndefinedLogArgument) {
  WeightStats ws;
  ws.spectral = {1e-3, 1e-3, 1e-3};
  ws.xi = 1.0;
  BoundInputs in;
  in.l = 2;
  EXPECT_THROW(rademacher_value(ws, in), ConfigError);
}

TEST(BoundInputs, Validation) {
  BoundInputs in;
  in.B = 0.0;
  EXPECT_THROW(in.validate(), ConfigError);
  in = BoundInputs{};
  in.l = 1;
  EXPECT_THROW(in.validate(), ConfigError);
  in = BoundInputs{};
  in.m = 0.5;
  EXPECT_THROW(in.validate(), ConfigError);
}

// ---- randomized oracle agreement ----

TEST(Oracles, MpgnnFormulasOnRandomDraws) {
  CounterRng root(2024);
  for (int t = 0; t < 100; ++t) {
    CounterRng rng = root.split(t);
    const int regime = t % 4 == 3 ? 1 : 0;
    auto [w, in] = random_mpgnn(rng, regime);
    const WeightStats ws = weight_stats(w, in);
    const Draw d = draw_of(ws, in);
    const std::string tag = "draw " + std::to_string(t);
    if (regime == 1) ASSERT_LT(std::abs(ws.tau - 1.0), 1e-6) << tag;

    expect_rel(ws.xi, xi_oracle(ws.tau, in.l, in.C_phi), 1e-12, tag + " xi");
    expect_rel(pacbayes_value_mpgnn(ws, in).value, pacbayes_mpgnn_oracle(d), 1e-12, tag + " pacbayes");
    const double eta = rng.uniform(0.0, 1.0) / static_cast<double>(in.l);
    expect_rel(mpgnn_perturbation_rhs(ws, in, eta), mpgnn_rhs_oracle(d, eta), 1e-12, tag + " rhs");
    const RadOracle ro = rademacher_oracle(d);
    const RademacherValue rv = rademacher_value(ws, in);
    expect_rel(rv.value, ro.value, 1e-12, tag + " rademacher");
    EXPECT_EQ(to_string(rv.which), std::string(1, ro.which)) << tag;
    EXPECT_NEAR(rv.log_value, std::log(rv.value), 1e-12 * std::abs(rv.log_value));
  }
}

TEST(Oracles, GcnFormulasOnRandomDraws) {
  CounterRng root(77);
  for (int t = 0; t < 100; ++t) {
    CounterRng rng = root.split(t);
    auto [w, in] = random_gcn(rng);
    const WeightStats ws = weight_stats(w, in);
    const Draw d = draw_of(ws, in);
    std::vector<double> u(in.l);
    for (std::size_t k = 0; k < in.l; ++k) u[k] = rng.uniform(0.0, 1.0) * ws.spectral[k] / in.l;
    const std::string tag = "draw " + std::to_string(t);
    expect_rel(pacbayes_value_gcn(ws, in).value, pacbayes_gcn_oracle(d), 1e-12, tag + " pacbayes");
    expect_rel(gcn_perturbation_rhs(ws, in, u), gcn_rhs_oracle(d, u), 1e-12, tag + " rhs");
  }
}

TEST(Oracles, SweepSummary) {
  const SweepResult r = formula_sweep(5, 100);
  EXPECT_EQ(r.draws, 200u);
  EXPECT_EQ(r.window_draws, 25u);
  EXPECT_LE(r.max_rel_err, 1e-12);
  EXPECT_LE(r.max_window_jump, 1e-3);
  EXPECT_EQ(r.case_mismatches, 0u);
}

TEST(Oracles, XiLoopAgreement) {
  CounterRng rng(5);
  for (int t = 0; t < 100; ++t) {
    const double tau = t % 5 == 0 ? 1.0 + rng.uniform(-9e-7, 9e-7) : rng.uniform(0.0, 4.0);
    const std::size_t l = 2 + rng.below(10);
    const double c = rng.uniform(0.1, 2.0);
    expect_rel(xi(tau, l, c), xi_oracle(tau, l, c), 1e-12, "xi");
  }
}

TEST(Oracles, UnitRatioWindowContinuity) {
  // Values just inside and just outside |τ − 1| = 1e−6 must agree closely
  // for ξ and for everything built from it.
  for (std::size_t l = 2; l <= 12; ++l) {
    for (double side : {-1.0, 1.0}) {
      const double inside = 1.0 + side * (1e-6 - 1e-12);
      const double outside = 1.0 + side * (1e-6 + 1e-12);
      const double a = xi(inside, l, 1.0), b = xi(outside, l, 1.0);
      EXPECT_LE(std::abs(a - b) / std::abs(b), 1e-3) << "l=" << l;
      EXPECT_LE(std::abs(a - b) / std::abs(b), 1e-8) << "l=" << l;
    }
  }
  WeightStats ws;
  ws.spectral = {1.3, 0.0, 0.7};
  BoundInputs in;
  in.l = 5;
  in.d = 4.0;
  in.h = 16.0;
  in.m = 500.0;
  const auto rad_at = [&](double tau) {
    ws.spectral[1] = tau / in.d;
    ws.xi = xi(tau, in.l, 1.0);
    return rademacher_value(ws, in).value;
  };
  const double a = rad_at(1.0 + 0.999e-6), b = rad_at(1.0 + 1.001e-6);
  EXPECT_LE(std::abs(a - b) / b, 1e-3);
}

// ---- reports ----

TEST(Report, MpgnnAndGcnRows) {
  SyntheticSpec spec;
  spec.name = "small";
  spec.nodes = 10;
  spec.p = 0.3;
  spec.num_graphs = 20;
  spec.feature_dim = 4;
  const Dataset ds = gen_dataset(spec, 3);
  CounterRng rng(6);
  const ModelWeights mp = init_model(ModelKind::Mpgnn, 4, 8, 2, 3, rng);
  const BoundReport r = bound_report(ds, mp, 1.0, 11);
  EXPECT_TRUE(r.has_rademacher);
  EXPECT_EQ(r.data.m, 20u);
  EXPECT_EQ(r.h, 8u);
  EXPECT_DOUBLE_EQ(r.margin_loss, margin_loss(mp, ds, 1.0));
  const std::string row = r.csv_row();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 16);
  const std::string header = BoundReport::csv_header();
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 16);
  EXPECT_EQ(row.rfind("small,mpgnn,3,8,11,", 0), 0u);
  const nlohmann::json j = r.to_json();
  EXPECT_DOUBLE_EQ(j["pacbayes_log"].get<double>(), r.pacbayes.log_value);
  EXPECT_EQ(j["rademacher_case"], to_string(r.rademacher.which));
  // Pure: identical inputs give an identical row.
  EXPECT_EQ(bound_report(ds, mp, 1.0, 11).csv_row(), row);

  const ModelWeights gc = init_model(ModelKind::Gcn, 4, 8, 2, 3, rng);
  const BoundReport g = bound_report(ds, gc, 1.0, 11);
  EXPECT_FALSE(g.has_rademacher);
  const std::string grow = g.csv_row();
  EXPECT_EQ(grow.substr(grow.size() - 3), ",,-");
  EXPECT_TRUE(g.to_json()["zeta"].is_null());

  const ModelWeights wrong = init_model(ModelKind::Mpgnn, 5, 8, 2, 3, rng);
  EXPECT_THROW(bound_report(ds, wrong, 1.0), DimensionError);
}
