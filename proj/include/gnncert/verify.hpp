#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "gnncert/model.hpp"

namespace gnncert {

/// Absolute slack applied to every inequality assertion.
inline constexpr double kCheckSlack = 1e-9;

/// Outcome of one property check. worst_slack is the smallest observed
/// (bound − observed) over all assertions; negative means a violation.
struct CheckReport {
  std::string check;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  nlohmann::json parameters = nlohmann::json::object();
  /// First few violation descriptions, for diagnostics.
  std::vector<std::string> notes;

  /// Records `bound − observed` and counts a violation when it is below
  /// −slack.
  void assert_le(double observed, double bound, const std::string& what,
                 double slack = kCheckSlack);
  bool passed() const noexcept { return violations == 0; }
  nlohmann::json to_json() const;
};

/// Random graphs (n ≤ 12) with random weights and perturbations scaled so the
/// lemma hypotheses hold; asserts the output change is within the
/// perturbation RHS and every hidden state within its Φ_j bound. MPGNN trials
/// cycle through τ < 1, τ > 1 and τ = 1 by rescaling W2.
CheckReport check_perturbation_bounds(ModelKind kind, std::size_t trials, std::uint64_t seed);

/// Laplacian and incidence norm bounds on random graphs (n ≤ 50), plus the
/// activation ∞-norm inequalities on random matrices.
CheckReport check_structural_lemmas(std::size_t trials, std::uint64_t seed);

/// Monte Carlo tail of ‖U‖₂ for h×h Gaussian U (entries N(0, σ²)) against
/// 2h·exp(−t²/(2hσ²)) at t = σ√(2h log(4lh)), plus P(‖U‖₂ < t) ≥ 1/2 and
/// monotonicity of the empirical tail over a grid of t.
CheckReport check_concentration(std::size_t h, double sigma, std::size_t l, std::size_t samples,
                                std::uint64_t seed);

/// Single-node GCN ≡ ReLU MLP, incidence ≡ adjacency aggregation, analytic ≡
/// finite-difference gradients, and GCN positive homogeneity.
CheckReport check_equivalences(std::uint64_t seed);

// ---- building blocks, exposed for tests ----

/// MPGNN forward computed with dense incidence matrices instead of neighbor
/// lists. Returns the logits.
Matrix mpgnn_logits_incidence_form(const MpgnnWeights& w, const Graph& g);

/// Max over weight matrices of ‖analytic − central difference‖_F / max(‖analytic‖_F,
/// ‖central difference‖_F) (absolute when both are below 1e−12).
double gradient_check(const ModelWeights& w, const Graph& g, double step = 1e-6);

}  // namespace gnncert
