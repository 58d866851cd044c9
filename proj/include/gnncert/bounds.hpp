#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gnncert/graph.hpp"
#include "gnncert/model.hpp"

namespace gnncert {

/// Statistics every certificate consumes. All logs are natural.
struct BoundInputs {
  double B = 1.0;      // max node-feature ℓ2 norm
  double d = 1.0;      // max degree + 1
  std::size_t l = 2;   // depth / steps
  double h = 1.0;      // max hidden dimension
  double m = 1.0;      // training-set size
  double gamma = 1.0;  // margin
  double delta = 0.1;  // recorded only; does not enter the computed values
  double C_phi = 1.0;
  double C_rho = 1.0;
  double C_g = 1.0;

  /// Throws ConfigError on nonpositive entries, l < 2 or m < 1.
  void validate() const;
};

constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

/// Norm summary of a weight set. MPGNN-only entries are NaN for a GCN.
struct WeightStats {
  std::vector<double> spectral;   // ‖W_i‖₂ in parameter order
  std::vector<double> frobenius;  // ‖W_i‖_F
  double w_sq = 0.0;              // Σ ‖W_i‖_F²
  double zeta = kNotApplicable;   // min(‖W1‖₂, ‖W2‖₂, ‖Wl‖₂)
  double lambda = kNotApplicable; // ‖W1‖₂ ‖Wl‖₂
  double percolation = kNotApplicable;  // C_φ C_ρ C_g ‖W2‖₂
  double tau = kNotApplicable;    // d · percolation
  double xi = kNotApplicable;     // C_φ Σ_{k=0}^{l−2} τᵏ
  double kappa = kNotApplicable;  // C_φ B ‖W1‖₂
  double beta = kNotApplicable;   // max(1/ζ, (λξ)^{1/l})
};

WeightStats weight_stats(const ModelWeights& w, const BoundInputs& in);
/// Inputs from dataset statistics and the weights' shape / activations.
BoundInputs bound_inputs(const DatasetStats& s, const ModelWeights& w, double gamma);

/// C_φ · Σ_{k=0}^{l−2} τᵏ. Within |τ−1| < 1e−6 the limit C_φ(l−1) plus
/// the first-order term C_φ(τ−1)(l−1)(l−2)/2.
double xi(double tau, std::size_t l, double C_phi);

/// e B d^{(l−1)/2} ∏‖W_i‖₂ Σ_k ‖U_k‖₂/‖W_k‖₂. Requires ‖U_k‖₂ ≤ ‖W_k‖₂ / l for
/// every k; otherwise throws HypothesisViolation naming k.
double gcn_perturbation_rhs(const WeightStats& ws, const BoundInputs& in,
                            std::span<const double> pert_norms);

/// η = max_k ‖U_k‖₂/‖W_k‖₂ ≤ 1/l required. Inside the τ = 1 window:
/// e B (l+1)² η λ C_φ; otherwise e B l η λ ξ.
double mpgnn_perturbation_rhs(const WeightStats& ws, const BoundInputs& in, double eta);

struct BoundValue {
  double value = 0.0;
  double log_value = 0.0;
};

/// √(42² B² max(ζ^{−(l+1)}, (λξ)^{(l+1)/l})² l² h log(4lh) |w|₂² / (γ² m)); inside
/// the τ = 1 window the factor max(·)² l² becomes max(ζ^{−6}, λ³C_φ³)(l+1)⁴.
BoundValue pacbayes_value_mpgnn(const WeightStats& ws, const BoundInputs& in);

/// √(42² B² d^{l−1} l² h log(4lh) ∏‖W_i‖₂² Σ ‖W_i‖_F²/‖W_i‖₂² / (γ² m)).
BoundValue pacbayes_value_gcn(const WeightStats& ws, const BoundInputs& in);

enum class RademacherCase { A, B, C };
std::string to_string(RademacherCase c);

struct RademacherTerms {
  double M = 0.0;      // ξ
  double R_bar = 0.0;  // C_ρ C_g d B ‖W1‖₂ ξ
  double Z = 0.0;      // C_φ (B ‖W1‖₂ + R̄ ‖W2‖₂)
  double inner = 0.0;  // max(Z, M √h max(B ‖W1‖₂, R̄ ‖W2‖₂))
  double log_arg = 0.0;
  RademacherCase which = RademacherCase::A;
};

struct RademacherValue {
  double value = 0.0;
  double log_value = 0.0;
  RademacherCase which = RademacherCase::A;
  RademacherTerms terms;
};

RademacherTerms rademacher_terms(const WeightStats& ws, const BoundInputs& in);

/// 2·24·h·‖Wl‖₂·Z·√(3 log(24 ‖Wl‖₂ √m · inner) / (γ² m)). Throws ConfigError
/// when the log argument is ≤ 1.
RademacherValue rademacher_value(const WeightStats& ws, const BoundInputs& in);

struct BoundReport {
  std::string dataset;
  ModelKind model = ModelKind::Mpgnn;
  std::size_t l = 2;
  std::size_t h = 0;
  std::uint64_t seed = 0;
  double gamma = 1.0;
  double delta = 0.1;
  DatasetStats data;
  WeightStats weights;
  double margin_loss = 0.0;
  BoundValue pacbayes;
  /// Rademacher fields are only populated for MPGNN.
  bool has_rademacher = false;
  RademacherValue rademacher;

  static std::string csv_header();
  std::string csv_row() const;
  nlohmann::json to_json() const;
};

/// Assembles a full report on the given (training) dataset: dataset
/// statistics, weight norms, the empirical margin loss and both certificates.
BoundReport bound_report(const Dataset& train_set, const ModelWeights& w, double gamma,
                         std::uint64_t seed = 0, double delta = 0.1);

}  // namespace gnncert
