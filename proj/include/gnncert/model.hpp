#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnncert/graph.hpp"
#include "gnncert/matrix.hpp"
#include "gnncert/rng.hpp"

namespace gnncert {

enum class ActivationKind { ReLU, Tanh, Identity, Sigmoid };

/// Elementwise nonlinearity with its Lipschitz constant under the vector
/// 2-norm. Sigmoid exists for the ∞-norm checks only and is not accepted as a
/// model nonlinearity (it does not map 0 to 0).
struct Activation {
  ActivationKind kind = ActivationKind::ReLU;

  // 1 for all four kinds (sigmoid is 1/4-Lipschitz; 1 is the recorded bound).
  double lipschitz() const noexcept { return 1.0; }
  bool zero_preserving() const noexcept { return kind != ActivationKind::Sigmoid; }

  double apply(double x) const noexcept;
  /// Derivative evaluated at the pre-activation x (ReLU: 0 at x = 0).
  double derivative(double x) const noexcept;

  Matrix apply(const Matrix& m) const;
  Matrix derivative(const Matrix& pre) const;

  std::string name() const;
  static Activation parse(const std::string& name);

  friend bool operator==(const Activation&, const Activation&) = default;
};

inline constexpr Activation kReLU{ActivationKind::ReLU};
inline constexpr Activation kTanh{ActivationKind::Tanh};
inline constexpr Activation kIdentity{ActivationKind::Identity};
inline constexpr Activation kSigmoid{ActivationKind::Sigmoid};

enum class ModelKind { Gcn, Mpgnn };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

/// l-layer GCN: W[k] is d_k × d_{k+1}; the last matrix is the readout.
/// Hidden nonlinearity is ReLU.
struct GcnWeights {
  std::vector<Matrix> W;

  std::size_t layers() const noexcept { return W.size(); }
  std::size_t input_dim() const { return W.front().rows(); }
  std::size_t num_classes() const { return W.back().cols(); }
  /// Largest dimension over every weight matrix.
  std::size_t max_dim() const;

  /// l > 1, chain-consistent shapes, finite entries.
  void validate() const;
};

/// l-step MPGNN with shared weights: H_k = φ(X W1 + ρ(C_in g(C_outᵀ H_{k−1})) W2),
/// H₀ = 0, readout (1/n) 1ₙ H_{l−1} Wl.
struct MpgnnWeights {
  std::size_t l = 2;
  Matrix W1;  // h₀ × h
  Matrix W2;  // h × h
  Matrix Wl;  // h × K
  Activation phi = kReLU;
  Activation rho = kTanh;
  Activation g = kTanh;

  std::size_t input_dim() const noexcept { return W1.rows(); }
  std::size_t hidden() const noexcept { return W2.rows(); }
  std::size_t num_classes() const noexcept { return Wl.cols(); }
  std::size_t max_dim() const;

  void validate() const;
};

using ModelWeights = std::variant<GcnWeights, MpgnnWeights>;

ModelKind kind_of(const ModelWeights& w);
std::size_t depth_of(const ModelWeights& w);
std::size_t num_classes_of(const ModelWeights& w);
std::size_t input_dim_of(const ModelWeights& w);

/// Glorot-uniform initialization, U(−a, a) with a = √(6/(fan_in + fan_out)).
Matrix glorot_uniform(std::size_t rows, std::size_t cols, CounterRng& rng);

/// hidden.size() == l − 1 hidden widths.
GcnWeights init_gcn(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                    std::size_t classes, CounterRng& rng);
MpgnnWeights init_mpgnn(std::size_t input_dim, std::size_t hidden, std::size_t classes,
                        std::size_t steps, CounterRng& rng, Activation phi = kReLU,
                        Activation rho = kTanh, Activation g = kTanh);
ModelWeights init_model(ModelKind kind, std::size_t input_dim, std::size_t hidden,
                        std::size_t classes, std::size_t depth, CounterRng& rng);

/// Per-graph structure reused across forward/backward passes.
struct GraphContext {
  const Graph* graph = nullptr;
  std::vector<std::vector<std::size_t>> neighbors;
  /// Normalized Laplacian in neighbor-list form: laplacian_self[i] = L̃[i,i],
  /// laplacian_edge[i][t] = L̃[i, neighbors[i][t]].
  std::vector<double> laplacian_self;
  std::vector<std::vector<double>> laplacian_edge;

  explicit GraphContext(const Graph& g);
};

/// L̃ · m computed from the neighbor lists.
Matrix laplacian_apply(const GraphContext& ctx, const Matrix& m);
/// M̄[v,:] = Σ_{u ∈ N(v)} act(H[u,:]).
Matrix aggregate_adjacency(const GraphContext& ctx, const Matrix& h, const Activation& act);
/// C_in · act(C_outᵀ H), dense.
Matrix aggregate_incidence(const Incidence& inc, const Matrix& h, const Activation& act);

struct ForwardTrace {
  /// H₀ … H_{l−1}. GCN: H₀ = X. MPGNN: H₀ = 0 (n × h).
  std::vector<Matrix> hidden;
  /// Pre-activations for steps 1 … l−1 (index k−1).
  /// GCN: L̃ H_{k−1} W_k. MPGNN: X W1 + ρ(M̄_k) W2.
  std::vector<Matrix> pre;
  /// GCN only: L̃ H_{k−1} for steps 1 … l−1.
  std::vector<Matrix> propagated;
  /// MPGNN only: aggregated messages M̄_k for steps 1 … l−1.
  std::vector<Matrix> messages;
  Matrix pooled;  // 1 × width, (1/n) 1ₙ H_{l−1}
  Matrix logits;  // 1 × K
};

ForwardTrace gcn_forward(const GcnWeights& w, const GraphContext& ctx);
ForwardTrace gcn_forward(const GcnWeights& w, const Graph& g);
ForwardTrace mpgnn_forward(const MpgnnWeights& w, const GraphContext& ctx);
ForwardTrace mpgnn_forward(const MpgnnWeights& w, const Graph& g);
ForwardTrace forward(const ModelWeights& w, const GraphContext& ctx);
ForwardTrace forward(const ModelWeights& w, const Graph& g);

/// Closed-form bound on max_i |H_j[i,:]|₂ from B, d and the weight norms.
/// GCN: d^{j/2} B ∏_{i≤j} ‖W_i‖₂. MPGNN: κ Σ_{i<j} τⁱ with κ = C_φ B ‖W1‖₂,
/// τ = d C_φ C_ρ C_g ‖W2‖₂ (0 at j = 0).
double phi_upper_bound(const ModelWeights& w, const DatasetStats& stats, std::size_t j);

// ---- checkpoint JSON ----
// {"model":"gcn"|"mpgnn","l","h","k","h0","acts":{"phi","rho","g"},
//  "weights":{"W1":[[...]], ...}}  GCN keys W1..W<l>; MPGNN keys W1, W2, Wl.

nlohmann::json checkpoint_to_json(const ModelWeights& w);
ModelWeights checkpoint_from_json(const nlohmann::json& j);
void write_checkpoint(const ModelWeights& w, const std::filesystem::path& path);
ModelWeights read_checkpoint(const std::filesystem::path& path);

}  // namespace gnncert
