#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gnncert/graph.hpp"
#include "gnncert/model.hpp"

namespace gnncert {

/// Fraction of samples whose true-class logit does not exceed every other
/// logit by more than gamma: (1/m) Σ 1[f[y] ≤ γ + max_{j≠y} f[j]].
/// gamma = 0 gives the 0-1 error.
double margin_loss(const ModelWeights& w, const Dataset& s, double gamma);
bool margin_violated(const Matrix& logits, int label, double gamma);

/// Softmax cross-entropy of a 1×K logit row against `label`.
double cross_entropy(const Matrix& logits, int label);

struct BackpropResult {
  double loss = 0.0;
  ModelWeights grads;  // same shapes as the weights
  Matrix logits;
};

/// Cross-entropy loss and its exact gradient with respect to every weight
/// matrix (ReLU subgradient 0 at 0).
BackpropResult backprop(const ModelWeights& w, const GraphContext& ctx, int target);
BackpropResult backprop(const ModelWeights& w, const Graph& g, int target);

/// Weight matrices in a fixed order: GCN W1..Wl; MPGNN W1, W2, Wl.
std::vector<Matrix*> parameters(ModelWeights& w);
std::vector<const Matrix*> parameters(const ModelWeights& w);

class Adam {
 public:
  Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// One bias-corrected update; moment buffers are created on first use.
  void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);
  long steps() const noexcept { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 128;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
  std::size_t depth = 2;
  std::size_t hidden = 128;
  double gamma = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// The train/test split depends on split_seed only, so every training seed
  /// sees the same split.
  double train_fraction = 0.9;
  std::uint64_t split_seed = 0;

  void validate() const;
};

/// Per-epoch curves. Train cross-entropy and margin loss are running values
/// over the forward passes made during the epoch; test error is the 0-1 error
/// on the held-out split after the epoch.
struct TrainHistory {
  std::vector<double> train_ce;
  std::vector<double> train_margin_loss;
  std::vector<double> test_error;

  std::string to_csv() const;
};

struct TrainResult {
  ModelWeights weights;
  TrainHistory history;
  Split split;
  long adam_steps = 0;
};

/// Minibatch Adam on the train split of `s`. Deterministic in cfg.seed:
/// initialization, shuffle order and batch partition all derive from it.
/// Throws DivergenceError when a loss becomes non-finite.
TrainResult train(const Dataset& s, const TrainConfig& cfg, ModelKind kind);

}  // namespace gnncert
