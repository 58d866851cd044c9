#include "gnncert/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace gnncert {

bool margin_violated(const Matrix& logits, int label, double gamma) {
  const auto y = static_cast<std::size_t>(label);
  if (y >= logits.cols()) throw DimensionError("margin: label outside logit range");
  double best_other = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.cols(); ++j)
    if (j != y) best_other = std::max(best_other, logits(0, j));
  return logits(0, y) <= gamma + best_other;
}

double margin_loss(const ModelWeights& w, const Dataset& s, double gamma) {
  if (!(gamma >= 0.0)) throw ConfigError("margin_loss: gamma must be >= 0");
  if (s.graphs.empty()) throw ConfigError("margin_loss: empty dataset");
  std::size_t violations = 0;
  for (const Graph& g : s.graphs)
    if (margin_violated(forward(w, g).logits, g.label, gamma)) ++violations;
  return static_cast<double>(violations) / static_cast<double>(s.graphs.size());
}

double cross_entropy(const Matrix& logits, int label) {
  const auto y = static_cast<std::size_t>(label);
  if (y >= logits.cols()) throw DimensionError("cross_entropy: label outside logit range");
  double mx = -std::numeric_limits<double>::infinity();
  for (double z : logits.row(0)) mx = std::max(mx, z);
  double s = 0.0;
  for (double z : logits.row(0)) s += std::exp(z - mx);
  return mx + std::log(s) - logits(0, y);
}

namespace {

/// d loss / d logits = softmax − onehot.
Matrix logit_gradient(const Matrix& logits, int label) {
  Matrix g(1, logits.cols());
  double mx = -std::numeric_limits<double>::infinity();
  for (double z : logits.row(0)) mx = std::max(mx, z);
  double s = 0.0;
  for (std::size_t j = 0; j < logits.cols(); ++j) s += (g(0, j) = std::exp(logits(0, j) - mx));
  for (std::size_t j = 0; j < logits.cols(); ++j) g(0, j) /= s;
  g(0, static_cast<std::size_t>(label)) -= 1.0;
  return g;
}

/// Gradient w.r.t. H_{l−1} of the mean readout: every row equals
/// (1/n) · dlogits · Wlᵀ.
Matrix readout_backward(const Matrix& dlogits, const Matrix& wl, std::size_t n) {
  const Matrix row = matmul_nt(dlogits, wl);
  Matrix dh(n, row.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < row.cols(); ++c) dh(i, c) = row(0, c) * inv_n;
  return dh;
}

BackpropResult gcn_backprop(const GcnWeights& w, const GraphContext& ctx, int target) {
  const ForwardTrace tr = gcn_forward(w, ctx);
  const std::size_t l = w.layers();
  const std::size_t n = ctx.graph->n;

  BackpropResult out;
  out.loss = cross_entropy(tr.logits, target);
  out.logits = tr.logits;
  GcnWeights grads;
  grads.W.resize(l);

  const Matrix dlogits = logit_gradient(tr.logits, target);
  grads.W[l - 1] = matmul_tn(tr.pooled, dlogits);
  Matrix dh = readout_backward(dlogits, w.W[l - 1], n);

  for (std::size_t k = l - 1; k >= 1; --k) {
    // H_k = ReLU(Z_k), Z_k = (L̃ H_{k−1}) W_k; trace index k−1.
    Matrix dz = hadamard(dh, kReLU.derivative(tr.pre[k - 1]));
    grads.W[k - 1] = matmul_tn(tr.propagated[k - 1], dz);
    if (k > 1) dh = laplacian_apply(ctx, matmul_nt(dz, w.W[k - 1]));  // L̃ symmetric
  }
  out.grads = std::move(grads);
  return out;
}

BackpropResult mpgnn_backprop(const MpgnnWeights& w, const GraphContext& ctx, int target) {
  const ForwardTrace tr = mpgnn_forward(w, ctx);
  const Graph& g = *ctx.graph;

  BackpropResult out;
  out.loss = cross_entropy(tr.logits, target);
  out.logits = tr.logits;
  MpgnnWeights grads = w;
  grads.W1 = Matrix(w.W1.rows(), w.W1.cols());
  grads.W2 = Matrix(w.W2.rows(), w.W2.cols());

  const Matrix dlogits = logit_gradient(tr.logits, target);
  grads.Wl = matmul_tn(tr.pooled, dlogits);
  Matrix dh = readout_backward(dlogits, w.Wl, g.n);

  for (std::size_t k = w.l - 1; k >= 1; --k) {
    // H_k = φ(P_k), P_k = X W1 + ρ(M̄_k) W2, M̄_k = Σ_{u∈N(v)} g(H_{k−1}[u]).
    const Matrix dp = hadamard(dh, w.phi.derivative(tr.pre[k - 1]));
    grads.W1 += matmul_tn(g.features, dp);
    const Matrix& msg = tr.messages[k - 1];
    grads.W2 += matmul_tn(w.rho.apply(msg), dp);
    if (k == 1) break;  // H₀ = 0 is constant
    const Matrix dmsg = hadamard(matmul_nt(dp, w.W2), w.rho.derivative(msg));
    // Adjacency aggregation is symmetric, so its adjoint is itself.
    Matrix dgh(g.n, dmsg.cols());
    for (std::size_t u = 0; u < g.n; ++u) {
      auto dst = dgh.row(u);
      for (std::size_t v : ctx.neighbors[u]) {
        const auto src = dmsg.row(v);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
      }
    }
    dh = hadamard(dgh, w.g.derivative(tr.hidden[k - 1]));
  }
  out.grads = std::move(grads);
  return out;
}

}  // namespace

BackpropResult backprop(const ModelWeights& w, const GraphContext& ctx, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= num_classes_of(w))
    throw DimensionError("backprop: target label outside class range");
  if (const auto* gcn = std::get_if<GcnWeights>(&w)) return gcn_backprop(*gcn, ctx, target);
  return mpgnn_backprop(std::get<MpgnnWeights>(w), ctx, target);
}

BackpropResult backprop(const ModelWeights& w, const Graph& g, int target) {
  const GraphContext ctx(g);
  return backprop(w, ctx, target);
}

std::vector<Matrix*> parameters(ModelWeights& w) {
  std::vector<Matrix*> out;
  if (auto* gcn = std::get_if<GcnWeights>(&w)) {
    for (Matrix& m : gcn->W) out.push_back(&m);
  } else {
    auto& m = std::get<MpgnnWeights>(w);
    out = {&m.W1, &m.W2, &m.Wl};
  }
  return out;
}

std::vector<const Matrix*> parameters(const ModelWeights& w) {
  std::vector<const Matrix*> out;
  for (Matrix* p : parameters(const_cast<ModelWeights&>(w))) out.push_back(p);
  return out;
}

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning rate must be positive");
}

void Adam::step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads) {
  if (params.size() != grads.size()) throw DimensionError("adam: params/grads count mismatch");
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto g = grads[i]->data();
    auto m = m_[i].data();
    auto v = v_[i].data();
    if (p.size() != g.size() || p.size() != m.size())
      throw DimensionError("adam: gradient shape differs from parameter shape");
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      p[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_);
    }
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be positive");
  if (depth < 2) throw ConfigError("train: depth must be > 1");
  if (hidden < 1) throw ConfigError("train: hidden width must be >= 1");
  if (!(gamma >= 0.0)) throw ConfigError("train: gamma must be >= 0");
}

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,train_ce,train_margin_loss,test_error\n";
  for (std::size_t e = 0; e < train_ce.size(); ++e) {
    os << e + 1 << ',' << train_ce[e] << ',' << train_margin_loss[e] << ',';
    if (!std::isnan(test_error[e])) os << test_error[e];
    os << '\n';
  }
  return os.str();
}

TrainResult train(const Dataset& s, const TrainConfig& cfg, ModelKind kind) {
  cfg.validate();
  s.validate();

  TrainResult res;
  res.split = split_dataset(s, cfg.train_fraction, cfg.split_seed);
  if (res.split.train.empty()) throw ConfigError("train: empty train split");

  const CounterRng root(cfg.seed);
  CounterRng init_rng = root.split(1);
  res.weights = init_model(kind, s.feature_dim, cfg.hidden, static_cast<std::size_t>(s.num_classes),
                           cfg.depth, init_rng);

  std::vector<GraphContext> train_ctx, test_ctx;
  for (std::size_t i : res.split.train) train_ctx.emplace_back(s.graphs[i]);
  for (std::size_t i : res.split.test) test_ctx.emplace_back(s.graphs[i]);

  Adam adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps);
  std::vector<std::size_t> order(train_ctx.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle = root.split(2).split(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double ce_sum = 0.0;
    std::size_t violated = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<Matrix> acc;
      for (std::size_t b = start; b < end; ++b) {
        const GraphContext& ctx = train_ctx[order[b]];
        BackpropResult r = backprop(res.weights, ctx, ctx.graph->label);
        if (!std::isfinite(r.loss)) {
          throw DivergenceError("train: non-finite loss in epoch " + std::to_string(epoch + 1),
                                epoch + 1);
        }
        ce_sum += r.loss;
        if (margin_violated(r.logits, ctx.graph->label, cfg.gamma)) ++violated;
        const auto gp = parameters(r.grads);
        if (acc.empty()) {
          for (const Matrix* g : gp) acc.push_back(*g);
        } else {
          for (std::size_t p = 0; p < gp.size(); ++p) acc[p] += *gp[p];
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      std::vector<const Matrix*> grads;
      for (Matrix& a : acc) {
        a *= inv;
        grads.push_back(&a);
      }
      adam.step(parameters(res.weights), grads);
    }

    const auto m = static_cast<double>(order.size());
    res.history.train_ce.push_back(ce_sum / m);
    res.history.train_margin_loss.push_back(static_cast<double>(violated) / m);
    if (test_ctx.empty()) {
      res.history.test_error.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      std::size_t wrong = 0;
      for (const GraphContext& ctx : test_ctx)
        if (margin_violated(forward(res.weights, ctx).logits, ctx.graph->label, 0.0)) ++wrong;
      res.history.test_error.push_back(static_cast<double>(wrong) /
                                       static_cast<double>(test_ctx.size()));
    }
  }
  res.adam_steps = adam.steps();
  return res;
}

}  // namespace gnncert
