#include "gnncert/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gnncert/dataset_io.hpp"
#include "gnncert/series.hpp"

namespace gnncert {

using nlohmann::json;

double Activation::apply(double x) const noexcept {
  switch (kind) {
    case ActivationKind::ReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Identity:
      return x;
    case ActivationKind::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

double Activation::derivative(double x) const noexcept {
  switch (kind) {
    case ActivationKind::ReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Identity:
      return 1.0;
    case ActivationKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

Matrix Activation::apply(const Matrix& m) const {
  Matrix out = m;
  if (kind == ActivationKind::Identity) return out;
  for (double& x : out.data()) x = apply(x);
  return out;
}

Matrix Activation::derivative(const Matrix& pre) const {
  Matrix out = pre;
  for (double& x : out.data()) x = derivative(x);
  return out;
}

std::string Activation::name() const {
  switch (kind) {
    case ActivationKind::ReLU:
      return "relu";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Identity:
      return "identity";
    case ActivationKind::Sigmoid:
      return "sigmoid";
  }
  return "?";
}

Activation Activation::parse(const std::string& name) {
  if (name == "relu") return kReLU;
  if (name == "tanh") return kTanh;
  if (name == "identity") return kIdentity;
  if (name == "sigmoid") return kSigmoid;
  throw ConfigError("unknown activation '" + name + "' (relu, tanh, identity, sigmoid)");
}

std::string to_string(ModelKind k) { return k == ModelKind::Gcn ? "gcn" : "mpgnn"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "gcn") return ModelKind::Gcn;
  if (s == "mpgnn") return ModelKind::Mpgnn;
  throw ConfigError("unknown model '" + s + "' (gcn, mpgnn)");
}

std::size_t GcnWeights::max_dim() const {
  std::size_t h = 0;
  for (const Matrix& m : W) h = std::max({h, m.rows(), m.cols()});
  return h;
}

void GcnWeights::validate() const {
  if (W.size() < 2) throw ConfigError("gcn: needs l > 1 layers");
  for (std::size_t k = 0; k < W.size(); ++k) {
    if (W[k].empty()) throw DimensionError("gcn: layer " + std::to_string(k + 1) + " is empty");
    if (!W[k].all_finite())
      throw ConfigError("gcn: layer " + std::to_string(k + 1) + " has non-finite entries");
    if (k > 0 && W[k - 1].cols() != W[k].rows()) {
      std::ostringstream os;
      os << "gcn: layer " << k + 1 << " expects " << W[k].rows() << " inputs but layer " << k
         << " produces " << W[k - 1].cols();
      throw DimensionError(os.str());
    }
  }
}

std::size_t MpgnnWeights::max_dim() const {
  return std::max({W1.rows(), W1.cols(), W2.rows(), W2.cols(), Wl.rows(), Wl.cols()});
}

void MpgnnWeights::validate() const {
  if (l < 2) throw ConfigError("mpgnn: needs l > 1 steps");
  const std::size_t h = W2.rows();
  if (W1.empty() || W2.empty() || Wl.empty()) throw DimensionError("mpgnn: empty weight matrix");
  if (W2.cols() != h) throw DimensionError("mpgnn: W2 must be h x h");
  if (W1.cols() != h) throw DimensionError("mpgnn: W1 must be h0 x h");
  if (Wl.rows() != h) throw DimensionError("mpgnn: Wl must be h x K");
  if (!W1.all_finite() || !W2.all_finite() || !Wl.all_finite())
    throw ConfigError("mpgnn: non-finite weight entries");
  for (const Activation* a : {&phi, &rho, &g}) {
    if (!a->zero_preserving())
      throw ConfigError("mpgnn: activation '" + a->name() + "' does not map 0 to 0");
  }
}

ModelKind kind_of(const ModelWeights& w) {
  return std::holds_alternative<GcnWeights>(w) ? ModelKind::Gcn : ModelKind::Mpgnn;
}

std::size_t depth_of(const ModelWeights& w) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GcnWeights>)
          return m.layers();
        else
          return m.l;
      },
      w);
}

std::size_t num_classes_of(const ModelWeights& w) {
  return std::visit([](const auto& m) { return m.num_classes(); }, w);
}

std::size_t input_dim_of(const ModelWeights& w) {
  return std::visit([](const auto& m) { return m.input_dim(); }, w);
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, CounterRng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform(-a, a);
  return m;
}

GcnWeights init_gcn(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                    std::size_t classes, CounterRng& rng) {
  GcnWeights w;
  std::size_t prev = input_dim;
  for (std::size_t width : hidden) {
    w.W.push_back(glorot_uniform(prev, width, rng));
    prev = width;
  }
  w.W.push_back(glorot_uniform(prev, classes, rng));
  w.validate();
  return w;
}

MpgnnWeights init_mpgnn(std::size_t input_dim, std::size_t hidden, std::size_t classes,
                        std::size_t steps, CounterRng& rng, Activation phi, Activation rho,
                        Activation g) {
  MpgnnWeights w;
  w.l = steps;
  w.W1 = glorot_uniform(input_dim, hidden, rng);
  w.W2 = glorot_uniform(hidden, hidden, rng);
  w.Wl = glorot_uniform(hidden, classes, rng);
  w.phi = phi;
  w.rho = rho;
  w.g = g;
  w.validate();
  return w;
}

ModelWeights init_model(ModelKind kind, std::size_t input_dim, std::size_t hidden,
                        std::size_t classes, std::size_t depth, CounterRng& rng) {
  if (depth < 2) throw ConfigError("model depth must be > 1");
  if (kind == ModelKind::Gcn)
    return init_gcn(input_dim, std::vector<std::size_t>(depth - 1, hidden), classes, rng);
  return init_mpgnn(input_dim, hidden, classes, depth, rng);
}

GraphContext::GraphContext(const Graph& g) : graph(&g), neighbors(g.adjacency_lists()) {
  std::vector<double> inv_sqrt(g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(neighbors[i].size() + 1));
  laplacian_self.resize(g.n);
  laplacian_edge.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    laplacian_self[i] = inv_sqrt[i] * inv_sqrt[i];
    for (std::size_t u : neighbors[i]) laplacian_edge[i].push_back(inv_sqrt[i] * inv_sqrt[u]);
  }
}

Matrix laplacian_apply(const GraphContext& ctx, const Matrix& m) {
  const std::size_t n = ctx.neighbors.size();
  if (m.rows() != n) throw DimensionError("laplacian_apply: row count != node count");
  Matrix out(n, m.cols());
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = out.row(i);
    const auto self = m.row(i);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = ctx.laplacian_self[i] * self[c];
    for (std::size_t t = 0; t < ctx.neighbors[i].size(); ++t) {
      const double w = ctx.laplacian_edge[i][t];
      const auto src = m.row(ctx.neighbors[i][t]);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

Matrix aggregate_adjacency(const GraphContext& ctx, const Matrix& h, const Activation& act) {
  const std::size_t n = ctx.neighbors.size();
  if (h.rows() != n) throw DimensionError("aggregate_adjacency: row count != node count");
  const Matrix msg = act.apply(h);
  Matrix out(n, h.cols());
  for (std::size_t v = 0; v < n; ++v) {
    auto dst = out.row(v);
    for (std::size_t u : ctx.neighbors[v]) {
      const auto src = msg.row(u);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
  return out;
}

Matrix aggregate_incidence(const Incidence& inc, const Matrix& h, const Activation& act) {
  if (inc.in.cols() == 0) return Matrix(h.rows(), h.cols());
  return matmul(inc.in, act.apply(matmul_tn(inc.out, h)));
}

namespace {

void require_features(const Graph& g, std::size_t expected, const char* model) {
  if (g.features.cols() != expected) {
    std::ostringstream os;
    os << model << ": layer 1 expects feature width " << expected << ", graph has "
       << g.features.cols();
    throw DimensionError(os.str());
  }
}

}  // namespace

ForwardTrace gcn_forward(const GcnWeights& w, const GraphContext& ctx) {
  w.validate();
  const Graph& g = *ctx.graph;
  require_features(g, w.input_dim(), "gcn");
  const std::size_t l = w.layers();

  ForwardTrace tr;
  tr.hidden.reserve(l);
  tr.hidden.push_back(g.features);
  for (std::size_t k = 1; k < l; ++k) {
    tr.propagated.push_back(laplacian_apply(ctx, tr.hidden.back()));
    tr.pre.push_back(matmul(tr.propagated.back(), w.W[k - 1]));
    tr.hidden.push_back(kReLU.apply(tr.pre.back()));
  }
  tr.pooled = row_mean(tr.hidden.back());
  tr.logits = matmul(tr.pooled, w.W.back());
  return tr;
}

ForwardTrace gcn_forward(const GcnWeights& w, const Graph& g) {
  const GraphContext ctx(g);
  return gcn_forward(w, ctx);
}

ForwardTrace mpgnn_forward(const MpgnnWeights& w, const GraphContext& ctx) {
  w.validate();
  const Graph& g = *ctx.graph;
  require_features(g, w.input_dim(), "mpgnn");

  ForwardTrace tr;
  tr.hidden.reserve(w.l);
  tr.hidden.emplace_back(g.n, w.hidden());
  const Matrix xw = matmul(g.features, w.W1);
  for (std::size_t k = 1; k < w.l; ++k) {
    tr.messages.push_back(aggregate_adjacency(ctx, tr.hidden.back(), w.g));
    Matrix pre = xw;
    pre += matmul(w.rho.apply(tr.messages.back()), w.W2);
    tr.hidden.push_back(w.phi.apply(pre));
    tr.pre.push_back(std::move(pre));
  }
  tr.pooled = row_mean(tr.hidden.back());
  tr.logits = matmul(tr.pooled, w.Wl);
  return tr;
}

ForwardTrace mpgnn_forward(const MpgnnWeights& w, const Graph& g) {
  const GraphContext ctx(g);
  return mpgnn_forward(w, ctx);
}

ForwardTrace forward(const ModelWeights& w, const GraphContext& ctx) {
  return std::visit(
      [&](const auto& m) -> ForwardTrace {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GcnWeights>)
          return gcn_forward(m, ctx);
        else
          return mpgnn_forward(m, ctx);
      },
      w);
}

ForwardTrace forward(const ModelWeights& w, const Graph& g) {
  const GraphContext ctx(g);
  return forward(w, ctx);
}

double phi_upper_bound(const ModelWeights& w, const DatasetStats& stats, std::size_t j) {
  if (j >= depth_of(w)) throw ConfigError("phi_upper_bound: step must be < l");
  if (const auto* gcn = std::get_if<GcnWeights>(&w)) {
    double bound = stats.B;
    for (std::size_t i = 0; i < j; ++i) bound *= std::sqrt(stats.d) * spectral_norm(gcn->W[i]);
    return bound;
  }
  const auto& m = std::get<MpgnnWeights>(w);
  if (j == 0) return 0.0;
  const double kappa = m.phi.lipschitz() * stats.B * spectral_norm(m.W1);
  const double tau = stats.d * m.phi.lipschitz() * m.rho.lipschitz() * m.g.lipschitz() *
                     spectral_norm(m.W2);
  return kappa * geometric_partial_sum(tau, j);
}

// ---- checkpoint ----

json checkpoint_to_json(const ModelWeights& w) {
  json j;
  j["model"] = to_string(kind_of(w));
  j["l"] = depth_of(w);
  j["k"] = num_classes_of(w);
  j["h0"] = input_dim_of(w);
  if (const auto* gcn = std::get_if<GcnWeights>(&w)) {
    j["h"] = gcn->max_dim();
    j["acts"] = {{"phi", "relu"}, {"rho", "identity"}, {"g", "identity"}};
    json ws = json::object();
    for (std::size_t k = 0; k < gcn->W.size(); ++k)
      ws["W" + std::to_string(k + 1)] = matrix_to_json(gcn->W[k]);
    j["weights"] = std::move(ws);
  } else {
    const auto& m = std::get<MpgnnWeights>(w);
    j["h"] = m.hidden();
    j["acts"] = {{"phi", m.phi.name()}, {"rho", m.rho.name()}, {"g", m.g.name()}};
    j["weights"] = {{"W1", matrix_to_json(m.W1)},
                    {"W2", matrix_to_json(m.W2)},
                    {"Wl", matrix_to_json(m.Wl)}};
  }
  return j;
}

ModelWeights checkpoint_from_json(const json& j) {
  try {
    const ModelKind kind = parse_model_kind(j.at("model").get<std::string>());
    const auto l = j.at("l").get<std::size_t>();
    const auto& ws = j.at("weights");
    if (kind == ModelKind::Gcn) {
      if (j.at("acts").at("phi").get<std::string>() != "relu")
        throw FormatError("checkpoint: GCN hidden layers must use relu");
      GcnWeights w;
      for (std::size_t k = 1; k <= l; ++k) w.W.push_back(matrix_from_json(ws.at("W" + std::to_string(k))));
      w.validate();
      return w;
    }
    MpgnnWeights w;
    w.l = l;
    w.W1 = matrix_from_json(ws.at("W1"));
    w.W2 = matrix_from_json(ws.at("W2"));
    w.Wl = matrix_from_json(ws.at("Wl"));
    w.phi = Activation::parse(j.at("acts").at("phi").get<std::string>());
    w.rho = Activation::parse(j.at("acts").at("rho").get<std::string>());
    w.g = Activation::parse(j.at("acts").at("g").get<std::string>());
    w.validate();
    return w;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint json: ") + e.what());
  }
}

void write_checkpoint(const ModelWeights& w, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_json(w).dump() + "\n");
}

ModelWeights read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace gnncert
