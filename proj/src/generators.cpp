#include <cmath>
#include <sstream>

#include "gnncert/graph.hpp"

namespace gnncert {

namespace {

constexpr std::uint64_t kEdgeStream = 1;
constexpr std::uint64_t kFeatureStream = 2;
constexpr std::uint64_t kLabelStream = 3;

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + ": probability outside [0, 1]");
}

}  // namespace

Graph gen_erdos_renyi(std::size_t n, double p, CounterRng& rng) {
  require_probability(p, "gen_erdos_renyi");
  Graph g;
  g.n = n;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.edges.emplace_back(u, v);
  g.features = Matrix(n, 0);
  return g;
}

Graph gen_sbm(const std::vector<std::size_t>& sizes, const Matrix& probs, CounterRng& rng) {
  const std::size_t k = sizes.size();
  if (probs.rows() != k || probs.cols() != k) {
    throw ConfigError("gen_sbm: probs must be a square matrix matching the block count");
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      require_probability(probs(a, b), "gen_sbm");
      if (probs(a, b) != probs(b, a)) throw ConfigError("gen_sbm: probs must be symmetric");
    }
  }
  std::vector<std::size_t> block;
  for (std::size_t b = 0; b < k; ++b) block.insert(block.end(), sizes[b], b);

  Graph g;
  g.n = block.size();
  for (std::size_t u = 0; u < g.n; ++u)
    for (std::size_t v = u + 1; v < g.n; ++v)
      if (rng.bernoulli(probs(block[u], block[v]))) g.edges.emplace_back(u, v);
  g.features = Matrix(g.n, 0);
  return g;
}

Matrix gen_features(std::size_t n, std::size_t dim, CounterRng& rng) {
  if (dim == 0) throw ConfigError("gen_features: dim must be >= 1");
  Matrix x(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    double norm = 0.0;
    while (norm == 0.0) {
      double s = 0.0;
      for (double& v : row) {
        v = rng.normal();
        s += v * v;
      }
      norm = std::sqrt(s);
    }
    for (double& v : row) v /= norm;
  }
  return x;
}

void SyntheticSpec::validate() const {
  if (num_graphs == 0) throw ConfigError("synthetic spec: num_graphs must be >= 1");
  if (feature_dim == 0) throw ConfigError("synthetic spec: feature_dim must be >= 1");
  if (num_classes < 1) throw ConfigError("synthetic spec: num_classes must be >= 1");
  if (kind == Kind::ErdosRenyi) {
    require_probability(p, "synthetic spec");
    if (nodes == 0) throw ConfigError("synthetic spec: nodes must be >= 1");
  } else {
    std::size_t total = 0;
    for (std::size_t s : sizes) total += s;
    if (total != nodes) throw ConfigError("synthetic spec: block sizes must sum to nodes");
    if (probs.rows() != sizes.size() || probs.cols() != sizes.size()) {
      throw ConfigError("synthetic spec: probs shape does not match block count");
    }
  }
}

std::vector<std::string> preset_names() {
  return {"ER-1", "ER-2", "ER-3", "ER-4", "SBM-1", "SBM-2"};
}

SyntheticSpec preset(const std::string& name) {
  SyntheticSpec s;
  s.name = name;
  if (name == "ER-1" || name == "ER-2" || name == "ER-3" || name == "ER-4") {
    static constexpr double kP[] = {0.1, 0.3, 0.5, 0.7};
    s.kind = SyntheticSpec::Kind::ErdosRenyi;
    s.p = kP[name.back() - '1'];
    return s;
  }
  if (name == "SBM-1") {
    s.kind = SyntheticSpec::Kind::BlockModel;
    s.sizes = {40, 60};
    s.probs = Matrix{{0.25, 0.13}, {0.13, 0.37}};
    return s;
  }
  if (name == "SBM-2") {
    s.kind = SyntheticSpec::Kind::BlockModel;
    s.sizes = {25, 25, 50};
    s.probs = Matrix{{0.25, 0.05, 0.02}, {0.05, 0.35, 0.07}, {0.02, 0.07, 0.40}};
    return s;
  }
  std::ostringstream os;
  os << "unknown preset '" << name << "'; available presets:";
  for (const auto& p : preset_names()) os << ' ' << p;
  throw ConfigError(os.str());
}

Dataset gen_dataset(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Dataset ds;
  ds.name = spec.name;
  ds.num_classes = spec.num_classes;
  ds.feature_dim = spec.feature_dim;
  ds.graphs.reserve(spec.num_graphs);
  const CounterRng root(seed);
  for (std::size_t i = 0; i < spec.num_graphs; ++i) {
    const CounterRng graph_rng = root.split(i);
    CounterRng edge_rng = graph_rng.split(kEdgeStream);
    CounterRng feat_rng = graph_rng.split(kFeatureStream);
    CounterRng label_rng = graph_rng.split(kLabelStream);
    Graph g = spec.kind == SyntheticSpec::Kind::ErdosRenyi
                  ? gen_erdos_renyi(spec.nodes, spec.p, edge_rng)
                  : gen_sbm(spec.sizes, spec.probs, edge_rng);
    g.features = gen_features(g.n, spec.feature_dim, feat_rng);
    g.label = static_cast<int>(label_rng.below(static_cast<std::uint64_t>(spec.num_classes)));
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

Dataset gen_dataset(const std::string& preset_name, std::uint64_t seed) {
  return gen_dataset(preset(preset_name), seed);
}

}  // namespace gnncert
