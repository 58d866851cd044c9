#include "gnncert/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace gnncert {

void Graph::validate() const {
  if (n == 0) throw FormatError("graph: no nodes");
  if (features.rows() != n) {
    std::ostringstream os;
    os << "graph: feature rows " << features.rows() << " != node count " << n;
    throw FormatError(os.str());
  }
  if (!features.all_finite()) throw FormatError("graph: non-finite feature entry");
  std::set<Edge> seen;
  for (const auto& [u, v] : edges) {
    if (!(u < v && v < n)) {
      std::ostringstream os;
      os << "graph: edge (" << u << "," << v << ") violates 0 <= u < v < n=" << n;
      throw FormatError(os.str());
    }
    if (!seen.insert({u, v}).second) {
      std::ostringstream os;
      os << "graph: duplicate edge (" << u << "," << v << ")";
      throw FormatError(os.str());
    }
  }
  if (label < 0) throw FormatError("graph: negative label");
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

std::vector<std::vector<std::size_t>> Graph::adjacency_lists() const {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

std::vector<Edge> canonical_edges(const std::vector<Edge>& raw) {
  std::set<Edge> out;
  for (auto [u, v] : raw) {
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    out.insert({u, v});
  }
  return {out.begin(), out.end()};
}

void Dataset::validate() const {
  if (graphs.empty()) throw FormatError("dataset '" + name + "' has no graphs");
  if (num_classes < 1) throw FormatError("dataset: num_classes must be >= 1");
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Graph& g = graphs[i];
    try {
      g.validate();
    } catch (const FormatError& e) {
      throw FormatError("graph " + std::to_string(i) + ": " + e.what());
    }
    if (g.features.cols() != feature_dim) {
      throw FormatError("graph " + std::to_string(i) + ": feature width " +
                        std::to_string(g.features.cols()) + " != feature_dim " +
                        std::to_string(feature_dim));
    }
    if (g.label >= num_classes) {
      throw FormatError("graph " + std::to_string(i) + ": label out of range");
    }
  }
}

DatasetStats graph_stats(const Graph& g) {
  DatasetStats st;
  st.m = 1;
  st.max_nodes = g.n;
  st.B = max_row_norm(g.features);
  const auto deg = g.degrees();
  const std::size_t max_deg = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  st.d = static_cast<double>(max_deg + 1);
  return st;
}

DatasetStats dataset_stats(const Dataset& s) {
  if (s.graphs.empty()) throw ConfigError("dataset_stats: empty dataset");
  DatasetStats st;
  st.m = s.graphs.size();
  for (const Graph& g : s.graphs) {
    const DatasetStats gs = graph_stats(g);
    st.B = std::max(st.B, gs.B);
    st.d = std::max(st.d, gs.d);
    st.max_nodes = std::max(st.max_nodes, gs.max_nodes);
  }
  return st;
}

Matrix normalized_laplacian(const Graph& g) {
  Matrix L(g.n, g.n);
  const auto deg = g.degrees();
  std::vector<double> inv_sqrt(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(deg[i] + 1));
    L(i, i) = inv_sqrt[i] * inv_sqrt[i];
  }
  for (const auto& [u, v] : g.edges) {
    const double w = inv_sqrt[u] * inv_sqrt[v];
    L(u, v) = w;
    L(v, u) = w;
  }
  return L;
}

Incidence incidence_matrices(const Graph& g) {
  const std::size_t c = 2 * g.edges.size();
  Incidence inc{Matrix(g.n, c), Matrix(g.n, c)};
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto [u, v] = g.edges[k];
    // u → v
    inc.out(u, 2 * k) = 1.0;
    inc.in(v, 2 * k) = 1.0;
    // v → u
    inc.out(v, 2 * k + 1) = 1.0;
    inc.in(u, 2 * k + 1) = 1.0;
  }
  return inc;
}

Split split_dataset(const Dataset& s, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("split_dataset: train_fraction must be in (0, 1]");
  }
  const std::size_t m = s.graphs.size();
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  CounterRng rng = CounterRng(seed).split(0x5711);
  for (std::size_t i = m; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(m)));
  Split sp;
  sp.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  sp.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(sp.train.begin(), sp.train.end());
  std::sort(sp.test.begin(), sp.test.end());
  return sp;
}

Dataset subset(const Dataset& s, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.name = s.name;
  out.num_classes = s.num_classes;
  out.feature_dim = s.feature_dim;
  out.graphs.reserve(indices.size());
  for (std::size_t i : indices) out.graphs.push_back(s.graphs.at(i));
  return out;
}

Dataset append_ones_feature(Dataset s) {
  for (Graph& g : s.graphs) {
    Matrix f(g.n, s.feature_dim + 1, 1.0);
    for (std::size_t i = 0; i < g.n; ++i)
      for (std::size_t j = 0; j < s.feature_dim; ++j) f(i, j) = g.features(i, j);
    g.features = std::move(f);
  }
  s.feature_dim += 1;
  return s;
}

}  // namespace gnncert
