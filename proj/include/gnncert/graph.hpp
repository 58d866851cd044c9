#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gnncert/matrix.hpp"
#include "gnncert/rng.hpp"

namespace gnncert {

/// Undirected edge stored with u < v.
using Edge = std::pair<std::size_t, std::size_t>;

/// One labeled sample z = (A, X, y): a simple undirected graph with node
/// features and a class label.
struct Graph {
  std::size_t n = 0;
  std::vector<Edge> edges;
  Matrix features;  // n × h₀
  int label = 0;

  /// Throws FormatError unless the graph is simple (u < v < n, no duplicates)
  /// and the feature matrix has n finite rows.
  void validate() const;

  std::vector<std::size_t> degrees() const;
  /// Sorted neighbor lists.
  std::vector<std::vector<std::size_t>> adjacency_lists() const;
};

/// Builds a simple graph from arbitrary pairs: orients u < v, drops self-loops
/// and duplicates.
std::vector<Edge> canonical_edges(const std::vector<Edge>& raw);

struct Dataset {
  std::string name;
  int num_classes = 2;
  std::size_t feature_dim = 0;
  std::vector<Graph> graphs;

  void validate() const;
  std::size_t size() const noexcept { return graphs.size(); }
};

struct DatasetStats {
  double B = 0.0;             // max node-feature ℓ2 norm
  double d = 1.0;             // max node degree + 1
  std::size_t m = 0;          // sample count
  std::size_t max_nodes = 0;
};

DatasetStats dataset_stats(const Dataset& s);
/// Stats of a single graph (m = 1).
DatasetStats graph_stats(const Graph& g);

/// D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I.
Matrix normalized_laplacian(const Graph& g);

struct Incidence {
  Matrix in;   // n × c, in[v, e] = 1 when directed edge e points into v
  Matrix out;  // n × c, out[u, e] = 1 when directed edge e leaves u
};

/// Each undirected edge {u, v} becomes the directed pair u→v, v→u (columns
/// 2k and 2k+1). No self-loops are added.
Incidence incidence_matrices(const Graph& g);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded permutation split; the first round(train_fraction·m) permuted
/// indices form the training set. Both index lists are returned sorted.
Split split_dataset(const Dataset& s, double train_fraction, std::uint64_t seed);
Dataset subset(const Dataset& s, const std::vector<std::size_t>& indices);

/// Appends a constant-one feature column to every graph (bias absorption).
Dataset append_ones_feature(Dataset s);

// ---- synthetic generators ----

Graph gen_erdos_renyi(std::size_t n, double p, CounterRng& rng);
/// Nodes are assigned to blocks contiguously in the order of `sizes`.
Graph gen_sbm(const std::vector<std::size_t>& sizes, const Matrix& probs, CounterRng& rng);
/// Rows i.i.d. standard Gaussian rescaled to unit ℓ2 norm.
Matrix gen_features(std::size_t n, std::size_t dim, CounterRng& rng);

struct SyntheticSpec {
  enum class Kind { ErdosRenyi, BlockModel };

  std::string name;
  Kind kind = Kind::ErdosRenyi;
  std::size_t nodes = 100;
  double p = 0.1;                   // ErdosRenyi
  std::vector<std::size_t> sizes;   // BlockModel
  Matrix probs;                     // BlockModel
  std::size_t num_graphs = 200;
  std::size_t feature_dim = 16;
  int num_classes = 2;

  void validate() const;
};

/// ER-1..ER-4, SBM-1, SBM-2.
std::vector<std::string> preset_names();
/// Throws ConfigError listing the presets for an unknown name.
SyntheticSpec preset(const std::string& name);

/// Graph i draws from CounterRng(seed).split(i), with separate child streams
/// for edges, features and the label.
Dataset gen_dataset(const SyntheticSpec& spec, std::uint64_t seed);
Dataset gen_dataset(const std::string& preset_name, std::uint64_t seed);

}  // namespace gnncert
