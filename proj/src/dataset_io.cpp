#include "gnncert/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace gnncert {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t expect_cols) {
  if (!j.is_array()) throw FormatError("matrix: expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? expect_cols : j.front().size();
  if (expect_cols != 0 && cols != expect_cols)
    throw FormatError("matrix: expected " + std::to_string(expect_cols) + " columns, got " +
                      std::to_string(cols));
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& r : j) {
    if (!r.is_array() || r.size() != cols) throw FormatError("matrix: ragged or non-array row");
    for (const auto& x : r) {
      if (!x.is_number()) throw FormatError("matrix: non-numeric entry");
      data.push_back(x.get<double>());
    }
  }
  return Matrix(rows, cols, std::move(data));
}

nlohmann::json dataset_to_json(const Dataset& ds) {
  json graphs = json::array();
  for (const Graph& g : ds.graphs) {
    json edges = json::array();
    for (const auto& [u, v] : g.edges) edges.push_back({u, v});
    graphs.push_back({{"n", g.n},
                      {"edges", std::move(edges)},
                      {"features", matrix_to_json(g.features)},
                      {"label", g.label}});
  }
  return {{"name", ds.name},
          {"num_classes", ds.num_classes},
          {"feature_dim", ds.feature_dim},
          {"graphs", std::move(graphs)}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
  Dataset ds;
  try {
    ds.name = j.at("name").get<std::string>();
    ds.num_classes = j.at("num_classes").get<int>();
    ds.feature_dim = j.at("feature_dim").get<std::size_t>();
    for (const auto& jg : j.at("graphs")) {
      Graph g;
      g.n = jg.at("n").get<std::size_t>();
      for (const auto& e : jg.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw FormatError("edge must be a pair [u, v]");
        g.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
      }
      g.features = matrix_from_json(jg.at("features"), ds.feature_dim);
      g.label = jg.at("label").get<int>();
      ds.graphs.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset json: ") + e.what());
  }
  ds.validate();
  return ds;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_dataset(const Dataset& ds, const fs::path& path) {
  write_file_atomic(path, dataset_to_json(ds).dump() + "\n");
}

Dataset read_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return dataset_from_json(j);
}

// ---- TU format ----

namespace {

std::vector<std::vector<double>> read_numeric_lines(const fs::path& path, bool required) {
  std::vector<std::vector<double>> out;
  std::ifstream in(path);
  if (!in) {
    if (required) throw FormatError("missing TU file " + path.string());
    return out;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    std::vector<double> vals;
    double v;
    while (is >> v) vals.push_back(v);
    if (!is.eof()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    if (!vals.empty()) out.push_back(std::move(vals));
  }
  return out;
}

std::vector<long long> read_int_column(const fs::path& path, bool required) {
  std::vector<long long> out;
  for (const auto& row : read_numeric_lines(path, required)) {
    if (row.size() != 1) throw FormatError(path.string() + ": expected one value per line");
    out.push_back(static_cast<long long>(row[0]));
  }
  return out;
}

}  // namespace

Dataset load_tu_dataset(const fs::path& dir, const std::string& name, const TuOptions& opts) {
  const auto file = [&](const char* suffix) { return dir / (name + "_" + suffix + ".txt"); };

  const auto indicator = read_int_column(file("graph_indicator"), true);
  const auto graph_labels = read_int_column(file("graph_labels"), true);
  const auto adjacency = read_numeric_lines(file("A"), true);
  const auto node_labels = read_int_column(file("node_labels"), false);
  const auto node_attrs = read_numeric_lines(file("node_attributes"), false);

  const std::size_t total_nodes = indicator.size();
  const std::size_t num_graphs = graph_labels.size();
  if (total_nodes == 0 || num_graphs == 0) throw FormatError("TU dataset is empty");
  if (!node_labels.empty() && node_labels.size() != total_nodes)
    throw FormatError("node_labels length does not match graph_indicator");
  if (!node_attrs.empty() && node_attrs.size() != total_nodes)
    throw FormatError("node_attributes length does not match graph_indicator");

  // Global node id (0-based) -> (graph index, local index).
  std::vector<std::size_t> graph_of(total_nodes), local_of(total_nodes);
  std::vector<std::size_t> node_count(num_graphs, 0);
  for (std::size_t v = 0; v < total_nodes; ++v) {
    const long long gid = indicator[v];
    if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs)
      throw FormatError("graph_indicator references graph " + std::to_string(gid));
    graph_of[v] = static_cast<std::size_t>(gid - 1);
    local_of[v] = node_count[graph_of[v]]++;
  }

  std::map<long long, int> label_map;
  for (long long l : graph_labels) label_map.emplace(l, 0);
  int next = 0;
  for (auto& [_, idx] : label_map) idx = next++;

  std::map<long long, std::size_t> node_label_map;
  for (long long l : node_labels) node_label_map.emplace(l, 0);
  std::size_t nl = 0;
  for (auto& [_, idx] : node_label_map) idx = nl++;

  std::size_t feature_dim = 1;
  if (!node_attrs.empty()) {
    feature_dim = node_attrs.front().size();
  } else if (!node_labels.empty()) {
    feature_dim = node_label_map.size();
  }

  std::vector<Graph> graphs(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    graphs[g].n = node_count[g];
    graphs[g].features = Matrix(node_count[g], feature_dim, node_attrs.empty() && node_labels.empty() ? 1.0 : 0.0);
    graphs[g].label = label_map.at(graph_labels[g]);
  }
  for (std::size_t v = 0; v < total_nodes; ++v) {
    Graph& g = graphs[graph_of[v]];
    const std::size_t i = local_of[v];
    if (!node_attrs.empty()) {
      if (node_attrs[v].size() != feature_dim) throw FormatError("ragged node_attributes");
      for (std::size_t j = 0; j < feature_dim; ++j) g.features(i, j) = node_attrs[v][j];
    } else if (!node_labels.empty()) {
      g.features(i, node_label_map.at(node_labels[v])) = 1.0;
    }
  }

  std::vector<std::vector<Edge>> raw(num_graphs);
  for (const auto& row : adjacency) {
    if (row.size() != 2) throw FormatError("A.txt: expected 'u, v' per line");
    const auto u = static_cast<long long>(row[0]) - 1;
    const auto v = static_cast<long long>(row[1]) - 1;
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= total_nodes ||
        static_cast<std::size_t>(v) >= total_nodes)
      throw FormatError("A.txt: node id out of range");
    const auto gu = graph_of[static_cast<std::size_t>(u)];
    if (gu != graph_of[static_cast<std::size_t>(v)]) throw FormatError("A.txt: edge spans graphs");
    raw[gu].emplace_back(local_of[static_cast<std::size_t>(u)], local_of[static_cast<std::size_t>(v)]);
  }
  for (std::size_t g = 0; g < num_graphs; ++g) graphs[g].edges = canonical_edges(raw[g]);

  std::vector<std::size_t> keep(num_graphs);
  std::iota(keep.begin(), keep.end(), 0);
  if (opts.max_graphs && *opts.max_graphs < num_graphs) {
    CounterRng rng = CounterRng(opts.seed).split(0x7B);
    for (std::size_t i = num_graphs; i > 1; --i) std::swap(keep[i - 1], keep[rng.below(i)]);
    keep.resize(*opts.max_graphs);
    std::sort(keep.begin(), keep.end());
  }

  Dataset ds;
  ds.name = name;
  ds.num_classes = static_cast<int>(label_map.size());
  ds.feature_dim = feature_dim;
  for (std::size_t g : keep) ds.graphs.push_back(std::move(graphs[g]));
  ds.validate();
  return ds;
}

void write_tu_dataset(const Dataset& ds, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ostringstream a, ind, lab, attr;
  attr.precision(17);
  std::size_t offset = 0;
  for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi) {
    const Graph& g = ds.graphs[gi];
    for (std::size_t v = 0; v < g.n; ++v) {
      ind << gi + 1 << '\n';
      const auto r = g.features.row(v);
      for (std::size_t j = 0; j < r.size(); ++j) attr << (j ? ", " : "") << r[j];
      attr << '\n';
    }
    for (const auto& [u, v] : g.edges) {
      a << offset + u + 1 << ", " << offset + v + 1 << '\n';
      a << offset + v + 1 << ", " << offset + u + 1 << '\n';
    }
    lab << g.label << '\n';
    offset += g.n;
  }
  write_file_atomic(dir / (name + "_A.txt"), a.str());
  write_file_atomic(dir / (name + "_graph_indicator.txt"), ind.str());
  write_file_atomic(dir / (name + "_graph_labels.txt"), lab.str());
  write_file_atomic(dir / (name + "_node_attributes.txt"), attr.str());
}

}  // namespace gnncert
