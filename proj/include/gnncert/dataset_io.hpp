#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gnncert/graph.hpp"

namespace gnncert {

// Dataset JSON schema:
//   {"name", "num_classes", "feature_dim",
//    "graphs": [{"n", "edges": [[u, v], ...], "features": [[...], ...], "label"}]}

nlohmann::json dataset_to_json(const Dataset& ds);
/// Validates the result; throws FormatError on schema or graph violations.
Dataset dataset_from_json(const nlohmann::json& j);

void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, std::size_t expect_cols = 0);

struct TuOptions {
  /// Keep at most this many graphs (seeded uniform subsample, original order kept).
  std::optional<std::size_t> max_graphs;
  std::uint64_t seed = 0;
};

/// Reads a TU-format benchmark directory: <dir>/<DS>_A.txt,
/// <DS>_graph_indicator.txt, <DS>_graph_labels.txt and optionally
/// <DS>_node_attributes.txt (dense features) or <DS>_node_labels.txt
/// (one-hot features). Without either, every node gets the feature [1].
/// Graph labels are remapped to 0..K-1 in sorted order; edges are
/// symmetrized, self-loops and duplicates dropped.
Dataset load_tu_dataset(const std::filesystem::path& dir, const std::string& name,
                        const TuOptions& opts = {});

/// Writes `ds` in TU format under dir with the given prefix (node attributes
/// hold the features).
void write_tu_dataset(const Dataset& ds, const std::filesystem::path& dir,
                      const std::string& name);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace gnncert
