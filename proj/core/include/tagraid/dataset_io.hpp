#pragma once

#include <filesystem>

#include "tagraid/graph.hpp"

namespace tagraid {

/// Loads a dataset directory:
///   nodes.jsonl  one {"id", "text", "label"} object per line
///   edges.csv    header "src,dst", external string ids
///   splits.json  optional {"train": [ids], "val": [ids], "test": [ids]}
///   meta.json    optional {"name": str, "classes": [str]} declaring the
///                class vocabulary; otherwise labels are numbered in order of
///                first appearance.
/// Duplicate and reversed edge rows collapse to one edge. Errors carry the
/// file name and line number.
TextAttributedGraph load_dataset(const std::filesystem::path& dir);

/// Writes the same layout (including meta.json and, when every node is
/// tagged, splits.json). load_dataset(save_dataset(g)) reproduces g.
void save_dataset(const TextAttributedGraph& graph, const std::filesystem::path& dir,
                  std::string_view name = {});

}  // namespace tagraid
