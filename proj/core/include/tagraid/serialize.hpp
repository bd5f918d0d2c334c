#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagraid/perturbation.hpp"
#include "tagraid/template_attack.hpp"

namespace tagraid {

// JSON forms used for replay. Node ids are row indices into nodes.jsonl.
//   {"flips": [{"u": 1, "v": 4, "op": "add"}], "edge_budget": 3,
//    "text_edits": {"7": [{"kind": "reorder", "position": 10}, ...]},
//    "char_budget": {"7": 12}}
// Homoglyph edits carry "original" and "replacement" as codepoint numbers.

std::string perturbation_to_json(const PerturbationSet& perturbation);
/// Throws InputError on malformed documents or unknown keys.
PerturbationSet perturbation_from_json(std::string_view text);

std::string plans_to_json(std::span<const InjectionPlan> plans);
std::vector<InjectionPlan> plans_from_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for our use: to a temporary then renamed.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace tagraid
