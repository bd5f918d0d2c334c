#pragma once

#include <span>
#include <string>
#include <string_view>

#include "tagraid/perturbation.hpp"

namespace tagraid::detail {

// Applies already validated edits sorted by position in one pass.
std::u32string render_sorted_edits(std::u32string_view text, std::span<const TextEdit> edits);

}  // namespace tagraid::detail
