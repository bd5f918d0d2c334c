#pragma once

#include <string>
#include <string_view>

#include "tagraid/confusables.hpp"

namespace tagraid {

/// Deterministic text correction: undo RLO...PDF pair encodings (reverse
/// the scope, drop the controls), map every codepoint to its confusable
/// class representative, then drop any remaining direction controls.
/// Unbalanced RLO/PDF structure is stripped without reversal and reported
/// through *unbalanced. Idempotent.
std::string sanitize_text(std::string_view text, const ConfusablesTable& table = ConfusablesTable::builtin(),
                          bool* unbalanced = nullptr);

}  // namespace tagraid
