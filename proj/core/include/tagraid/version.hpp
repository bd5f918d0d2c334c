#pragma once

#include <string_view>

namespace tagraid {

/// Toolkit version, `<semver>+<git describe>` when built from a checkout.
std::string_view version_string() noexcept;

}  // namespace tagraid
