#pragma once

#include <string>
#include <string_view>

namespace tagraid::utf8 {

/// Decodes UTF-8 into codepoints. Invalid sequences become U+FFFD.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view codepoints);

void append(std::string& out, char32_t cp);

/// Number of codepoints in a UTF-8 string.
std::size_t length(std::string_view bytes);

}  // namespace tagraid::utf8
