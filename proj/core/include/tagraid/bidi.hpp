#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tagraid::bidi {

enum class Class : std::uint8_t {
  L, R, AL, EN, ES, ET, AN, CS, NSM, BN, B, S, WS, ON,
  LRE, LRO, RLE, RLO, PDF, LRI, RLI, FSI, PDI,
};

inline constexpr char32_t kLRE = 0x202A;
inline constexpr char32_t kRLE = 0x202B;
inline constexpr char32_t kPDF = 0x202C;
inline constexpr char32_t kLRO = 0x202D;
inline constexpr char32_t kRLO = 0x202E;
inline constexpr char32_t kLRI = 0x2066;
inline constexpr char32_t kRLI = 0x2067;
inline constexpr char32_t kFSI = 0x2068;
inline constexpr char32_t kPDI = 0x2069;
inline constexpr char32_t kLRM = 0x200E;
inline constexpr char32_t kRLM = 0x200F;
inline constexpr char32_t kALM = 0x061C;

/// Bidirectional class of a codepoint. Covers Latin, Greek, Cyrillic,
/// Hebrew, Arabic, common punctuation and every explicit formatting
/// character; other letters default to L.
Class bidi_class(char32_t cp) noexcept;

/// Explicit embedding, override, isolate and mark characters.
bool is_control(char32_t cp) noexcept;

/// Strong left-to-right letter or an ASCII digit.
bool is_ltr_letter_or_digit(char32_t cp) noexcept;

/// Resolved embedding levels (rules P2-P3, X1-X10, W1-W7, N1-N2, I1-I2 and
/// L1; bracket pairing is not modelled). Characters removed by X9 get -1.
/// paragraph_level < 0 selects it from the first strong character.
std::vector<int> resolve_levels(std::u32string_view text, int paragraph_level = -1);

/// Visual order of the text (rule L2) with formatting characters dropped:
/// the codepoint sequence a reader sees, left to right. Paragraph
/// separators split the text into independently ordered paragraphs.
std::u32string display_order(std::u32string_view text, int paragraph_level = -1);

}  // namespace tagraid::bidi
