#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tagraid {

/// Unit-cost edit distance by the two-row dynamic programme. Works for any
/// equality-comparable symbol type.
template <typename T>
std::size_t levenshtein_dp(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

/// Myers / Hyyro bit-parallel edit distance over 32-bit symbols (token
/// ids or codepoints), O(ceil(m / 64) * n). Equal to levenshtein_dp.
std::size_t levenshtein_myers(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Precomputed match vectors of a fixed pattern, for many distances
/// against the same reference.
class MyersPattern {
 public:
  explicit MyersPattern(std::span<const std::uint32_t> pattern);

  std::size_t distance(std::span<const std::uint32_t> text) const;
  std::size_t size() const noexcept { return m_; }

 private:
  const std::uint64_t* row(std::uint32_t symbol) const;

  std::size_t m_ = 0;
  std::size_t blocks_ = 0;
  // Sorted distinct symbols and their peq rows (blocks_ words each). Small
  // alphabets (bucket ids) also get a direct symbol -> row index.
  std::vector<std::uint32_t> symbols_;
  std::vector<std::uint64_t> peq_;
  std::vector<std::int32_t> direct_;
};

inline std::size_t levenshtein(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  return levenshtein_myers(a, b);
}

inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  return levenshtein_myers({reinterpret_cast<const std::uint32_t*>(a.data()), a.size()},
                           {reinterpret_cast<const std::uint32_t*>(b.data()), b.size()});
}

/// Edit distance between the codepoint sequences of two UTF-8 strings.
std::size_t levenshtein_utf8(std::string_view a, std::string_view b);

}  // namespace tagraid
