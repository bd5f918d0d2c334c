#pragma once

#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

namespace tagraid {

/// Homoglyph table: each canonical codepoint with its confusable variants.
/// Only single-codepoint mappings are represented.
class ConfusablesTable {
 public:
  ConfusablesTable() = default;

  /// The compiled-in Latin/Cyrillic/Greek subset (also shipped as
  /// data/confusables_builtin.txt).
  static const ConfusablesTable& builtin();

  /// Parses the Unicode confusables.txt format ("src ; target ; type # ...").
  /// Multi-codepoint sources or targets are skipped, as are ASCII sources so
  /// that clean ASCII text is a fixed point of canonicalisation.
  static ConfusablesTable load(const std::filesystem::path& path);
  static ConfusablesTable parse(std::string_view contents);

  void add(char32_t variant, char32_t canonical);
  void merge(const ConfusablesTable& other);

  /// Representative of cp's confusable class (cp itself if unlisted).
  char32_t canonical(char32_t cp) const;
  /// Variants that may replace cp (empty if none).
  const std::vector<char32_t>& variants(char32_t cp) const;
  bool same_class(char32_t a, char32_t b) const { return canonical(a) == canonical(b); }

  std::size_t size() const noexcept { return to_canonical_.size(); }
  bool operator==(const ConfusablesTable&) const = default;

 private:
  std::map<char32_t, char32_t> to_canonical_;
  std::map<char32_t, std::vector<char32_t>> variants_;
};

}  // namespace tagraid
