#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "tagraid/bidi.hpp"
#include "tagraid/error.hpp"
#include "tagraid/levenshtein.hpp"
#include "tagraid/text_attack.hpp"
#include "tagraid/utf8.hpp"
#include "text_internal.hpp"

namespace tagraid {

std::vector<TextEdit> enumerate_edits(std::string_view text, const ConfusablesTable& table, EditSpace space) {
  const auto cps = utf8::decode(text);
  std::vector<TextEdit> out;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (space.homoglyphs) {
      for (char32_t r : table.variants(cps[i])) out.push_back(TextEdit::homoglyph(i, cps[i], r));
    }
    if (space.reorders && i + 1 < cps.size() && bidi::is_ltr_letter_or_digit(cps[i]) &&
        bidi::is_ltr_letter_or_digit(cps[i + 1])) {
      out.push_back(TextEdit::reorder(i));
    }
  }
  std::sort(out.begin(), out.end(), [](const TextEdit& a, const TextEdit& b) {
    if (a.position != b.position) return a.position < b.position;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.replacement < b.replacement;
  });
  return out;
}

EditConflicts::EditConflicts(std::u32string_view text) : strong_(text.size() + 1, 0) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    strong_[i + 1] = strong_[i] + (bidi::bidi_class(text[i]) == bidi::Class::L ? 1 : 0);
  }
}

bool EditConflicts::operator()(const TextEdit& a, const TextEdit& b) const noexcept {
  if (a.overlaps(b)) return true;
  if (a.kind != TextEdit::Kind::Reorder || b.kind != TextEdit::Kind::Reorder) return false;
  const auto& first = a.position < b.position ? a : b;
  const auto& second = a.position < b.position ? b : a;
  const std::size_t gap_begin = std::min(first.position + first.width(), strong_.size() - 1);
  const std::size_t gap_end = std::min(second.position, strong_.size() - 1);
  return gap_end <= gap_begin || strong_[gap_end] == strong_[gap_begin];
}

void validate_edits(std::u32string_view text, std::span<const TextEdit> edits, const ConfusablesTable& table) {
  const EditConflicts conflicts(text);
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const auto& e = edits[i];
    if (e.position + e.width() > text.size()) {
      throw InputError(fmt::format("edit {} at position {} runs past the text end ({})", i, e.position, text.size()));
    }
    if (e.kind == TextEdit::Kind::Homoglyph) {
      if (text[e.position] != e.original) {
        throw InputError(fmt::format("homoglyph edit {} expects U+{:04X} at {} but found U+{:04X}", i,
                                     static_cast<std::uint32_t>(e.original), e.position,
                                     static_cast<std::uint32_t>(text[e.position])));
      }
      const auto& variants = table.variants(e.original);
      if (std::find(variants.begin(), variants.end(), e.replacement) == variants.end()) {
        throw InputError(fmt::format("homoglyph edit {}: U+{:04X} is not confusable with U+{:04X}", i,
                                     static_cast<std::uint32_t>(e.replacement), static_cast<std::uint32_t>(e.original)));
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (conflicts(e, edits[j])) {
        throw InputError(fmt::format("edits at positions {} and {} conflict", edits[j].position, e.position));
      }
    }
  }
}

std::u32string detail::render_sorted_edits(std::u32string_view text, std::span<const TextEdit> edits) {
  std::u32string out;
  out.reserve(text.size() + 2 * edits.size());
  std::size_t cursor = 0;
  for (const auto& e : edits) {
    out.append(text.substr(cursor, e.position - cursor));
    if (e.kind == TextEdit::Kind::Homoglyph) {
      out.push_back(e.replacement);
    } else {
      const char32_t swapped[4] = {bidi::kRLO, text[e.position + 1], text[e.position], bidi::kPDF};
      out.append(swapped, 4);
    }
    cursor = e.position + e.width();
  }
  out.append(text.substr(cursor));
  return out;
}

std::u32string apply_edits(std::u32string_view text, std::span<const TextEdit> edits, const ConfusablesTable& table) {
  validate_edits(text, edits, table);
  std::vector<TextEdit> sorted(edits.begin(), edits.end());
  std::sort(sorted.begin(), sorted.end(), [](const TextEdit& a, const TextEdit& b) { return a.position < b.position; });
  return detail::render_sorted_edits(text, sorted);
}

std::string apply_edits(std::string_view text, std::span<const TextEdit> edits, const ConfusablesTable& table) {
  if (edits.empty()) return std::string(text);
  return utf8::encode(apply_edits(std::u32string_view(utf8::decode(text)), edits, table));
}

std::u32string canonical_display(std::u32string_view text, const ConfusablesTable& table) {
  auto shown = bidi::display_order(text);
  for (auto& c : shown) c = table.canonical(c);
  return shown;
}

bool render_equivalent(std::string_view original, std::string_view perturbed, const ConfusablesTable& table) {
  return canonical_display(utf8::decode(original), table) == canonical_display(utf8::decode(perturbed), table);
}

MyersPattern::MyersPattern(std::span<const std::uint32_t> pattern)
    : m_(pattern.size()), blocks_((pattern.size() + 63) / 64), symbols_(pattern.begin(), pattern.end()) {
  std::sort(symbols_.begin(), symbols_.end());
  symbols_.erase(std::unique(symbols_.begin(), symbols_.end()), symbols_.end());
  peq_.assign(symbols_.size() * blocks_, 0);
  for (std::size_t i = 0; i < m_; ++i) {
    const auto s = static_cast<std::size_t>(std::lower_bound(symbols_.begin(), symbols_.end(), pattern[i]) -
                                            symbols_.begin());
    peq_[s * blocks_ + i / 64] |= 1ULL << (i % 64);
  }
  constexpr std::uint32_t kDirectLimit = 1u << 16;
  if (!symbols_.empty() && symbols_.back() < kDirectLimit) {
    direct_.assign(symbols_.back() + 1, -1);
    for (std::size_t s = 0; s < symbols_.size(); ++s) direct_[symbols_[s]] = static_cast<std::int32_t>(s);
  }
}

const std::uint64_t* MyersPattern::row(std::uint32_t symbol) const {
  if (!direct_.empty()) {
    if (symbol >= direct_.size() || direct_[symbol] < 0) return nullptr;
    return &peq_[static_cast<std::size_t>(direct_[symbol]) * blocks_];
  }
  const auto it = std::lower_bound(symbols_.begin(), symbols_.end(), symbol);
  if (it == symbols_.end() || *it != symbol) return nullptr;
  return &peq_[static_cast<std::size_t>(it - symbols_.begin()) * blocks_];
}

std::size_t MyersPattern::distance(std::span<const std::uint32_t> text) const {
  if (m_ == 0) return text.size();
  if (text.empty()) return m_;
  std::vector<std::uint64_t> pv(blocks_, ~0ULL), mv(blocks_, 0);
  const std::uint64_t last_bit = 1ULL << ((m_ - 1) % 64);
  const std::size_t last = blocks_ - 1;
  std::size_t score = m_;

  // One block step; hp and hm carry the horizontal delta between blocks.
  auto step = [&](std::size_t k, std::uint64_t eq, std::uint64_t high, std::uint64_t& hp, std::uint64_t& hm) {
    const std::uint64_t p = pv[k];
    const std::uint64_t mm = mv[k];
    const std::uint64_t xv = eq | mm;
    const std::uint64_t eqh = eq | hm;
    const std::uint64_t xh = (((eqh & p) + p) ^ p) | eqh;
    std::uint64_t ph = mm | ~(xh | p);
    std::uint64_t mh = p & xh;
    const std::uint64_t out_p = (ph & high) ? 1 : 0;
    const std::uint64_t out_m = (mh & high) ? 1 : 0;
    ph = (ph << 1) | hp;
    mh = (mh << 1) | hm;
    pv[k] = mh | ~(xv | ph);
    mv[k] = ph & xv;
    hp = out_p;
    hm = out_m;
  };
  for (auto symbol : text) {
    const std::uint64_t* eq_row = row(symbol);
    std::uint64_t hp = 1, hm = 0;
    if (eq_row) {
      for (std::size_t k = 0; k < last; ++k) step(k, eq_row[k], 1ULL << 63, hp, hm);
      step(last, eq_row[last], last_bit, hp, hm);
    } else {
      for (std::size_t k = 0; k < last; ++k) step(k, 0, 1ULL << 63, hp, hm);
      step(last, 0, last_bit, hp, hm);
    }
    score = score + hp - hm;
  }
  return score;
}

std::size_t levenshtein_myers(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  return MyersPattern(a).distance(b);
}

std::size_t levenshtein_utf8(std::string_view a, std::string_view b) {
  return levenshtein(std::u32string_view(utf8::decode(a)), std::u32string_view(utf8::decode(b)));
}

}  // namespace tagraid
