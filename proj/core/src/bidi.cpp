#include "tagraid/bidi.hpp"

#include <algorithm>

namespace tagraid::bidi {

namespace {

bool in(char32_t cp, char32_t lo, char32_t hi) noexcept { return cp >= lo && cp <= hi; }

bool is_isolate_initiator(Class c) noexcept { return c == Class::LRI || c == Class::RLI || c == Class::FSI; }

bool removed_by_x9(Class c) noexcept {
  return c == Class::LRE || c == Class::RLE || c == Class::LRO || c == Class::RLO || c == Class::PDF ||
         c == Class::BN;
}

bool is_neutral_or_isolate(Class c) noexcept {
  return c == Class::B || c == Class::S || c == Class::WS || c == Class::ON || is_isolate_initiator(c) ||
         c == Class::PDI;
}

// First strong direction in [begin, end), skipping isolate contents; -1 if none.
int first_strong(std::u32string_view text, std::size_t begin, std::size_t end, bool stop_at_pdi) {
  int depth = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const Class c = bidi_class(text[i]);
    if (is_isolate_initiator(c)) {
      ++depth;
    } else if (c == Class::PDI) {
      if (depth > 0) {
        --depth;
      } else if (stop_at_pdi) {
        return -1;
      }
    } else if (depth == 0) {
      if (c == Class::L) return 0;
      if (c == Class::R || c == Class::AL) return 1;
    }
  }
  return -1;
}

// Index of the PDI matching each isolate initiator (BD9), or npos.
std::vector<std::size_t> matching_pdi(const std::vector<Class>& types) {
  constexpr auto npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> match(types.size(), npos);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (is_isolate_initiator(types[i])) {
      open.push_back(i);
    } else if (types[i] == Class::PDI && !open.empty()) {
      match[open.back()] = i;
      open.pop_back();
    }
  }
  return match;
}

std::vector<int> resolve_paragraph(std::u32string_view text, int paragraph_level) {
  constexpr int kMaxDepth = 125;
  constexpr auto npos = static_cast<std::size_t>(-1);
  const std::size_t n = text.size();
  std::vector<Class> original(n), types(n);
  for (std::size_t i = 0; i < n; ++i) original[i] = types[i] = bidi_class(text[i]);
  if (paragraph_level < 0) paragraph_level = std::max(0, first_strong(text, 0, n, false));

  const auto match = matching_pdi(original);
  std::vector<int> levels(n, paragraph_level);

  // X1-X8: explicit levels and directions.
  struct Entry {
    int level;
    Class override_type;  // ON for neutral
    bool isolate;
  };
  std::vector<Entry> stack{{paragraph_level, Class::ON, false}};
  int overflow_isolates = 0, overflow_embeddings = 0, valid_isolates = 0;
  auto next_odd = [](int l) { return (l + 1) | 1; };
  auto next_even = [](int l) { return (l + 2) & ~1; };
  for (std::size_t i = 0; i < n; ++i) {
    const Class t = original[i];
    const Entry& top = stack.back();
    switch (t) {
      case Class::RLE: case Class::LRE: case Class::RLO: case Class::LRO: {
        const bool rtl = t == Class::RLE || t == Class::RLO;
        const int level = rtl ? next_odd(top.level) : next_even(top.level);
        levels[i] = top.level;
        if (level <= kMaxDepth && overflow_isolates == 0 && overflow_embeddings == 0) {
          const Class ov = t == Class::RLO ? Class::R : t == Class::LRO ? Class::L : Class::ON;
          stack.push_back({level, ov, false});
        } else if (overflow_isolates == 0) {
          ++overflow_embeddings;
        }
        break;
      }
      case Class::RLI: case Class::LRI: case Class::FSI: {
        levels[i] = top.level;
        if (top.override_type != Class::ON) types[i] = top.override_type;
        bool rtl = t == Class::RLI;
        if (t == Class::FSI) {
          const std::size_t end = match[i] == npos ? n : match[i];
          rtl = first_strong(text, i + 1, end, true) == 1;
        }
        const int level = rtl ? next_odd(top.level) : next_even(top.level);
        if (level <= kMaxDepth && overflow_isolates == 0 && overflow_embeddings == 0) {
          ++valid_isolates;
          stack.push_back({level, Class::ON, true});
        } else {
          ++overflow_isolates;
        }
        break;
      }
      case Class::PDI: {
        if (overflow_isolates > 0) {
          --overflow_isolates;
        } else if (valid_isolates > 0) {
          overflow_embeddings = 0;
          while (!stack.back().isolate) stack.pop_back();
          stack.pop_back();
          --valid_isolates;
        }
        const Entry& now = stack.back();
        levels[i] = now.level;
        if (now.override_type != Class::ON) types[i] = now.override_type;
        break;
      }
      case Class::PDF: {
        levels[i] = top.level;
        if (overflow_isolates > 0) {
        } else if (overflow_embeddings > 0) {
          --overflow_embeddings;
        } else if (!top.isolate && stack.size() >= 2) {
          stack.pop_back();
        }
        break;
      }
      case Class::B:
        levels[i] = paragraph_level;
        break;
      case Class::BN:
        levels[i] = top.level;
        break;
      default:
        levels[i] = top.level;
        if (top.override_type != Class::ON) types[i] = top.override_type;
        break;
    }
  }

  // X9: removed characters are skipped from here on.
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed_by_x9(original[i])) kept.push_back(i);
  }

  // X10: level runs chained into isolating run sequences.
  std::vector<std::vector<std::size_t>> runs;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (k == 0 || levels[kept[k]] != levels[kept[k - 1]]) runs.emplace_back();
    runs.back().push_back(kept[k]);
  }
  std::vector<std::size_t> run_of(n, npos);
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (auto i : runs[r]) run_of[i] = r;

  std::vector<std::vector<std::size_t>> sequences;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const std::size_t first = runs[r].front();
    if (original[first] == Class::PDI && std::find(match.begin(), match.end(), first) != match.end()) continue;
    std::vector<std::size_t> seq;
    std::size_t cur = r;
    for (;;) {
      seq.insert(seq.end(), runs[cur].begin(), runs[cur].end());
      const std::size_t last = runs[cur].back();
      if (!is_isolate_initiator(original[last]) || match[last] == npos) break;
      cur = run_of[match[last]];
      if (cur == npos) break;
    }
    sequences.push_back(std::move(seq));
  }

  for (const auto& seq : sequences) {
    const int level = levels[seq.front()];
    // sos / eos from the neighbouring kept characters.
    int before = paragraph_level, after = paragraph_level;
    {
      const auto pos = std::lower_bound(kept.begin(), kept.end(), seq.front());
      if (pos != kept.begin()) before = levels[*(pos - 1)];
      const std::size_t last = seq.back();
      if (!is_isolate_initiator(original[last])) {
        const auto next = std::upper_bound(kept.begin(), kept.end(), last);
        if (next != kept.end()) after = levels[*next];
      }
    }
    const Class sos = (std::max(level, before) % 2) ? Class::R : Class::L;
    const Class eos = (std::max(level, after) % 2) ? Class::R : Class::L;
    auto t = [&](std::size_t k) -> Class& { return types[seq[k]]; };
    const std::size_t m = seq.size();

    // W1
    for (std::size_t k = 0; k < m; ++k) {
      if (t(k) != Class::NSM) continue;
      if (k == 0) {
        t(k) = sos;
      } else {
        const Class prev = t(k - 1);
        t(k) = (is_isolate_initiator(prev) || prev == Class::PDI) ? Class::ON : prev;
      }
    }
    // W2, W3
    {
      Class last_strong = sos;
      for (std::size_t k = 0; k < m; ++k) {
        const Class c = t(k);
        if (c == Class::L || c == Class::R || c == Class::AL) last_strong = c;
        if (c == Class::EN && last_strong == Class::AL) t(k) = Class::AN;
      }
      for (std::size_t k = 0; k < m; ++k)
        if (t(k) == Class::AL) t(k) = Class::R;
    }
    // W4
    for (std::size_t k = 1; k + 1 < m; ++k) {
      const Class a = t(k - 1), c = t(k), b = t(k + 1);
      if (c == Class::ES && a == Class::EN && b == Class::EN) t(k) = Class::EN;
      if (c == Class::CS && a == Class::EN && b == Class::EN) t(k) = Class::EN;
      if (c == Class::CS && a == Class::AN && b == Class::AN) t(k) = Class::AN;
    }
    // W5
    for (std::size_t k = 0; k < m;) {
      if (t(k) != Class::ET) {
        ++k;
        continue;
      }
      std::size_t end = k;
      while (end < m && t(end) == Class::ET) ++end;
      const bool adjacent = (k > 0 && t(k - 1) == Class::EN) || (end < m && t(end) == Class::EN);
      if (adjacent)
        for (std::size_t j = k; j < end; ++j) t(j) = Class::EN;
      k = end;
    }
    // W6
    for (std::size_t k = 0; k < m; ++k) {
      const Class c = t(k);
      if (c == Class::ES || c == Class::ET || c == Class::CS) t(k) = Class::ON;
    }
    // W7
    {
      Class last_strong = sos;
      for (std::size_t k = 0; k < m; ++k) {
        const Class c = t(k);
        if (c == Class::L || c == Class::R) last_strong = c;
        if (c == Class::EN && last_strong == Class::L) t(k) = Class::L;
      }
    }
    // N1, N2
    auto strong_dir = [&](Class c) -> int {
      if (c == Class::L) return 0;
      if (c == Class::R || c == Class::EN || c == Class::AN) return 1;
      return -1;
    };
    for (std::size_t k = 0; k < m;) {
      if (!is_neutral_or_isolate(t(k))) {
        ++k;
        continue;
      }
      std::size_t end = k;
      while (end < m && is_neutral_or_isolate(t(end))) ++end;
      const int left = k == 0 ? strong_dir(sos) : strong_dir(t(k - 1));
      const int right = end == m ? strong_dir(eos) : strong_dir(t(end));
      const Class resolved = (left >= 0 && left == right) ? (left ? Class::R : Class::L)
                                                          : ((level % 2) ? Class::R : Class::L);
      for (std::size_t j = k; j < end; ++j) t(j) = resolved;
      k = end;
    }
    // I1, I2
    for (std::size_t k = 0; k < m; ++k) {
      int& lv = levels[seq[k]];
      const Class c = t(k);
      if (lv % 2 == 0) {
        if (c == Class::R) lv += 1;
        else if (c == Class::AN || c == Class::EN) lv += 2;
      } else if (c == Class::L || c == Class::EN || c == Class::AN) {
        lv += 1;
      }
    }
  }

  // L1 on original types.
  auto resets = [&](Class c) {
    return c == Class::WS || is_isolate_initiator(c) || c == Class::PDI || removed_by_x9(c);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Class c = original[i];
    if (c == Class::S || c == Class::B) {
      levels[i] = paragraph_level;
      for (std::size_t j = i; j-- > 0 && resets(original[j]);) levels[j] = paragraph_level;
    }
  }
  for (std::size_t j = n; j-- > 0 && resets(original[j]);) levels[j] = paragraph_level;

  for (std::size_t i = 0; i < n; ++i)
    if (removed_by_x9(original[i])) levels[i] = -1;
  return levels;
}

}  // namespace

Class bidi_class(char32_t cp) noexcept {
  switch (cp) {
    case kLRE: return Class::LRE;
    case kRLE: return Class::RLE;
    case kPDF: return Class::PDF;
    case kLRO: return Class::LRO;
    case kRLO: return Class::RLO;
    case kLRI: return Class::LRI;
    case kRLI: return Class::RLI;
    case kFSI: return Class::FSI;
    case kPDI: return Class::PDI;
    case kLRM: return Class::L;
    case kRLM: return Class::R;
    case kALM: return Class::AL;
    case U'\n': case U'\r': case 0x1C: case 0x1D: case 0x1E: case 0x85: case 0x2029: return Class::B;
    case U'\t': case 0x0B: case 0x1F: return Class::S;
    case U' ': case 0x0C: case 0x2028: return Class::WS;
    case U'+': case U'-': case 0x2212: return Class::ES;
    case U'#': case U'$': case U'%': case 0x00A2: case 0x00A3: case 0x00A4: case 0x00A5: case 0x00B0:
    case 0x00B1: case 0x20AC: return Class::ET;
    case U',': case U'.': case U'/': case U':': case 0x00A0: return Class::CS;
    default: break;
  }
  if (in(cp, U'0', U'9') || in(cp, 0x00B2, 0x00B3) || cp == 0x00B9 || in(cp, 0x06F0, 0x06F9)) return Class::EN;
  if (in(cp, 0x0660, 0x0669) || in(cp, 0x066B, 0x066C)) return Class::AN;
  if (in(cp, U'A', U'Z') || in(cp, U'a', U'z')) return Class::L;
  if (cp < 0x20 || cp == 0x7F || in(cp, 0x80, 0x9F) || cp == 0x00AD || in(cp, 0x200B, 0x200D) || cp == 0x2060 ||
      cp == 0xFEFF) {
    return Class::BN;
  }
  if (cp < 0x80) return Class::ON;
  if (in(cp, 0x0300, 0x036F) || in(cp, 0x0483, 0x0489) || in(cp, 0x0591, 0x05BD) || in(cp, 0x064B, 0x065F) ||
      in(cp, 0x20D0, 0x20FF)) {
    return Class::NSM;
  }
  if (in(cp, 0x0590, 0x05FF) || in(cp, 0x07C0, 0x085F) || in(cp, 0xFB1D, 0xFB4F)) return Class::R;
  if (in(cp, 0x0600, 0x07BF) || in(cp, 0x0860, 0x08FF) || in(cp, 0xFB50, 0xFDFF) || in(cp, 0xFE70, 0xFEFF)) {
    return Class::AL;
  }
  if (in(cp, 0x00A1, 0x00BF) || cp == 0x00D7 || cp == 0x00F7 || in(cp, 0x2010, 0x2027) ||
      in(cp, 0x2030, 0x205E) || in(cp, 0x2190, 0x2BFF) || in(cp, 0x3000, 0x3003)) {
    return Class::ON;
  }
  return Class::L;
}

bool is_control(char32_t cp) noexcept {
  switch (bidi_class(cp)) {
    case Class::LRE: case Class::RLE: case Class::LRO: case Class::RLO: case Class::PDF:
    case Class::LRI: case Class::RLI: case Class::FSI: case Class::PDI:
      return true;
    default:
      return cp == kLRM || cp == kRLM || cp == kALM;
  }
}

bool is_ltr_letter_or_digit(char32_t cp) noexcept {
  if (in(cp, U'0', U'9')) return true;
  if (cp == kLRM) return false;
  if (bidi_class(cp) != Class::L) return false;
  return in(cp, U'A', U'Z') || in(cp, U'a', U'z') || (in(cp, 0x00C0, 0x024F) && cp != 0x00D7 && cp != 0x00F7) ||
         in(cp, 0x0370, 0x03FF) || in(cp, 0x0400, 0x052F);
}

std::vector<int> resolve_levels(std::u32string_view text, int paragraph_level) {
  std::vector<int> out;
  out.reserve(text.size());
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || bidi_class(text[i]) == Class::B) {
      const std::size_t end = i == text.size() ? i : i + 1;
      const auto part = resolve_paragraph(text.substr(start, end - start), paragraph_level);
      out.insert(out.end(), part.begin(), part.end());
      start = end;
    }
  }
  return out;
}

std::u32string display_order(std::u32string_view text, int paragraph_level) {
  const auto levels = resolve_levels(text, paragraph_level);
  std::u32string out;
  out.reserve(text.size());
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i != text.size() && bidi_class(text[i]) != Class::B) continue;
    const std::size_t end = i == text.size() ? i : i + 1;
    std::vector<std::size_t> order;
    for (std::size_t j = start; j < end; ++j) {
      if (levels[j] >= 0) order.push_back(j);
    }
    int highest = 0, lowest_odd = 1000;
    for (auto j : order) {
      highest = std::max(highest, levels[j]);
      if (levels[j] % 2) lowest_odd = std::min(lowest_odd, levels[j]);
    }
    for (int lv = highest; lv >= lowest_odd && lv >= 1; --lv) {
      for (std::size_t a = 0; a < order.size();) {
        if (levels[order[a]] < lv) {
          ++a;
          continue;
        }
        std::size_t b = a;
        while (b < order.size() && levels[order[b]] >= lv) ++b;
        std::reverse(order.begin() + static_cast<std::ptrdiff_t>(a), order.begin() + static_cast<std::ptrdiff_t>(b));
        a = b;
      }
    }
    for (auto j : order) {
      if (!is_control(text[j])) out.push_back(text[j]);
    }
    start = end;
  }
  return out;
}

}  // namespace tagraid::bidi
