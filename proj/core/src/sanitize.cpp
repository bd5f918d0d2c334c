#include "tagraid/sanitize.hpp"

#include <algorithm>
#include <vector>

#include "tagraid/bidi.hpp"
#include "tagraid/utf8.hpp"

namespace tagraid {

namespace {

bool opens_scope(char32_t c) {
  return c == bidi::kRLO || c == bidi::kLRO || c == bidi::kRLE || c == bidi::kLRE;
}

bool balanced(const std::u32string& cps) {
  int depth = 0;
  for (char32_t c : cps) {
    if (opens_scope(c)) {
      ++depth;
    } else if (c == bidi::kPDF) {
      if (depth == 0) return false;
      --depth;
    }
  }
  return depth == 0;
}

}  // namespace

std::string sanitize_text(std::string_view text, const ConfusablesTable& table, bool* unbalanced) {
  const auto cps = utf8::decode(text);
  const bool ok = balanced(cps);
  if (unbalanced) *unbalanced = !ok;

  std::u32string restored;
  if (ok) {
    struct Scope {
      char32_t opener;
      std::u32string content;
    };
    std::vector<Scope> stack{{0, {}}};
    for (char32_t c : cps) {
      if (opens_scope(c)) {
        stack.push_back({c, {}});
      } else if (c == bidi::kPDF) {
        Scope done = std::move(stack.back());
        stack.pop_back();
        if (done.opener == bidi::kRLO) std::reverse(done.content.begin(), done.content.end());
        stack.back().content += done.content;
      } else {
        stack.back().content.push_back(c);
      }
    }
    restored = std::move(stack.front().content);
  } else {
    restored = cps;
  }

  std::u32string out;
  out.reserve(restored.size());
  for (char32_t c : restored) {
    if (bidi::is_control(c)) continue;
    out.push_back(table.canonical(c));
  }
  return utf8::encode(out);
}

}  // namespace tagraid
