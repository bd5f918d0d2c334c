#include "tagraid/confusables.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tagraid/error.hpp"

namespace tagraid {

namespace {

struct Pair {
  char32_t variant;
  char32_t canonical;
};

// Latin letters and their Cyrillic / Greek look-alikes.
constexpr Pair kBuiltin[] = {
    {U'а', U'a'}, {U'с', U'c'}, {U'е', U'e'}, {U'о', U'o'}, {U'ο', U'o'},
    {U'р', U'p'}, {U'х', U'x'}, {U'у', U'y'}, {U'і', U'i'}, {U'ј', U'j'},
    {U'ѕ', U's'}, {U'һ', U'h'}, {U'ԁ', U'd'}, {U'ԛ', U'q'}, {U'ԝ', U'w'},
    {U'ν', U'v'}, {U'А', U'A'}, {U'Α', U'A'}, {U'В', U'B'}, {U'Β', U'B'},
    {U'С', U'C'}, {U'Е', U'E'}, {U'Ε', U'E'}, {U'Н', U'H'}, {U'Η', U'H'},
    {U'І', U'I'}, {U'Ι', U'I'}, {U'Ј', U'J'}, {U'К', U'K'}, {U'Κ', U'K'},
    {U'М', U'M'}, {U'Μ', U'M'}, {U'Ν', U'N'}, {U'О', U'O'}, {U'Ο', U'O'},
    {U'Р', U'P'}, {U'Ρ', U'P'}, {U'Ѕ', U'S'}, {U'Т', U'T'}, {U'Τ', U'T'},
    {U'Х', U'X'}, {U'Χ', U'X'}, {U'Υ', U'Y'}, {U'Ү', U'Y'}, {U'Ζ', U'Z'},
};

const std::vector<char32_t> kNone;

std::vector<char32_t> parse_codepoints(std::string_view field) {
  std::vector<char32_t> out;
  std::istringstream in{std::string(field)};
  std::string token;
  while (in >> token) out.push_back(static_cast<char32_t>(std::stoul(token, nullptr, 16)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\xEF' ||
                        s.front() == '\xBB' || s.front() == '\xBF')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

const ConfusablesTable& ConfusablesTable::builtin() {
  static const ConfusablesTable table = [] {
    ConfusablesTable t;
    for (const auto& p : kBuiltin) t.add(p.variant, p.canonical);
    return t;
  }();
  return table;
}

void ConfusablesTable::add(char32_t variant, char32_t canonical) {
  if (variant == canonical) return;
  // Follow chains so every entry points at a final representative.
  canonical = this->canonical(canonical);
  if (variant == canonical) return;
  if (to_canonical_.count(variant)) return;
  to_canonical_[variant] = canonical;
  auto& list = variants_[canonical];
  if (std::find(list.begin(), list.end(), variant) == list.end()) list.push_back(variant);
}

void ConfusablesTable::merge(const ConfusablesTable& other) {
  for (const auto& [variant, canonical] : other.to_canonical_) add(variant, canonical);
}

char32_t ConfusablesTable::canonical(char32_t cp) const {
  auto it = to_canonical_.find(cp);
  return it == to_canonical_.end() ? cp : it->second;
}

const std::vector<char32_t>& ConfusablesTable::variants(char32_t cp) const {
  auto it = variants_.find(cp);
  return it == variants_.end() ? kNone : it->second;
}

ConfusablesTable ConfusablesTable::parse(std::string_view contents) {
  ConfusablesTable table;
  std::size_t line_no = 0;
  while (!contents.empty()) {
    const auto nl = contents.find('\n');
    std::string_view line = contents.substr(0, nl);
    contents = nl == std::string_view::npos ? std::string_view{} : contents.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto s1 = line.find(';');
    const auto s2 = s1 == std::string_view::npos ? s1 : line.find(';', s1 + 1);
    if (s1 == std::string_view::npos || s2 == std::string_view::npos) {
      throw InputError(fmt::format("confusables line {}: expected \"source ; target ; type\"", line_no));
    }
    std::vector<char32_t> source, target;
    try {
      source = parse_codepoints(line.substr(0, s1));
      target = parse_codepoints(line.substr(s1 + 1, s2 - s1 - 1));
    } catch (const std::exception&) {
      throw InputError(fmt::format("confusables line {}: bad codepoint", line_no));
    }
    if (source.size() != 1 || target.size() != 1) continue;
    if (source[0] < 0x80) continue;
    table.add(source[0], target[0]);
  }
  return table;
}

ConfusablesTable ConfusablesTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace tagraid
