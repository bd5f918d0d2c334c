#include <doctest.h>

#include <algorithm>

#include "tagraid/bidi.hpp"
#include "tagraid/error.hpp"
#include "tagraid/levenshtein.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/sanitize.hpp"
#include "tagraid/text_attack.hpp"
#include "tagraid/utf8.hpp"

using namespace tagraid;

namespace {

const ConfusablesTable& table() { return ConfusablesTable::builtin(); }

std::vector<std::uint32_t> random_symbols(Rng& rng, std::size_t n, std::uint64_t alphabet) {
  std::vector<std::uint32_t> out(n);
  for (auto& s : out) s = static_cast<std::uint32_t>(rng.below(alphabet));
  return out;
}

std::string sample_text(Rng& rng, std::size_t length) {
  static const char letters[] = "abcdeijkopsxy mnrtuv";
  std::string s;
  for (std::size_t i = 0; i < length; ++i) s.push_back(letters[rng.below(sizeof(letters) - 1)]);
  return s;
}

}  // namespace

TEST_CASE("levenshtein examples") {
  CHECK(levenshtein_utf8("kitten", "sitting") == 3);
  CHECK(levenshtein_utf8("", "abc") == 3);
  CHECK(levenshtein_utf8("flaw", "lawn") == 2);
  CHECK(levenshtein_utf8("\xD0\xB0" "b", "ab") == 1);
  CHECK(levenshtein(std::u32string_view(U"abc"), std::u32string_view(U"abc")) == 0);
}

TEST_CASE("bit-parallel distance equals the dynamic programme") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = rng.below(150);
    const std::size_t m = rng.below(150);
    const std::uint64_t alphabet = trial % 3 == 0 ? 3 : (trial % 3 == 1 ? 500 : 100000);
    const auto a = random_symbols(rng, n, alphabet);
    const auto b = random_symbols(rng, m, alphabet);
    const std::span<const std::uint32_t> sa(a), sb(b);
    const auto dp = levenshtein_dp(sa, sb);
    REQUIRE(levenshtein_myers(sa, sb) == dp);
    REQUIRE(MyersPattern(sa).distance(sb) == dp);
    REQUIRE(MyersPattern(sb).distance(sa) == dp);
  }
}

TEST_CASE("enumerate_edits on \"ace\"") {
  const auto edits = enumerate_edits("ace", table());
  std::size_t homoglyphs = 0, reorders = 0;
  for (const auto& e : edits) (e.kind == TextEdit::Kind::Reorder ? reorders : homoglyphs) += 1;
  CHECK(reorders == 2);
  CHECK(homoglyphs == table().variants(U'a').size() + table().variants(U'c').size() + table().variants(U'e').size());
  CHECK(homoglyphs >= 3);
  CHECK(std::is_sorted(edits.begin(), edits.end(), [](const TextEdit& x, const TextEdit& y) {
    return std::tie(x.position, x.kind, x.replacement) < std::tie(y.position, y.kind, y.replacement);
  }));
  CHECK(enumerate_edits("ace", table(), EditSpace{false, true}).size() == 2);
  CHECK(enumerate_edits("a c", table(), EditSpace{false, true}).empty());
}

TEST_CASE("reorder encoding") {
  const std::vector<TextEdit> one{TextEdit::reorder(1)};
  const std::string out = apply_edits("abcd", one);
  CHECK(utf8::decode(out) == std::u32string{U'a', bidi::kRLO, U'c', U'b', bidi::kPDF, U'd'});
  CHECK(bidi::display_order(utf8::decode(out)) == U"abcd");
  CHECK(sanitize_text(out) == "abcd");
}

TEST_CASE("overlapping edits are rejected") {
  const std::vector<TextEdit> clash{TextEdit::reorder(0), TextEdit::reorder(1)};
  CHECK_THROWS_AS(validate_edits(U"abcd", clash, table()), InputError);
  const std::vector<TextEdit> touching{TextEdit::reorder(0), TextEdit::reorder(2)};
  CHECK_THROWS_AS(validate_edits(U"abcd", touching, table()), InputError);
  const std::vector<TextEdit> apart{TextEdit::reorder(0), TextEdit::reorder(3)};
  CHECK_NOTHROW(validate_edits(U"abcde", apart, table()));
  const std::vector<TextEdit> past{TextEdit::reorder(3)};
  CHECK_THROWS_AS(validate_edits(U"abcd", past, table()), InputError);
}

TEST_CASE("render equivalence and sanitizer round trip on random genomes") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string text = sample_text(rng, 5 + rng.below(60));
    const auto genome = random_genome(text, 1 + rng.below(8), rng.next(), table());
    const std::string attacked = apply_edits(text, genome.edits);
    CAPTURE(text);
    REQUIRE(render_equivalent(text, attacked, table()));
    REQUIRE(sanitize_text(attacked) == text);
    REQUIRE(sanitize_text(sanitize_text(attacked)) == sanitize_text(attacked));
  }
}

TEST_CASE("unbalanced overrides are stripped and reported") {
  bool unbalanced = false;
  const std::string text = utf8::encode(std::u32string{U'a', bidi::kRLO, U'b', U'c'});
  CHECK(sanitize_text(text, table(), &unbalanced) == "abc");
  CHECK(unbalanced);
}

TEST_CASE("evolve") {
  const auto bb = ngram_black_box(FeaturizerConfig{});
  Rng rng(4);
  const std::string text = sample_text(rng, 120);
  DEConfig cfg;
  cfg.generations = 10;
  const auto r = evolve(text, bb, 12, cfg);
  REQUIRE(r.best_trace.size() == 11);
  for (std::size_t i = 1; i < r.best_trace.size(); ++i) CHECK(r.best_trace[i] >= r.best_trace[i - 1]);
  CHECK(r.best.fitness == r.best_trace.back());
  CHECK(r.best.fitness == genome_fitness(text, r.best.edits, bb));
  CHECK(r.best.edits.size() <= 12);

  SUBCASE("zero generations keeps the initial population's best") {
    cfg.generations = 0;
    CHECK(evolve(text, bb, 12, cfg).best_trace.size() == 1);
  }
  SUBCASE("deterministic") { CHECK(evolve(text, bb, 12, cfg).best.edits == r.best.edits); }
  SUBCASE("text without candidates") { CHECK(evolve("   ", bb, 3, cfg).empty_candidates); }
}

TEST_CASE("DE config validation") {
  DEConfig cfg;
  cfg.population = 3;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.cr = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}
