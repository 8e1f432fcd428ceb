#include "gptsm/text_model.hpp"

#include <random>

#include "doctest.h"
#include "test_support.hpp"

using namespace gptsm;

namespace {

std::vector<std::string> token_texts(const Paragraph& p) {
  std::vector<std::string> out;
  for (const auto& t : p.tokens) out.push_back(t.text);
  return out;
}

std::size_t count_separators(const Document& doc) {
  std::size_t n = 0;
  for (const auto& p : doc.paragraphs) n += p.trailing_separator.empty() ? 0 : 1;
  return n;
}

}  // namespace

TEST_CASE("segment: empty input has no paragraphs") {
  const auto doc = segment("");
  CHECK(doc.paragraphs.empty());
  CHECK(reconstruct(doc).empty());
}

TEST_CASE("segment: blank line splits paragraphs") {
  const auto doc = segment("a b.\n\nc");
  REQUIRE(doc.paragraphs.size() == 2);
  CHECK(token_texts(doc.paragraphs[0]) == std::vector<std::string>{"a", "b."});
  CHECK(token_texts(doc.paragraphs[1]) == std::vector<std::string>{"c"});
  CHECK(doc.paragraphs[0].trailing_separator == "\n\n");
  CHECK(doc.paragraphs[1].index == 1);
}

TEST_CASE("segment: inter-word whitespace is preserved in suffixes") {
  const auto doc = segment("Deforestation  speeds up");
  REQUIRE(doc.paragraphs.size() == 1);
  const auto& tokens = doc.paragraphs[0].tokens;
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0] == Token{"Deforestation", "  "});
  CHECK(tokens[1] == Token{"speeds", " "});
  CHECK(tokens[2] == Token{"up", ""});
}

TEST_CASE("segment: single newline does not split, whitespace-only lines do") {
  CHECK(segment("one\ntwo").paragraphs.size() == 1);
  const auto doc = segment("one\n \t\ntwo");
  REQUIRE(doc.paragraphs.size() == 2);
  CHECK(doc.paragraphs[0].trailing_separator == "\n \t\n");
}

TEST_CASE("segment: leading whitespace and empty paragraphs") {
  SUBCASE("leading spaces stay on the document") {
    const auto doc = segment("  a");
    CHECK(doc.leading == "  ");
    REQUIRE(doc.paragraphs.size() == 1);
  }
  SUBCASE("leading blank line creates an empty first paragraph") {
    const auto doc = segment("\n\nx");
    REQUIRE(doc.paragraphs.size() == 2);
    CHECK(doc.paragraphs[0].empty());
    CHECK(token_texts(doc.paragraphs[1]) == std::vector<std::string>{"x"});
  }
  SUBCASE("trailing blank line leaves an empty last paragraph") {
    const auto doc = segment("a\n\n");
    REQUIRE(doc.paragraphs.size() == 2);
    CHECK(doc.paragraphs[1].empty());
  }
  SUBCASE("whitespace only") {
    const auto doc = segment(" \t ");
    REQUIRE(doc.paragraphs.size() == 1);
    CHECK(doc.paragraphs[0].empty());
    CHECK(reconstruct(doc) == " \t ");
  }
}

TEST_CASE("segment: Unicode whitespace separates tokens") {
  // NBSP, ideographic space, line separator.
  const auto doc = segment("a\xC2\xA0" "b\xE3\x80\x80" "c\xE2\x80\xA8" "d");
  REQUIRE(doc.paragraphs.size() == 1);
  CHECK(token_texts(doc.paragraphs[0]) == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("reconstruct: identity on simple and reference texts") {
  CHECK(reconstruct(segment("x")) == "x");
  for (const auto& level : testing::deforestation_levels()) {
    CHECK(reconstruct(segment(level)) == level);
  }
  const auto file = testing::read_file(testing::fixture_path("deforestation.txt"));
  CHECK(reconstruct(segment(file)) == file);
}

TEST_CASE("property: round trip, token and paragraph invariants on random text") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 1000; ++iter) {
    const std::string text = testing::random_text(rng);
    const auto doc = segment(text);
    REQUIRE(reconstruct(doc) == text);
    if (!text.empty()) CHECK(doc.paragraphs.size() == 1 + count_separators(doc));
    for (const auto& p : doc.paragraphs) {
      for (const auto& t : p.tokens) {
        CHECK(!t.text.empty());
        CHECK(tokenize(t.text).size() == 1);
        CHECK(tokenize(t.suffix).empty());
      }
      // Pieces reassemble the paragraph exactly.
      std::string joined;
      for (const auto& piece : split_pieces(p.tokens)) joined += piece.text + piece.suffix;
      CHECK(joined == p.text());
    }
  }
}

TEST_CASE("split_pieces: punctuation is split off word edges") {
  const auto pieces = split_pieces(std::string_view("loss of nutrients. (e.g., “soil”) —"));
  std::vector<std::string> texts = piece_texts(pieces);
  CHECK(texts == std::vector<std::string>{"loss", "of", "nutrients", ".", "(", "e.g", ".,", "“",
                                          "soil", "”)", "—"});
  CHECK(pieces[2].kind == PieceKind::core);
  CHECK(pieces[3].kind == PieceKind::trailing);
  CHECK(pieces[4].kind == PieceKind::leading);
  CHECK(pieces.back().kind == PieceKind::whole);
  CHECK(pieces[2].suffix.empty());
  CHECK(pieces[3].suffix == " ");
}

TEST_CASE("join_pieces: glue follows source adjacency and trailing punctuation") {
  const auto pieces = split_pieces(std::string_view("loss of nutrients into watercourses. It"));
  // loss of nutrients into watercourses . It
  CHECK(join_pieces(pieces) == "loss of nutrients into watercourses. It");
  const std::vector<std::size_t> keep{0, 1, 2, 5, 6};
  CHECK(join_pieces(pieces, keep) == "loss of nutrients. It");
  const std::vector<std::size_t> dropped_word{0, 1, 2, 3, 5};
  CHECK(join_pieces(pieces, dropped_word) == "loss of nutrients into.");

  const auto paren = split_pieces(std::string_view("said (hello) there"));
  // said ( hello ) there
  const std::vector<std::size_t> no_open{0, 2, 4};
  CHECK(join_pieces(paren, no_open) == "said hello there");
}

TEST_CASE("normalize_whitespace and word pieces") {
  CHECK(normalize_whitespace("  a \n\n b\tc ") == "a b c");
  const auto pieces = split_pieces(std::string_view("— naïve 42 ..."));
  CHECK(count_word_pieces(pieces) == 2);
}
