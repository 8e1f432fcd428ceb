#include "gptsm/renderers.hpp"

#include <random>

#include "doctest.h"
#include "test_support.hpp"

using namespace gptsm;

namespace {

// Arbitrary but deterministic saliency: every third piece removed at round 1.
SaliencyMap striped_map(const Document& doc) {
  SaliencyMap map;
  for (const auto& p : doc.paragraphs) {
    std::vector<PieceSaliency> row;
    const auto pieces = split_pieces(p.tokens);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      row.push_back(i % 3 == 1 ? PieceSaliency{SaliencyLabel::removed_at(1), 0.3}
                               : PieceSaliency{SaliencyLabel::kept(), 1.0});
    }
    map.paragraphs.push_back(std::move(row));
  }
  return map;
}

void check_faithful(const std::string& text) {
  const auto doc = segment(text);
  const auto map = striped_map(doc);
  const RenderPlan plan{doc, map};
  const auto articles = testing::html_article_texts(render_html(plan));
  REQUIRE(articles.size() == 1);
  CHECK(articles[0] == text);
  CHECK(testing::strip_ansi(render_ansi(plan)) == text);
  CHECK(rendered_source(parse_rendered_json(render_json(plan))) == text);
}

}  // namespace

TEST_CASE("blend against white") {
  const Theme t;
  CHECK(blend(t, 1.0) == Rgb{0, 0, 0});
  CHECK(blend(t, 0.30) == Rgb{179, 179, 179});
  CHECK(blend(t, 0.0) == Rgb{255, 255, 255});
  CHECK(blend(t, 0.825) == Rgb{45, 45, 45});
}

TEST_CASE("single kept token as JSON") {
  const auto doc = segment("x");
  SaliencyMap map;
  map.paragraphs = {{PieceSaliency{SaliencyLabel::kept(), 1.0}}};
  CHECK(render_json({doc, map}) ==
        R"([[{"text":"x","suffix":"","round_label":"kept","opacity":1.0}]])");
}

TEST_CASE("HTML page structure") {
  const auto doc = segment("a <b> & \"c\"\n\nnext");
  const auto map = striped_map(doc);
  const auto html = render_html({doc, map});
  CHECK(html.find("<!DOCTYPE html>") == 0);
  CHECK(html.find("<span style=\"color:rgb(179,179,179)\" data-label=\"removed_at_round_1\">") !=
        std::string::npos);
  CHECK(html.find("&lt;b&gt;") != std::string::npos);
  CHECK(html.find("type=\"checkbox\"") != std::string::npos);
  CHECK(html.find(":checked") != std::string::npos);
  CHECK(html.find("<script") == std::string::npos);
  CHECK(html.find("http") == std::string::npos);
  CHECK(html.find("<p>") != std::string::npos);
}

TEST_CASE("ANSI colours") {
  const auto doc = segment("a b");
  const auto map = striped_map(doc);
  RenderPlan plan{doc, map};
  const auto out = render_ansi(plan);
  CHECK(out == "\x1b[38;2;0;0;0ma \x1b[38;2;179;179;179mb\x1b[0m");
  plan.ansi_256 = true;
  const auto gray = render_ansi(plan);
  CHECK(gray.find("\x1b[38;5;") != std::string::npos);
  CHECK(testing::strip_ansi(gray) == "a b");
}

TEST_CASE("faithfulness on edge cases") {
  for (const std::string text :
       {"", "x", "  lead", "trail  ", "\n\nfirst empty", "a\n\n\n\nb", "a\r\n\r\nb", " \t ",
        "<&>\"'", "naïve café — “quotes”", "a\xC2\xA0" "b", "one.\n\n  \n\ntwo."}) {
    CAPTURE(text);
    check_faithful(text);
  }
}

TEST_CASE("property: faithfulness on random documents") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    const auto text = testing::random_text(rng);
    CAPTURE(text);
    check_faithful(text);
  }
}

TEST_CASE("JSON round trip preserves labels and opacities") {
  const auto doc = segment("  lead words.\n\nmore here");
  const auto map = striped_map(doc);
  const RenderPlan plan{doc, map};
  CHECK(parse_rendered_json(render_json(plan)) == flatten(plan));
  CHECK_THROWS_AS(parse_rendered_json(R"([[{"text":"x","suffix":"","round_label":"bogus","opacity":1}]])"),
                  std::invalid_argument);
}

TEST_CASE("compare page has two faithful columns") {
  const auto doc = segment("Forests play a critical role.");
  const auto left = striped_map(doc);
  SaliencyMap right = left;
  for (auto& s : right.paragraphs[0]) s = {SaliencyLabel::kept(), 1.0};
  const auto html = render_compare_html({doc, left}, "GP", {doc, right}, "NGP");
  const auto articles = testing::html_article_texts(html);
  REQUIRE(articles.size() == 2);
  CHECK(articles[0] == doc.source_text);
  CHECK(articles[1] == doc.source_text);
}

TEST_CASE("mismatched map is rejected") {
  const auto doc = segment("a b");
  SaliencyMap map;
  CHECK_THROWS_AS(render_html({doc, map}), std::invalid_argument);
  map.paragraphs = {{}};
  CHECK_THROWS_AS(render_json({doc, map}), std::invalid_argument);
}
