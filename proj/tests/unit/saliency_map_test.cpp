#include "gptsm/saliency_map.hpp"

#include <map>
#include <random>

#include "doctest.h"
#include "test_support.hpp"

using namespace gptsm;

namespace {

// Trace built directly from level texts, without the engine.
LevelTrace trace_from_levels(const std::vector<std::string>& texts, bool with_positions) {
  LevelTrace t;
  for (const auto& text : texts) t.levels.push_back(piece_texts(split_pieces(std::string_view(text))));
  t.rounds = texts.size() - 1;
  if (with_positions) {
    std::vector<std::size_t> identity(t.levels[0].size());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
    t.positions.push_back(identity);
    for (std::size_t k = 1; k < t.levels.size(); ++k) {
      const auto r = revert(t.levels[k - 1], t.levels[k]);
      std::vector<std::size_t> pos;
      for (const std::size_t i : r.kept_indices) pos.push_back(t.positions[k - 1][i]);
      t.positions.push_back(pos);
    }
  }
  return t;
}

std::vector<double> opacities(const SaliencyMap& map, std::size_t p = 0) {
  std::vector<double> out;
  for (const auto& s : map.paragraphs.at(p)) out.push_back(s.opacity);
  return out;
}

std::map<std::string, double> opacity_by_word(const SaliencyMap& map, const Document& doc) {
  std::map<std::string, double> out;
  const auto pieces = split_pieces(doc.paragraphs[0].tokens);
  // First occurrence wins.
  for (std::size_t i = 0; i < pieces.size(); ++i) out.emplace(pieces[i].text, map.paragraphs[0][i].opacity);
  return out;
}

OpacityConfig wf(double target) {
  OpacityConfig c;
  c.method = SaliencyMethod::wf_tsm;
  c.wf_faded_fraction_target = target;
  return c;
}

}  // namespace

TEST_CASE("opacity_for examples") {
  const OpacityConfig cfg;
  CHECK(opacity_for(RoundLabel::kept_label(), 4, cfg) == 1.0);
  CHECK(opacity_for(RoundLabel::kept_label(), 0, cfg) == 1.0);
  CHECK(opacity_for(RoundLabel::removed_at(1), 4, cfg) == doctest::Approx(0.30).epsilon(1e-12));
  CHECK(opacity_for(RoundLabel::removed_at(4), 4, cfg) == doctest::Approx(0.825).epsilon(1e-12));
  CHECK_THROWS_AS(opacity_for(RoundLabel::removed_at(5), 4, cfg), std::invalid_argument);
}

TEST_CASE("property: later cuts are more opaque, all within [floor, 1)") {
  const OpacityConfig cfg;
  for (std::size_t total = 1; total <= 12; ++total) {
    double prev = 0.0;
    for (std::size_t r = 1; r <= total; ++r) {
      const double o = opacity_for(RoundLabel::removed_at(r), total, cfg);
      CHECK(o >= cfg.floor);
      CHECK(o < 1.0);
      CHECK(o > prev);
      prev = o;
    }
  }
}

TEST_CASE("labels serialize and parse") {
  for (const auto& l : {SaliencyLabel::kept(), SaliencyLabel::removed_at(3), SaliencyLabel::band(2)}) {
    CHECK(SaliencyLabel::parse(l.to_string()) == l);
  }
  CHECK(SaliencyLabel::removed_at(1).to_string() == "removed_at_round_1");
  CHECK_FALSE(SaliencyLabel::parse("removed_at_round_").has_value());
  CHECK_FALSE(SaliencyLabel::parse("removed_at_round_0").has_value());
  CHECK_FALSE(SaliencyLabel::parse("gone").has_value());
}

TEST_CASE("map_gp: zero-round trace is fully opaque") {
  const auto doc = segment("Some words here.");
  LevelTrace t = trace_from_levels({"Some words here."}, true);
  const auto map = map_gp({t}, doc, {});
  for (const double o : opacities(map)) CHECK(o == 1.0);
  CHECK(map.faded_fraction == 0.0);
}

TEST_CASE("map_gp: two rounds") {
  const auto doc = segment("a b c");
  for (const bool positions : {true, false}) {
    const auto t = trace_from_levels({"a b c", "a c", "a"}, positions);
    const auto map = map_gp({t}, doc, {});
    const auto o = opacities(map);
    REQUIRE(o.size() == 3);
    CHECK(o[0] == 1.0);
    CHECK(o[1] == doctest::Approx(0.30));
    CHECK(o[2] == doctest::Approx(0.30 + 0.70 / 2));
    CHECK(map.faded_fraction == doctest::Approx(2.0 / 3.0));
  }
}

TEST_CASE("map_gp: deforestation paragraph") {
  const auto levels = testing::deforestation_levels();
  const auto doc = segment(levels[0]);
  const auto map = map_gp({trace_from_levels(levels, true)}, doc, {});
  const auto by_word = opacity_by_word(map, doc);
  for (const char* w : {"as", "previously", "explained"}) CHECK(by_word.at(w) == doctest::Approx(0.30));
  for (const char* w : {"Deforestation", "speeds", "loss", "nutrients"}) CHECK(by_word.at(w) == 1.0);
  for (const auto& row : map.paragraphs) {
    for (const auto& s : row) CHECK(s.opacity >= 0.30 - 1e-12);
  }
}

TEST_CASE("map_gp: nesting violations surface") {
  const auto doc = segment("a b");
  LevelTrace t;
  t.levels = {{"a", "b"}, {"b", "a"}};
  CHECK_THROWS_AS(map_gp({t}, doc, {}), NestingViolation);
}

TEST_CASE("frequency_key") {
  CHECK(frequency_key("The") == "the");
  CHECK(frequency_key("(land),") == "land");
  CHECK(frequency_key("—") == "");
  CHECK(frequency_key("it's") == "it's");
  CHECK(frequency_key("Café") == "café");
}

TEST_CASE("map_wf: threshold examples") {
  SUBCASE("all distinct: a single class overshoots, nothing fades") {
    const auto doc = segment("alpha beta gamma delta");
    const auto map = map_wf(doc, wf(0.5));
    for (const double o : opacities(map)) CHECK(o == 1.0);
  }
  SUBCASE("a a a b: the top class covers 75%, nothing fades") {
    const auto doc = segment("a a a b");
    const auto map = map_wf(doc, wf(0.5));
    for (const double o : opacities(map)) CHECK(o == 1.0);
  }
  SUBCASE("a a b c: the top class covers exactly half") {
    const auto doc = segment("a a b c");
    const auto map = map_wf(doc, wf(0.5));
    CHECK(opacities(map) == std::vector<double>{0.30, 0.30, 1.0, 1.0});
    CHECK(map.paragraphs[0][0].label == SaliencyLabel::band(1));
    CHECK(map.faded_fraction == 0.5);
  }
  SUBCASE("counts are case- and punctuation-insensitive") {
    const auto doc = segment("The cat. the dog, THE end");
    const auto map = map_wf(doc, wf(0.5));
    const auto by_word = opacity_by_word(map, doc);
    CHECK(by_word.at("The") < 1.0);
    CHECK(by_word.at("cat") == 1.0);
  }
  SUBCASE("empty document") {
    const auto map = map_wf(segment(""), wf(0.5));
    CHECK(map.paragraphs.empty());
    CHECK(map.faded_fraction == 0.0);
  }
}

TEST_CASE("map_wf: more frequent words are never more opaque") {
  std::mt19937_64 rng(21);
  std::geometric_distribution<int> zipfish(0.15);
  std::string text;
  for (int i = 0; i < 400; ++i) text += "w" + std::to_string(zipfish(rng)) + (i % 37 == 36 ? "\n\n" : " ");
  const auto doc = segment(text);
  for (const double target : {0.2, 0.35, 0.5, 0.65, 0.8}) {
    const auto map = map_wf(doc, wf(target));
    std::map<std::string, std::size_t> counts;
    std::map<std::string, double> opacity;
    for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
      const auto pieces = split_pieces(doc.paragraphs[p].tokens);
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        ++counts[pieces[i].text];
        opacity[pieces[i].text] = map.paragraphs[p][i].opacity;
      }
    }
    for (const auto& [a, ca] : counts) {
      for (const auto& [b, cb] : counts) {
        if (ca > cb) CHECK(opacity[a] <= opacity[b]);
      }
    }
    CHECK(map.faded_fraction <= target + 0.05 + 1e-12);
  }
}

TEST_CASE("opacity config validation") {
  OpacityConfig c;
  c.floor = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = wf(1.5);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
