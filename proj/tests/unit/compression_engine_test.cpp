#include "gptsm/compression_engine.hpp"

#include "doctest.h"
#include "test_support.hpp"

using namespace gptsm;

namespace {

GatewayConfig no_retry() {
  GatewayConfig c;
  c.max_retries = 0;
  c.retry_backoff_seconds = 0.0;
  return c;
}

Paragraph first_paragraph(const std::string& text) { return segment(text).paragraphs.at(0); }

std::shared_ptr<MockBackend> deforestation_mock() {
  return std::make_shared<MockBackend>(
      MockBackend::from_file(testing::fixture_path("deforestation_script.json")));
}

class DownBackend : public Backend {
 public:
  std::vector<std::string> complete(const ChatRequest&, std::span<const std::size_t>) override {
    throw TransportError("unreachable");
  }
  EmbeddingVector embed(std::string_view, std::string_view) override {
    throw TransportError("unreachable");
  }
};

// Counts grade prompts on top of a scripted mock.
class CountingBackend : public MockBackend {
 public:
  explicit CountingBackend(MockBackend base) : MockBackend(std::move(base)) {}
  std::vector<std::string> complete(const ChatRequest& r, std::span<const std::size_t> idx) override {
    if (r.kind == PromptKind::grammar_grade) ++grade_calls;
    return MockBackend::complete(r, idx);
  }
  int grade_calls = 0;
};

}  // namespace

TEST_CASE("echo backend: every sample is a refusal, zero rounds") {
  Gateway gw({}, std::make_shared<MockBackend>(MockBackend::echo()), nullptr);
  const auto p = first_paragraph("Forests play a critical role.");
  for (const std::size_t n : {1u, 8u}) {
    EngineConfig cfg;
    cfg.sample_count = n;
    const auto trace = compress_paragraph(p, cfg, gw);
    CHECK(trace.rounds == 0);
    CHECK(trace.levels.size() == 1);
    CHECK(trace.diagnostic.empty());
  }
}

TEST_CASE("deforestation script reproduces the four reference levels") {
  Gateway gw({}, deforestation_mock(), nullptr);
  const auto expected = testing::deforestation_levels();
  const auto p = first_paragraph(expected[0]);
  const auto trace = compress_paragraph(p, EngineConfig{}, gw);
  REQUIRE(trace.rounds == 4);
  const auto texts = level_texts(trace, p);
  REQUIRE(texts.size() == expected.size());
  for (std::size_t k = 0; k < texts.size(); ++k) {
    CHECK(testing::split_ws(texts[k]) == testing::split_ws(expected[k]));
  }
  CHECK(trace.per_round_scores.size() == 4);
  for (const auto& s : trace.per_round_scores) CHECK(s.paraphrase_score == 1.0);
}

TEST_CASE("each level is a subsequence of the previous one") {
  Gateway gw({}, deforestation_mock(), nullptr);
  const auto p = first_paragraph(testing::deforestation_levels()[0]);
  const auto trace = compress_paragraph(p, EngineConfig{}, gw);
  for (std::size_t k = 1; k < trace.levels.size(); ++k) {
    CHECK(is_subsequence(trace.levels[k], trace.levels[k - 1]));
    CHECK(trace.levels[k].size() < trace.levels[k - 1].size());
    CHECK(std::is_sorted(trace.positions[k].begin(), trace.positions[k].end()));
  }
}

TEST_CASE("a refusal at round k stops after k - 1 rounds") {
  const std::string l0 = "one two three four five six seven eight";
  for (std::size_t k = 1; k <= 4; ++k) {
    auto mock = std::make_shared<MockBackend>();
    Words words = testing::split_ws(l0);
    for (std::size_t r = 1; r < k; ++r) {
      words.pop_back();
      std::string next;
      for (const auto& w : words) next += (next.empty() ? "" : " ") + w;
      mock->add_shorten_any(l0, r, {next});
    }
    Gateway gw({}, mock, nullptr);
    const auto trace = compress_paragraph(first_paragraph(l0), EngineConfig{}, gw);
    CHECK(trace.rounds == k - 1);
  }
}

TEST_CASE("max_rounds caps the recursion") {
  const std::string l0 = "one two three four five six";
  auto mock = std::make_shared<MockBackend>();
  mock->add_shorten_any(l0, 1, {"one two three four five"});
  mock->add_shorten_any(l0, 2, {"one two three four"});
  mock->add_shorten_any(l0, 3, {"one two three"});
  Gateway gw({}, mock, nullptr);
  EngineConfig cfg;
  cfg.max_rounds = 2;
  CHECK(compress_paragraph(first_paragraph(l0), cfg, gw).rounds == 2);
}

TEST_CASE("candidates that delete every word are discarded") {
  const std::string l0 = "alpha beta.";
  auto mock = std::make_shared<MockBackend>();
  mock->add_shorten_any(l0, 1, {"."});
  Gateway gw({}, mock, nullptr);
  CHECK(compress_paragraph(first_paragraph(l0), EngineConfig{}, gw).rounds == 0);
}

TEST_CASE("insertions are reverted and counted") {
  const std::string l0 = "forests play a critical role in the land";
  auto mock = std::make_shared<MockBackend>();
  mock->add_shorten_any(l0, 1, {"forests play an important role"});
  Gateway gw({}, mock, nullptr);
  const auto p = first_paragraph(l0);
  const auto trace = compress_paragraph(p, EngineConfig{}, gw);
  REQUIRE(trace.rounds == 1);
  CHECK(level_texts(trace, p)[1] == "forests play a critical role");
  CHECK(trace.per_round_scores[0].paraphrase_score == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("best candidate wins: fewer paraphrases and closer length") {
  const std::string l0 = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11 w12 w13 w14 w15 w16 w17 w18 w19 w20";
  auto mock = std::make_shared<MockBackend>();
  // 17 of 20 words hits the 0.85 target exactly; 10 of 20 does not.
  const std::string close = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11 w12 w13 w14 w15 w16 w17";
  const std::string far = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10";
  mock->add_shorten_any(l0, 1, {far, close});
  Gateway gw({}, mock, nullptr);
  for (const auto& v : {l0, close, far}) mock->set_embedding(v, {1.0, 0.0});
  const auto p = first_paragraph(l0);
  const auto trace = compress_paragraph(p, EngineConfig{}, gw);
  REQUIRE(trace.rounds >= 1);
  CHECK(level_texts(trace, p)[1] == close);
}

TEST_CASE("NGP mode never asks for a grammar grade") {
  const auto levels = testing::deforestation_levels();
  MockBackend base;
  for (std::size_t r = 1; r < levels.size(); ++r) base.add_shorten_any(levels[0], r, {levels[r]});
  auto mock = std::make_shared<CountingBackend>(std::move(base));
  Gateway gw({}, mock, nullptr);
  EngineConfig cfg;
  cfg.mode = CompressionMode::ngp;
  const auto trace = compress_paragraph(first_paragraph(levels[0]), cfg, gw);
  CHECK(trace.rounds == 4);
  CHECK(mock->grade_calls == 0);
  for (const auto& s : trace.per_round_scores) CHECK_FALSE(s.grammar_score.has_value());

  cfg.mode = CompressionMode::gp;
  compress_paragraph(first_paragraph(levels[0]), cfg, gw);
  CHECK(mock->grade_calls > 0);
}

TEST_CASE("document: paragraphs are independent and ordered") {
  const auto levels = testing::deforestation_levels();
  const std::string text = levels[0] + "\n\nPlain words here.\n\n\n" + levels[0];
  const auto doc = segment(text);
  REQUIRE(doc.paragraphs.size() == 3);
  Gateway gw({}, deforestation_mock(), nullptr);
  EngineConfig cfg;
  cfg.parallelism = 3;
  const auto traces = compress_document(doc, cfg, gw);
  REQUIRE(traces.size() == 3);
  CHECK(traces[0].rounds == 4);
  CHECK(traces[1].rounds == 0);
  CHECK(traces[2].rounds == 4);
  CHECK(traces[0].levels == traces[2].levels);
  for (std::size_t i = 0; i < 3; ++i) CHECK(traces[i].paragraph_index == i);
}

TEST_CASE("document: transport failures leave paragraphs uncompressed") {
  Gateway gw(no_retry(), std::make_shared<DownBackend>(), nullptr);
  const auto doc = segment("First para.\n\nSecond para.");
  const auto traces = compress_document(doc, EngineConfig{}, gw);
  REQUIRE(traces.size() == 2);
  for (const auto& t : traces) {
    CHECK(t.rounds == 0);
    CHECK(t.diagnostic.find("transport") != std::string::npos);
  }
}

TEST_CASE("document: an offline cache miss is not absorbed") {
  Gateway gw({}, nullptr, nullptr);
  CHECK_THROWS_AS(compress_document(segment("Words here."), EngineConfig{}, gw), OfflineCacheMiss);
}

TEST_CASE("document: runs are deterministic") {
  const auto levels = testing::deforestation_levels();
  const auto doc = segment(levels[0] + "\n\n" + levels[1]);
  Gateway a({}, deforestation_mock(), nullptr);
  Gateway b({}, deforestation_mock(), nullptr);
  const auto ta = compress_document(doc, EngineConfig{}, a);
  const auto tb = compress_document(doc, EngineConfig{}, b);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].levels == tb[i].levels);
    CHECK(ta[i].positions == tb[i].positions);
  }
}

TEST_CASE("config validation") {
  EngineConfig cfg;
  cfg.sample_count = 0;
  CHECK_THROWS_AS(cfg.normalized(), std::invalid_argument);
  cfg = {};
  cfg.scoring.target_length_ratio = 0.0;
  CHECK_THROWS_AS(cfg.normalized(), std::invalid_argument);
  cfg = {};
  cfg.mode = CompressionMode::ngp;
  CHECK_FALSE(cfg.normalized().scoring.include_grammar);
}
