#include "gptsm/compression_engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "gptsm/digest.hpp"

namespace gptsm {
namespace {

LevelTrace initial_trace(const Paragraph& paragraph, const std::vector<Piece>& pieces) {
  LevelTrace trace;
  trace.paragraph_index = paragraph.index;
  trace.levels.push_back(piece_texts(pieces));
  std::vector<std::size_t> identity(pieces.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  trace.positions.push_back(std::move(identity));
  return trace;
}

std::size_t count_words_at(const std::vector<Piece>& pieces,
                           const std::vector<std::size_t>& positions) {
  return static_cast<std::size_t>(std::count_if(
      positions.begin(), positions.end(), [&](std::size_t i) { return is_word_piece(pieces[i]); }));
}

struct Candidate {
  std::vector<std::size_t> positions;  // into levels[0]
  std::size_t paraphrase_count = 0;
};

}  // namespace

EngineConfig EngineConfig::normalized() const {
  if (sample_count == 0) throw std::invalid_argument("sample_count must be positive");
  if (max_rounds == 0) throw std::invalid_argument("max_rounds must be positive");
  scoring.validate();
  EngineConfig out = *this;
  if (mode == CompressionMode::ngp) out.scoring.include_grammar = false;
  if (out.parallelism == 0) out.parallelism = 1;
  return out;
}

std::vector<std::string> level_texts(const LevelTrace& trace, const Paragraph& paragraph) {
  const auto pieces = split_pieces(paragraph.tokens);
  std::vector<std::string> out;
  for (const auto& pos : trace.positions) out.push_back(join_pieces(pieces, pos));
  return out;
}

LevelTrace compress_paragraph(const Paragraph& paragraph, const EngineConfig& raw_config,
                              Gateway& gateway) {
  const EngineConfig config = raw_config.normalized();
  const auto pieces = split_pieces(paragraph.tokens);
  LevelTrace trace = initial_trace(paragraph, pieces);
  if (count_word_pieces(pieces) == 0) return trace;

  const std::string original_text = join_pieces(pieces);
  const std::string paragraph_key = sha256_hex(original_text);
  std::optional<EmbeddingVector> original_embedding;

  for (std::size_t round = 1; round <= config.max_rounds; ++round) {
    const auto& current_positions = trace.positions.back();
    const auto& current_words = trace.levels.back();
    const std::string current_text = join_pieces(pieces, current_positions);

    ChatRequest request = make_chat_request(config.shorten_prompt(), current_text, config.model,
                                            config.temperature, config.sample_count);
    request.paragraph_key = paragraph_key;
    request.round = round;
    const auto responses = gateway.complete(request);

    std::vector<Candidate> candidates;
    for (const auto& response : responses) {
      const auto response_words = piece_texts(split_pieces(response));
      const auto reverted = revert(current_words, response_words);
      if (reverted.kept_indices.size() == current_words.size()) continue;  // refusal
      Candidate c;
      c.paraphrase_count = reverted.paraphrase_count;
      for (const std::size_t i : reverted.kept_indices) c.positions.push_back(current_positions[i]);
      if (count_words_at(pieces, c.positions) == 0) continue;  // deleted everything
      candidates.push_back(std::move(c));
    }
    if (candidates.empty()) break;

    if (!original_embedding) original_embedding = gateway.embed(original_text);
    const std::size_t current_word_count = count_words_at(pieces, current_positions);
    std::vector<ScoredCandidate> scored;
    scored.reserve(candidates.size());
    for (const auto& c : candidates) {
      ScoredCandidate s;
      s.text = join_pieces(pieces, c.positions);
      s.word_count = count_words_at(pieces, c.positions);
      const double semantic = semantic_fidelity(*original_embedding, gateway.embed(s.text));
      const double length = length_score(current_word_count, s.word_count, config.scoring);
      const double paraphrase = paraphrase_score(c.paraphrase_count);
      std::optional<double> grammar;
      if (config.scoring.include_grammar) grammar = grammar_score(gateway, s.text, config.model);
      s.score = combine_scores(semantic, length, paraphrase, grammar);
      scored.push_back(std::move(s));
    }

    const std::size_t best = select_best(scored);
    Words next_words;
    for (const std::size_t i : candidates[best].positions) next_words.push_back(pieces[i].text);
    trace.levels.push_back(std::move(next_words));
    trace.positions.push_back(candidates[best].positions);
    trace.per_round_scores.push_back(scored[best].score);
    ++trace.rounds;
  }
  return trace;
}

std::vector<LevelTrace> compress_document(const Document& doc, const EngineConfig& raw_config,
                                          Gateway& gateway) {
  const EngineConfig config = raw_config.normalized();
  const std::size_t n = doc.paragraphs.size();
  std::vector<LevelTrace> traces(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr hard_failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      {
        std::lock_guard lock(failure_mutex);
        if (hard_failure) return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const Paragraph& p = doc.paragraphs[i];
      try {
        traces[i] = compress_paragraph(p, config, gateway);
      } catch (const TransportError& e) {
        traces[i] = initial_trace(p, split_pieces(p.tokens));
        traces[i].diagnostic = std::string("transport error: ") + e.what();
      } catch (const BackendError& e) {
        traces[i] = initial_trace(p, split_pieces(p.tokens));
        traces[i].diagnostic = std::string("backend error: ") + e.what();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!hard_failure) hard_failure = std::current_exception();
        return;
      }
    }
  };

  const std::size_t thread_count = std::min(config.parallelism, n);
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
  }
  if (hard_failure) std::rethrow_exception(hard_failure);
  return traces;
}

}  // namespace gptsm
