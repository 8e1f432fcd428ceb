#pragma once

// Recursive extractive compression of paragraphs.
//
// Each round prompts for `sample_count` shortenings of the current level,
// reverts insertions and substitutions, drops candidates that delete nothing,
// scores the survivors and keeps the best one as the next level. The loop
// stops when no sample deletes anything (a refusal) or after `max_rounds`.

#include <cstddef>
#include <string>
#include <vector>

#include "gptsm/candidate_scoring.hpp"
#include "gptsm/diff_align.hpp"
#include "gptsm/llm_gateway.hpp"
#include "gptsm/text_model.hpp"

namespace gptsm {

enum class CompressionMode { gp, ngp };

struct EngineConfig {
  std::size_t sample_count = 8;
  std::size_t max_rounds = 10;
  CompressionMode mode = CompressionMode::gp;
  ScoringConfig scoring;
  std::string model = "gpt-4";
  double temperature = 0.7;
  /// Paragraphs compressed concurrently.
  std::size_t parallelism = 4;

  /// Copy with NGP implications applied (no grammar score) after validation.
  EngineConfig normalized() const;
  PromptKind shorten_prompt() const {
    return mode == CompressionMode::gp ? PromptKind::shorten_gp : PromptKind::shorten_ngp;
  }
};

struct LevelTrace {
  std::size_t paragraph_index = 0;
  /// levels[0] is the original paragraph's pieces; levels[k] is round k's pick.
  std::vector<Words> levels;
  /// positions[k][m]: index into levels[0] of word m of levels[k].
  std::vector<std::vector<std::size_t>> positions;
  std::vector<CandidateScore> per_round_scores;
  std::size_t rounds = 0;
  /// Non-empty when the paragraph failed and was left uncompressed.
  std::string diagnostic;
};

/// Level texts, normalized the way they were sent to the model.
std::vector<std::string> level_texts(const LevelTrace& trace, const Paragraph& paragraph);

LevelTrace compress_paragraph(const Paragraph& paragraph, const EngineConfig& config,
                              Gateway& gateway);

/// One trace per paragraph, in order. Empty paragraphs and paragraphs whose
/// gateway calls fail get zero-round traces (the latter with a diagnostic).
/// OfflineCacheMiss is not absorbed.
std::vector<LevelTrace> compress_document(const Document& doc, const EngineConfig& config,
                                          Gateway& gateway);

}  // namespace gptsm
