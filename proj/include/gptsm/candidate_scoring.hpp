#pragma once

// Four-component heuristic quality score for post-reversion candidates.
// Every component lies in [0, 1]; the overall score is their unweighted mean.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gptsm/llm_gateway.hpp"

namespace gptsm {

struct ScoringConfig {
  double target_length_ratio = 0.85;
  bool include_grammar = true;

  /// Throws std::invalid_argument unless target_length_ratio is in (0, 1].
  void validate() const;
};

struct CandidateScore {
  double semantic_fidelity = 0.0;
  double length_score = 0.0;
  double paraphrase_score = 0.0;
  std::optional<double> grammar_score;
  double overall = 0.0;
};

/// Cosine similarity mapped from [-1, 1] onto [0, 1] as (c + 1) / 2.
double semantic_fidelity(const EmbeddingVector& original, const EmbeddingVector& candidate);
double semantic_fidelity(Gateway& gateway, std::string_view original, std::string_view candidate);

/// Linear tent peaked at the target ratio: max(0, 1 - |r - t| / t).
double length_score(std::size_t prev_word_count, std::size_t cand_word_count,
                    const ScoringConfig& config);

/// 1 / (1 + paraphrase_count).
double paraphrase_score(std::size_t paraphrase_count);

/// A -> 1, B -> 0.5, C -> 0; an unrecognised grade scores the neutral 0.5.
double grade_to_score(std::optional<char> grade);
double grammar_score(Gateway& gateway, std::string_view candidate, const std::string& model);

CandidateScore combine_scores(double semantic, double length, double paraphrase,
                              std::optional<double> grammar);

struct ScoredCandidate {
  std::string text;
  std::size_t word_count = 0;
  CandidateScore score;
};

/// Index of the best candidate: highest overall, then fewer words, then the
/// lowest index. Requires a non-empty list.
std::size_t select_best(std::span<const ScoredCandidate> candidates);

}  // namespace gptsm
