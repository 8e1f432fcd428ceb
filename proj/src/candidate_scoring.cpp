#include "gptsm/candidate_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gptsm {

void ScoringConfig::validate() const {
  if (!(target_length_ratio > 0.0 && target_length_ratio <= 1.0)) {
    throw std::invalid_argument("target_length_ratio must be in (0, 1]");
  }
}

double semantic_fidelity(const EmbeddingVector& original, const EmbeddingVector& candidate) {
  const double c = std::clamp(cosine(original, candidate), -1.0, 1.0);
  return (c + 1.0) / 2.0;
}

double semantic_fidelity(Gateway& gateway, std::string_view original, std::string_view candidate) {
  return semantic_fidelity(gateway.embed(original), gateway.embed(candidate));
}

double length_score(std::size_t prev_word_count, std::size_t cand_word_count,
                    const ScoringConfig& config) {
  if (prev_word_count == 0) throw std::invalid_argument("length_score: previous level is empty");
  const double r = static_cast<double>(cand_word_count) / static_cast<double>(prev_word_count);
  const double t = config.target_length_ratio;
  return std::max(0.0, 1.0 - std::abs(r - t) / t);
}

double paraphrase_score(std::size_t paraphrase_count) {
  return 1.0 / (1.0 + static_cast<double>(paraphrase_count));
}

double grade_to_score(std::optional<char> grade) {
  if (!grade) return 0.5;
  switch (*grade) {
    case 'A': return 1.0;
    case 'B': return 0.5;
    case 'C': return 0.0;
    default: return 0.5;
  }
}

double grammar_score(Gateway& gateway, std::string_view candidate, const std::string& model) {
  return grade_to_score(gateway.grade(candidate, model));
}

CandidateScore combine_scores(double semantic, double length, double paraphrase,
                              std::optional<double> grammar) {
  CandidateScore s{semantic, length, paraphrase, grammar, 0.0};
  double sum = semantic + length + paraphrase;
  double count = 3.0;
  if (grammar) {
    sum += *grammar;
    count += 1.0;
  }
  s.overall = sum / count;
  return s;
}

std::size_t select_best(std::span<const ScoredCandidate> candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_best: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& b = candidates[best];
    if (c.score.overall > b.score.overall ||
        (c.score.overall == b.score.overall && c.word_count < b.word_count)) {
      best = i;
    }
  }
  return best;
}

}  // namespace gptsm
