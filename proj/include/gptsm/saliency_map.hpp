#pragma once

// Per-piece opacity derived from compression traces (GP-TSM / NGP-TSM) or
// from document-level unigram frequency (WF-TSM).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gptsm/compression_engine.hpp"
#include "gptsm/text_model.hpp"

namespace gptsm {

enum class SaliencyMethod { gp_tsm, ngp_tsm, wf_tsm };

struct SaliencyLabel {
  enum class Kind { kept, removed, frequency_band };
  Kind kind = Kind::kept;
  /// Removal round (1-based) or frequency band (1 = most frequent).
  std::size_t n = 0;

  static SaliencyLabel kept() { return {}; }
  static SaliencyLabel removed_at(std::size_t round) { return {Kind::removed, round}; }
  static SaliencyLabel band(std::size_t b) { return {Kind::frequency_band, b}; }

  /// "kept", "removed_at_round_<r>" or "frequency_band_<b>".
  std::string to_string() const;
  static std::optional<SaliencyLabel> parse(std::string_view text);

  friend bool operator==(const SaliencyLabel&, const SaliencyLabel&) = default;
};

struct PieceSaliency {
  SaliencyLabel label;
  double opacity = 1.0;

  friend bool operator==(const PieceSaliency&, const PieceSaliency&) = default;
};

struct SaliencyMap {
  /// Parallel to split_pieces(paragraph.tokens) for every paragraph.
  std::vector<std::vector<PieceSaliency>> paragraphs;
  /// Faded word pieces / all word pieces (0 when there are none).
  double faded_fraction = 0.0;
};

struct OpacityConfig {
  double floor = 0.30;
  SaliencyMethod method = SaliencyMethod::gp_tsm;
  /// Target faded fraction for WF-TSM; 0.5 when unset.
  std::optional<double> wf_faded_fraction_target;
  std::size_t wf_bands = 3;
  /// A frequency class may overshoot the target by at most this much.
  double wf_tolerance = 0.05;

  void validate() const;
};

/// kept -> 1; removed at round r of R -> floor + (r - 1) * (1 - floor) / R.
double opacity_for(const RoundLabel& label, std::size_t total_rounds, const OpacityConfig& config);

SaliencyMap map_gp(const std::vector<LevelTrace>& traces, const Document& doc,
                   const OpacityConfig& config);

SaliencyMap map_wf(const Document& doc, const OpacityConfig& config);

/// Lowercased word with leading/trailing non-alphanumerics stripped; empty for
/// tokens without letters or digits.
std::string frequency_key(std::string_view token_text);

double faded_fraction(const SaliencyMap& map, const Document& doc);

}  // namespace gptsm
