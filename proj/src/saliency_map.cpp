#include "gptsm/saliency_map.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <limits>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace gptsm {
namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::optional<std::size_t> parse_suffix_number(std::string_view text, std::string_view prefix) {
  if (!text.starts_with(prefix)) return std::nullopt;
  const auto digits = text.substr(prefix.size());
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || n == 0) return std::nullopt;
  return n;
}

}  // namespace

std::string SaliencyLabel::to_string() const {
  switch (kind) {
    case Kind::kept: return "kept";
    case Kind::removed: return "removed_at_round_" + std::to_string(n);
    case Kind::frequency_band: return "frequency_band_" + std::to_string(n);
  }
  return "kept";
}

std::optional<SaliencyLabel> SaliencyLabel::parse(std::string_view text) {
  if (text == "kept") return kept();
  if (auto r = parse_suffix_number(text, "removed_at_round_")) return removed_at(*r);
  if (auto b = parse_suffix_number(text, "frequency_band_")) return band(*b);
  return std::nullopt;
}

void OpacityConfig::validate() const {
  if (!(floor > 0.0 && floor < 1.0)) throw std::invalid_argument("opacity floor must be in (0, 1)");
  if (wf_faded_fraction_target &&
      !(*wf_faded_fraction_target > 0.0 && *wf_faded_fraction_target < 1.0)) {
    throw std::invalid_argument("WF-TSM target fraction must be in (0, 1)");
  }
  if (wf_bands == 0) throw std::invalid_argument("WF-TSM needs at least one band");
}

double opacity_for(const RoundLabel& label, std::size_t total_rounds, const OpacityConfig& config) {
  if (label.kept()) return 1.0;
  const std::size_t r = label.removed_at_round;
  if (r > total_rounds) {
    throw std::invalid_argument("removal round " + std::to_string(r) + " exceeds total rounds " +
                                std::to_string(total_rounds));
  }
  return config.floor +
         static_cast<double>(r - 1) * (1.0 - config.floor) / static_cast<double>(total_rounds);
}

double faded_fraction(const SaliencyMap& map, const Document& doc) {
  std::size_t words = 0;
  std::size_t faded = 0;
  for (std::size_t p = 0; p < doc.paragraphs.size() && p < map.paragraphs.size(); ++p) {
    const auto pieces = split_pieces(doc.paragraphs[p].tokens);
    for (std::size_t i = 0; i < pieces.size() && i < map.paragraphs[p].size(); ++i) {
      if (!is_word_piece(pieces[i])) continue;
      ++words;
      if (map.paragraphs[p][i].opacity < 1.0) ++faded;
    }
  }
  return words == 0 ? 0.0 : static_cast<double>(faded) / static_cast<double>(words);
}

SaliencyMap map_gp(const std::vector<LevelTrace>& traces, const Document& doc,
                   const OpacityConfig& config) {
  config.validate();
  if (traces.size() != doc.paragraphs.size()) {
    throw std::invalid_argument("map_gp: one trace per paragraph required");
  }
  SaliencyMap map;
  for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
    const auto pieces = split_pieces(doc.paragraphs[p].tokens);
    const LevelTrace& trace = traces[p];

    std::vector<RoundLabel> labels;
    const bool have_positions = trace.positions.size() == trace.levels.size() &&
                                !trace.positions.empty() &&
                                trace.positions.front().size() == pieces.size();
    if (have_positions) {
      labels = labels_from_positions(pieces.size(), trace.positions);
    } else if (!trace.levels.empty() && trace.levels.front().size() == pieces.size()) {
      labels = align_levels(trace.levels);
    } else {
      labels.assign(pieces.size(), RoundLabel::kept_label());
    }
    const std::size_t rounds = trace.levels.empty() ? 0 : trace.levels.size() - 1;

    std::vector<PieceSaliency> row;
    row.reserve(pieces.size());
    for (const auto& label : labels) {
      row.push_back({label.kept() ? SaliencyLabel::kept()
                                  : SaliencyLabel::removed_at(label.removed_at_round),
                     opacity_for(label, rounds, config)});
    }
    map.paragraphs.push_back(std::move(row));
  }
  map.faded_fraction = faded_fraction(map, doc);
  return map;
}

std::string frequency_key(std::string_view token_text) {
  const Token token{std::string(token_text), {}};
  const auto pieces = split_pieces(std::span<const Token>(&token, 1));
  const auto core = std::find_if(pieces.begin(), pieces.end(),
                                 [](const Piece& p) { return p.kind == PieceKind::core; });
  if (core == pieces.end()) return {};
  std::string_view text = core->text;
  const auto is_strippable = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && !is_ascii_alnum(u);
  };
  while (!text.empty() && is_strippable(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_strippable(text.back())) text.remove_suffix(1);
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

SaliencyMap map_wf(const Document& doc, const OpacityConfig& config) {
  config.validate();
  const double target = config.wf_faded_fraction_target.value_or(0.5);

  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& p : doc.paragraphs) {
    for (const auto& t : p.tokens) {
      auto key = frequency_key(t.text);
      if (key.empty()) continue;
      ++counts[key];
      ++total;
    }
  }

  // Tokens per frequency class, most frequent class first.
  std::map<std::size_t, std::size_t, std::greater<>> class_mass;
  for (const auto& [word, count] : counts) class_mass[count] += count;

  // Fade every class with count >= threshold. Candidate thresholds are the
  // class boundaries; pick the fraction closest to the target among those not
  // overshooting it by more than the tolerance (ties favour fading less).
  std::size_t threshold = std::numeric_limits<std::size_t>::max();
  if (total > 0) {
    double best_distance = target;  // fading nothing
    std::size_t cumulative = 0;
    for (const auto& [count, mass] : class_mass) {
      cumulative += mass;
      const double fraction = static_cast<double>(cumulative) / static_cast<double>(total);
      if (fraction > target + config.wf_tolerance + 1e-12) break;
      const double distance = std::abs(fraction - target);
      if (distance < best_distance - 1e-12) {
        best_distance = distance;
        threshold = count;
      }
    }
  }

  // Faded classes split into bands by frequency rank; band 1 is the most
  // frequent and the lightest.
  std::vector<std::size_t> faded_counts;
  for (const auto& [count, mass] : class_mass) {
    if (count >= threshold) faded_counts.push_back(count);
  }
  const std::size_t m = faded_counts.size();
  const std::size_t bands = std::min(config.wf_bands, std::max<std::size_t>(m, 1));
  std::unordered_map<std::size_t, std::size_t> band_of_count;
  for (std::size_t i = 0; i < m; ++i) band_of_count[faded_counts[i]] = i * bands / m;

  SaliencyMap map;
  for (const auto& p : doc.paragraphs) {
    const auto pieces = split_pieces(p.tokens);
    std::vector<PieceSaliency> row;
    row.reserve(pieces.size());
    for (const auto& piece : pieces) {
      const auto key = frequency_key(p.tokens[piece.token_index].text);
      PieceSaliency s;
      if (!key.empty()) {
        const std::size_t count = counts.at(key);
        if (count >= threshold) {
          const std::size_t band = band_of_count.at(count);
          s.label = SaliencyLabel::band(band + 1);
          s.opacity = config.floor + static_cast<double>(band) * (1.0 - config.floor) /
                                         static_cast<double>(bands);
        }
      }
      row.push_back(s);
    }
    map.paragraphs.push_back(std::move(row));
  }
  map.faded_fraction = faded_fraction(map, doc);
  return map;
}

}  // namespace gptsm
