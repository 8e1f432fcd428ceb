#pragma once

// HTML, ANSI and JSON renderings of a saliency-annotated document. Every
// format carries the source text unchanged; only styling is added.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gptsm/saliency_map.hpp"
#include "gptsm/text_model.hpp"

namespace gptsm {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Theme {
  Rgb foreground{0, 0, 0};
  Rgb background{255, 255, 255};
  std::string font_family = "Georgia, 'Times New Roman', serif";
};

enum class RenderFormat { html, ansi, json };

struct RenderPlan {
  const Document& doc;
  const SaliencyMap& map;
  Theme theme;
  std::string title = "Skim view";
  /// Use the 256-colour grayscale ramp instead of 24-bit ANSI colour.
  bool ansi_256 = false;
};

/// Foreground blended toward the background: round(o * fg + (1 - o) * bg).
Rgb blend(const Theme& theme, double opacity);

std::string render_html(const RenderPlan& plan);
std::string render_ansi(const RenderPlan& plan);
std::string render_json(const RenderPlan& plan);

/// Two renderings of the same document side by side in one HTML page.
std::string render_compare_html(const RenderPlan& left, std::string_view left_caption,
                                const RenderPlan& right, std::string_view right_caption);

/// One JSON entry. Pieces with empty text carry whitespace that does not
/// follow any piece (leading whitespace, empty paragraphs).
struct RenderedPiece {
  std::string text;
  std::string suffix;
  SaliencyLabel label;
  double opacity = 1.0;

  friend bool operator==(const RenderedPiece&, const RenderedPiece&) = default;
};

using RenderedDocument = std::vector<std::vector<RenderedPiece>>;

/// The payload render_json serializes. A paragraph's separator is appended to
/// the suffix of its last piece.
RenderedDocument flatten(const RenderPlan& plan);
RenderedDocument parse_rendered_json(std::string_view json_text);

/// Concatenation of text + suffix over all pieces.
std::string rendered_source(const RenderedDocument& doc);

}  // namespace gptsm
