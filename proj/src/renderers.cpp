#include "gptsm/renderers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace gptsm {
namespace {

std::uint8_t mix(std::uint8_t fg, std::uint8_t bg, double opacity) {
  const double v = opacity * fg + (1.0 - opacity) * bg;
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::string css_rgb(const Rgb& c) {
  return "rgb(" + std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b) + ")";
}

void append_escaped(std::string& out, std::string_view text) {
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
}

void check_shape(const RenderPlan& plan) {
  if (plan.map.paragraphs.size() != plan.doc.paragraphs.size()) {
    throw std::invalid_argument("saliency map does not match the document's paragraphs");
  }
}

std::vector<Piece> pieces_checked(const RenderPlan& plan, std::size_t p) {
  auto pieces = split_pieces(plan.doc.paragraphs[p].tokens);
  if (pieces.size() != plan.map.paragraphs[p].size()) {
    throw std::invalid_argument("saliency map row " + std::to_string(p) +
                                " does not match the paragraph's pieces");
  }
  return pieces;
}

// Escaped paragraphs, separators and leading whitespace; the part of the page
// that carries the source text.
std::string article_body(const RenderPlan& plan) {
  check_shape(plan);
  std::string out;
  append_escaped(out, plan.doc.leading);
  for (std::size_t p = 0; p < plan.doc.paragraphs.size(); ++p) {
    const auto& paragraph = plan.doc.paragraphs[p];
    const auto pieces = pieces_checked(plan, p);
    if (!pieces.empty()) {
      out += "<p>";
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& s = plan.map.paragraphs[p][i];
        out += "<span style=\"color:";
        out += css_rgb(blend(plan.theme, s.opacity));
        out += "\" data-label=\"";
        out += s.label.to_string();
        out += "\">";
        append_escaped(out, pieces[i].text);
        out += "</span>";
        append_escaped(out, pieces[i].suffix);
      }
      out += "</p>";
    }
    append_escaped(out, paragraph.trailing_separator);
  }
  return out;
}

std::string page_head(const RenderPlan& plan, std::string_view extra_css) {
  std::string out = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>";
  append_escaped(out, plan.title);
  out += "</title>\n<style>\n";
  out += "body{margin:2em auto;max-width:44em;padding:0 1em;line-height:1.6;background:";
  out += css_rgb(plan.theme.background);
  out += ";color:";
  out += css_rgb(plan.theme.foreground);
  out += ";font-family:";
  append_escaped(out, plan.theme.font_family);
  out += "}\n";
  out += ".gptsm-doc{white-space:pre-wrap}\n";
  out += ".gptsm-doc p{display:inline;margin:0}\n";
  out += ".gptsm-controls{font-family:sans-serif;font-size:0.85em;margin-bottom:1.5em}\n";
  out += ".gptsm-toggle:checked ~ * .gptsm-doc span,.gptsm-toggle:checked ~ .gptsm-doc span{color:";
  out += css_rgb(plan.theme.foreground);
  out += "!important}\n";
  out += extra_css;
  out += "</style>\n</head>\n<body>\n";
  out += "<input type=\"checkbox\" id=\"gptsm-full\" class=\"gptsm-toggle\">"
         "<label class=\"gptsm-controls\" for=\"gptsm-full\"> Show all text at full color</label>\n";
  return out;
}

constexpr std::string_view kPageTail = "\n</body>\n</html>\n";

nlohmann::ordered_json piece_json(const RenderedPiece& piece) {
  nlohmann::ordered_json j;
  j["text"] = piece.text;
  j["suffix"] = piece.suffix;
  j["round_label"] = piece.label.to_string();
  j["opacity"] = piece.opacity;
  return j;
}

std::uint8_t gray_level(const Rgb& c) {
  return static_cast<std::uint8_t>((static_cast<unsigned>(c.r) + c.g + c.b + 1) / 3);
}

std::string ansi_color(const Rgb& c, bool use_256) {
  if (!use_256) {
    return "\x1b[38;2;" + std::to_string(c.r) + ";" + std::to_string(c.g) + ";" +
           std::to_string(c.b) + "m";
  }
  // Grayscale ramp 232..255 covers levels 8, 18, ..., 238.
  const long level = gray_level(c);
  const long index = std::clamp(std::lround((level - 8) / 10.0), 0L, 23L);
  return "\x1b[38;5;" + std::to_string(232 + index) + "m";
}

}  // namespace

Rgb blend(const Theme& theme, double opacity) {
  const double o = std::clamp(opacity, 0.0, 1.0);
  return Rgb{mix(theme.foreground.r, theme.background.r, o),
             mix(theme.foreground.g, theme.background.g, o),
             mix(theme.foreground.b, theme.background.b, o)};
}

std::string render_html(const RenderPlan& plan) {
  std::string out = page_head(plan, {});
  out += "<article class=\"gptsm-doc\">";
  out += article_body(plan);
  out += "</article>";
  out += kPageTail;
  return out;
}

std::string render_compare_html(const RenderPlan& left, std::string_view left_caption,
                                const RenderPlan& right, std::string_view right_caption) {
  std::string out = page_head(
      left,
      "body{max-width:90em}\n.gptsm-columns{display:flex;gap:3em}\n"
      ".gptsm-columns section{flex:1;min-width:0}\n"
      ".gptsm-columns h2{font-family:sans-serif;font-size:1em}\n");
  out += "<div class=\"gptsm-columns\">\n<section><h2>";
  append_escaped(out, left_caption);
  out += "</h2><article class=\"gptsm-doc\">";
  out += article_body(left);
  out += "</article></section>\n<section><h2>";
  append_escaped(out, right_caption);
  out += "</h2><article class=\"gptsm-doc\">";
  out += article_body(right);
  out += "</article></section>\n</div>";
  out += kPageTail;
  return out;
}

std::string render_ansi(const RenderPlan& plan) {
  check_shape(plan);
  std::string out = plan.doc.leading;
  for (std::size_t p = 0; p < plan.doc.paragraphs.size(); ++p) {
    const auto pieces = pieces_checked(plan, p);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      out += ansi_color(blend(plan.theme, plan.map.paragraphs[p][i].opacity), plan.ansi_256);
      out += pieces[i].text;
      out += pieces[i].suffix;
    }
    if (!pieces.empty()) out += "\x1b[0m";
    out += plan.doc.paragraphs[p].trailing_separator;
  }
  return out;
}

RenderedDocument flatten(const RenderPlan& plan) {
  check_shape(plan);
  RenderedDocument out;
  for (std::size_t p = 0; p < plan.doc.paragraphs.size(); ++p) {
    const auto& paragraph = plan.doc.paragraphs[p];
    const auto pieces = pieces_checked(plan, p);
    std::vector<RenderedPiece> row;
    if (p == 0 && !plan.doc.leading.empty()) {
      row.push_back({"", plan.doc.leading, SaliencyLabel::kept(), 1.0});
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const auto& s = plan.map.paragraphs[p][i];
      row.push_back({pieces[i].text, pieces[i].suffix, s.label, s.opacity});
    }
    if (!pieces.empty()) {
      row.back().suffix += paragraph.trailing_separator;
    } else if (!paragraph.trailing_separator.empty()) {
      row.push_back({"", paragraph.trailing_separator, SaliencyLabel::kept(), 1.0});
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string render_json(const RenderPlan& plan) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& row : flatten(plan)) {
    nlohmann::ordered_json paragraph = nlohmann::ordered_json::array();
    for (const auto& piece : row) paragraph.push_back(piece_json(piece));
    doc.push_back(std::move(paragraph));
  }
  return doc.dump();
}

RenderedDocument parse_rendered_json(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  if (!doc.is_array()) throw std::invalid_argument("rendered JSON must be an array");
  RenderedDocument out;
  for (const auto& paragraph : doc) {
    if (!paragraph.is_array()) throw std::invalid_argument("paragraph entry must be an array");
    std::vector<RenderedPiece> row;
    for (const auto& item : paragraph) {
      RenderedPiece piece;
      piece.text = item.at("text").get<std::string>();
      piece.suffix = item.at("suffix").get<std::string>();
      const auto label_text = item.at("round_label").get<std::string>();
      const auto label = SaliencyLabel::parse(label_text);
      if (!label) throw std::invalid_argument("unknown round_label '" + label_text + "'");
      piece.label = *label;
      piece.opacity = item.at("opacity").get<double>();
      row.push_back(std::move(piece));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string rendered_source(const RenderedDocument& doc) {
  std::string out;
  for (const auto& row : doc) {
    for (const auto& piece : row) {
      out += piece.text;
      out += piece.suffix;
    }
  }
  return out;
}

}  // namespace gptsm
