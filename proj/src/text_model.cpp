#include "gptsm/text_model.hpp"

#include <algorithm>

namespace gptsm {
namespace {

// Marks a byte that does not start a valid UTF-8 sequence. Treated as an
// ordinary letter so malformed input still round-trips.
constexpr char32_t kInvalid = 0x110000;

struct Decoded {
  char32_t cp;
  std::size_t length;
};

Decoded decode_at(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t length = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    length = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    length = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    length = 4;
    cp = b0 & 0x07;
  } else {
    return {kInvalid, 1};
  }
  if (pos + length > s.size()) return {kInvalid, 1};
  for (std::size_t i = 1; i < length; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {kInvalid, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, length};
}

std::size_t whitespace_run_end(std::string_view s, std::size_t pos) {
  while (pos < s.size()) {
    const auto d = decode_at(s, pos);
    if (!is_unicode_whitespace(d.cp)) break;
    pos += d.length;
  }
  return pos;
}

std::size_t word_run_end(std::string_view s, std::size_t pos) {
  while (pos < s.size()) {
    const auto d = decode_at(s, pos);
    if (is_unicode_whitespace(d.cp)) break;
    pos += d.length;
  }
  return pos;
}

bool is_blank_line_run(std::string_view run) {
  return std::count(run.begin(), run.end(), '\n') >= 2;
}

bool is_alnum_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  return !is_unicode_whitespace(cp) && !is_punctuation(cp);
}

}  // namespace

bool is_unicode_whitespace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punctuation(char32_t cp) {
  switch (cp) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '\'': case '(': case ')': case '[': case ']':
    case '{': case '}':
    case 0xA1: case 0xAB: case 0xBB: case 0xBF:
    case 0x3001: case 0x3002: case 0x3003:
    case 0xFF01: case 0xFF0C: case 0xFF0E: case 0xFF1A: case 0xFF1B:
    case 0xFF1F:
      return true;
    default:
      return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
             (cp >= 0x300C && cp <= 0x300F);
  }
}

std::string Paragraph::text() const {
  std::string out;
  for (const auto& t : tokens) {
    out += t.text;
    out += t.suffix;
  }
  return out;
}

Document segment(std::string_view source_text) {
  Document doc;
  doc.source_text = std::string(source_text);
  if (source_text.empty()) return doc;

  Paragraph current;
  auto start_next = [&](std::string separator) {
    current.trailing_separator = std::move(separator);
    current.index = doc.paragraphs.size();
    doc.paragraphs.push_back(std::move(current));
    current = Paragraph{};
  };

  std::size_t pos = whitespace_run_end(source_text, 0);
  if (pos > 0) {
    std::string run(source_text.substr(0, pos));
    if (is_blank_line_run(run)) {
      start_next(std::move(run));
    } else {
      doc.leading = std::move(run);
    }
  }

  while (pos < source_text.size()) {
    const std::size_t word_end = word_run_end(source_text, pos);
    const std::size_t ws_end = whitespace_run_end(source_text, word_end);
    Token token{std::string(source_text.substr(pos, word_end - pos)), {}};
    std::string run(source_text.substr(word_end, ws_end - word_end));
    if (is_blank_line_run(run)) {
      current.tokens.push_back(std::move(token));
      start_next(std::move(run));
    } else {
      token.suffix = std::move(run);
      current.tokens.push_back(std::move(token));
    }
    pos = ws_end;
  }
  current.index = doc.paragraphs.size();
  doc.paragraphs.push_back(std::move(current));
  return doc;
}

std::string reconstruct(const Document& doc) {
  std::string out = doc.leading;
  for (const auto& p : doc.paragraphs) {
    out += p.text();
    out += p.trailing_separator;
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t pos = whitespace_run_end(text, 0);
  while (pos < text.size()) {
    const std::size_t word_end = word_run_end(text, pos);
    const std::size_t ws_end = whitespace_run_end(text, word_end);
    tokens.push_back({std::string(text.substr(pos, word_end - pos)),
                      std::string(text.substr(word_end, ws_end - word_end))});
    pos = ws_end;
  }
  return tokens;
}

std::vector<Piece> split_pieces(std::span<const Token> tokens) {
  std::vector<Piece> pieces;
  for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
    const std::string_view text = tokens[ti].text;
    // Byte offsets of code point starts, plus one past the end.
    std::vector<std::size_t> offsets;
    std::vector<bool> punct;
    for (std::size_t pos = 0; pos < text.size();) {
      const auto d = decode_at(text, pos);
      offsets.push_back(pos);
      punct.push_back(is_punctuation(d.cp));
      pos += d.length;
    }
    offsets.push_back(text.size());

    const std::size_t n = punct.size();
    std::size_t lead = 0;
    while (lead < n && punct[lead]) ++lead;
    if (lead == n) {
      pieces.push_back({std::string(text), tokens[ti].suffix, PieceKind::whole, ti});
      continue;
    }
    std::size_t trail = n;
    while (trail > lead && punct[trail - 1]) --trail;

    if (lead > 0) {
      pieces.push_back({std::string(text.substr(0, offsets[lead])), {},
                        PieceKind::leading, ti});
    }
    const std::size_t core_begin = offsets[lead];
    const std::size_t core_end = offsets[trail];
    if (trail < n) {
      pieces.push_back({std::string(text.substr(core_begin, core_end - core_begin)),
                        {}, PieceKind::core, ti});
      pieces.push_back({std::string(text.substr(core_end)), tokens[ti].suffix,
                        PieceKind::trailing, ti});
    } else {
      pieces.push_back({std::string(text.substr(core_begin)), tokens[ti].suffix,
                        PieceKind::core, ti});
    }
  }
  return pieces;
}

std::vector<Piece> split_pieces(std::string_view text) {
  const auto tokens = tokenize(text);
  return split_pieces(std::span<const Token>(tokens));
}

std::vector<std::string> piece_texts(std::span<const Piece> pieces) {
  std::vector<std::string> out;
  out.reserve(pieces.size());
  for (const auto& p : pieces) out.push_back(p.text);
  return out;
}

std::string join_pieces(std::span<const Piece> pieces,
                        std::span<const std::size_t> selected) {
  std::string out;
  bool first = true;
  std::size_t prev = 0;
  for (const std::size_t idx : selected) {
    const Piece& piece = pieces[idx];
    if (!first) {
      const bool glued = idx == prev + 1 && pieces[prev].suffix.empty();
      if (!glued && piece.kind != PieceKind::trailing) out += ' ';
    }
    out += piece.text;
    first = false;
    prev = idx;
  }
  return out;
}

std::string join_pieces(std::span<const Piece> pieces) {
  std::vector<std::size_t> all(pieces.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return join_pieces(pieces, all);
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  for (const auto& t : tokenize(text)) {
    if (!out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

bool is_word_piece(const Piece& piece) {
  const std::string_view text = piece.text;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto d = decode_at(text, pos);
    if (is_alnum_cp(d.cp)) return true;
    pos += d.length;
  }
  return false;
}

std::size_t count_word_pieces(std::span<const Piece> pieces) {
  return static_cast<std::size_t>(
      std::count_if(pieces.begin(), pieces.end(), is_word_piece));
}

}  // namespace gptsm
