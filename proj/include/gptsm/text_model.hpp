#pragma once

// Lossless decomposition of plain UTF-8 text into paragraphs, word tokens and
// pieces, plus byte-exact reconstruction.
//
// A token is a maximal run of non-whitespace code points; the whitespace that
// follows it is kept verbatim in `suffix`. Paragraphs are separated by any
// whitespace run that contains two or more '\n' (a blank line); the whole run
// is stored as the paragraph's `trailing_separator`.
//
// Pieces refine tokens for alignment and rendering: leading and trailing
// punctuation runs become their own pieces so that a compressed level such as
// "nutrients." can be expressed as a subsequence of "nutrients into
// watercourses.". Pieces of one token carry an empty suffix except the last.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gptsm {

struct Token {
  std::string text;
  std::string suffix;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Paragraph {
  std::size_t index = 0;
  std::vector<Token> tokens;
  std::string trailing_separator;

  bool empty() const { return tokens.empty(); }
  /// Original bytes of the paragraph, excluding the trailing separator.
  std::string text() const;

  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

struct Document {
  std::string source_text;
  /// Whitespace preceding the first token when it contains no blank line.
  std::string leading;
  std::vector<Paragraph> paragraphs;
};

enum class PieceKind {
  leading,   // punctuation opening a token, e.g. "(" or an opening quote
  core,      // the word body
  trailing,  // punctuation closing a token, e.g. "." or ","
  whole,     // a token made only of punctuation
};

struct Piece {
  std::string text;
  std::string suffix;
  PieceKind kind = PieceKind::core;
  std::size_t token_index = 0;

  friend bool operator==(const Piece&, const Piece&) = default;
};

Document segment(std::string_view source_text);
std::string reconstruct(const Document& doc);

/// Splits text on Unicode whitespace, ignoring paragraph structure.
/// Leading whitespace of `text` is dropped.
std::vector<Token> tokenize(std::string_view text);

std::vector<Piece> split_pieces(std::span<const Token> tokens);
std::vector<Piece> split_pieces(std::string_view text);

std::vector<std::string> piece_texts(std::span<const Piece> pieces);

/// Joins the selected pieces (ascending indices) into normalized text: pieces
/// that were adjacent and unseparated in the source stay glued, a trailing
/// punctuation piece attaches to whatever precedes it, and everything else is
/// separated by a single space.
std::string join_pieces(std::span<const Piece> pieces,
                        std::span<const std::size_t> selected);
std::string join_pieces(std::span<const Piece> pieces);

/// Tokens joined by single spaces.
std::string normalize_whitespace(std::string_view text);

/// True if the piece carries a letter or digit (any non-ASCII code point that
/// is neither whitespace nor known punctuation counts as a letter).
bool is_word_piece(const Piece& piece);
std::size_t count_word_pieces(std::span<const Piece> pieces);

bool is_unicode_whitespace(char32_t cp);
bool is_punctuation(char32_t cp);

}  // namespace gptsm
