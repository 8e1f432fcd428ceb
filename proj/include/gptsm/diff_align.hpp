#pragma once

// Word-level sequence alignment.
//
// `diff` implements Ratcliff/Obershelp pattern matching over word sequences:
// find the longest contiguous matching block, recurse on the unmatched text
// to its left and right, then describe the result as an opcode script. There
// is no junk heuristic. Ties between equally long blocks go to the block that
// starts earliest in A, then earliest in B.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gptsm {

enum class OpKind { equal, erase, insert, replace };

std::string_view to_string(OpKind kind);

struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct Opcode {
  OpKind kind = OpKind::equal;
  Range a;
  Range b;

  friend bool operator==(const Opcode&, const Opcode&) = default;
};

using OpcodeScript = std::vector<Opcode>;

struct MatchingBlock {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;

  friend bool operator==(const MatchingBlock&, const MatchingBlock&) = default;
};

using Words = std::vector<std::string>;

/// Sorted, merged matching blocks (without the terminating zero-size block).
std::vector<MatchingBlock> matching_blocks(std::span<const std::string> a,
                                           std::span<const std::string> b);

OpcodeScript diff(std::span<const std::string> a, std::span<const std::string> b);

/// Replays a script: keeps equal spans of A and splices in B's insert and
/// replace spans.
Words apply_script(const OpcodeScript& script, std::span<const std::string> a,
                   std::span<const std::string> b);

struct ReversionResult {
  Words reverted_words;
  /// Position in `original` of each reverted word.
  std::vector<std::size_t> kept_indices;
  /// Response-side words that fell inside insert or replace spans.
  std::size_t paraphrase_count = 0;
};

/// Undoes insertions and substitutions in `response` relative to `original`.
/// The result is always a subsequence of `original`.
ReversionResult revert(std::span<const std::string> original,
                       std::span<const std::string> response);

class NestingViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Deletion round of one word of the original level; 0 means never removed.
struct RoundLabel {
  std::size_t removed_at_round = 0;

  bool kept() const { return removed_at_round == 0; }
  static RoundLabel kept_label() { return {}; }
  static RoundLabel removed_at(std::size_t round) { return {round}; }
  friend bool operator==(const RoundLabel&, const RoundLabel&) = default;
};

/// Labels every word of levels[0] with the first round at which it no longer
/// appears. Each step uses the injection chosen by diff(levels[k], levels[k+1]);
/// when that script is not a pure deletion script the leftmost subsequence
/// embedding is used instead. Throws NestingViolation if some level is not a
/// subsequence of its predecessor.
std::vector<RoundLabel> align_levels(const std::vector<Words>& levels);

/// Composes per-step injections into positions of levels[0].
std::vector<RoundLabel> labels_from_positions(
    std::size_t original_size, const std::vector<std::vector<std::size_t>>& positions);

bool is_subsequence(std::span<const std::string> needle,
                    std::span<const std::string> haystack);

}  // namespace gptsm
