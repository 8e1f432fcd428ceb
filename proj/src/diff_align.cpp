#include "gptsm/diff_align.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

namespace gptsm {
namespace {

struct Interned {
  std::vector<int> a;
  std::vector<int> b;
};

Interned intern(std::span<const std::string> a, std::span<const std::string> b) {
  std::unordered_map<std::string_view, int> ids;
  auto id_of = [&](const std::string& w) {
    auto [it, inserted] = ids.try_emplace(w, static_cast<int>(ids.size()));
    return it->second;
  };
  Interned out;
  out.a.reserve(a.size());
  out.b.reserve(b.size());
  for (const auto& w : a) out.a.push_back(id_of(w));
  for (const auto& w : b) out.b.push_back(id_of(w));
  return out;
}

class BlockFinder {
 public:
  BlockFinder(const std::vector<int>& a, const std::vector<int>& b)
      : a_(a), b_(b), prev_(b.size() + 1), cur_(b.size() + 1) {}

  // Longest block within a[alo,ahi) x b[blo,bhi). Scanning i then j in
  // ascending order and only accepting strictly longer blocks yields the
  // earliest start in A, then in B.
  MatchingBlock longest(std::size_t alo, std::size_t ahi, std::size_t blo,
                        std::size_t bhi) {
    MatchingBlock best{alo, blo, 0};
    std::fill(prev_.begin() + blo, prev_.begin() + bhi + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
      cur_[blo] = 0;
      for (std::size_t j = blo; j < bhi; ++j) {
        if (a_[i] == b_[j]) {
          const std::size_t k = prev_[j] + 1;
          cur_[j + 1] = k;
          if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
        } else {
          cur_[j + 1] = 0;
        }
      }
      std::swap(prev_, cur_);
    }
    return best;
  }

 private:
  const std::vector<int>& a_;
  const std::vector<int>& b_;
  std::vector<std::size_t> prev_;
  std::vector<std::size_t> cur_;
};

std::vector<MatchingBlock> blocks_for(const Interned& seq) {
  BlockFinder finder(seq.a, seq.b);
  std::vector<MatchingBlock> found;
  struct Span {
    std::size_t alo, ahi, blo, bhi;
  };
  std::vector<Span> pending{{0, seq.a.size(), 0, seq.b.size()}};
  while (!pending.empty()) {
    const Span s = pending.back();
    pending.pop_back();
    const MatchingBlock m = finder.longest(s.alo, s.ahi, s.blo, s.bhi);
    if (m.size == 0) continue;
    found.push_back(m);
    if (s.alo < m.a && s.blo < m.b) pending.push_back({s.alo, m.a, s.blo, m.b});
    if (m.a + m.size < s.ahi && m.b + m.size < s.bhi) {
      pending.push_back({m.a + m.size, s.ahi, m.b + m.size, s.bhi});
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });

  std::vector<MatchingBlock> merged;
  for (const auto& m : found) {
    if (!merged.empty()) {
      auto& last = merged.back();
      if (last.a + last.size == m.a && last.b + last.size == m.b) {
        last.size += m.size;
        continue;
      }
    }
    merged.push_back(m);
  }
  return merged;
}

}  // namespace

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::equal: return "equal";
    case OpKind::erase: return "delete";
    case OpKind::insert: return "insert";
    case OpKind::replace: return "replace";
  }
  return "?";
}

std::vector<MatchingBlock> matching_blocks(std::span<const std::string> a,
                                           std::span<const std::string> b) {
  return blocks_for(intern(a, b));
}

OpcodeScript diff(std::span<const std::string> a, std::span<const std::string> b) {
  auto blocks = matching_blocks(a, b);
  blocks.push_back({a.size(), b.size(), 0});

  OpcodeScript script;
  std::size_t i = 0;
  std::size_t j = 0;
  for (const auto& m : blocks) {
    if (i < m.a && j < m.b) {
      script.push_back({OpKind::replace, {i, m.a}, {j, m.b}});
    } else if (i < m.a) {
      script.push_back({OpKind::erase, {i, m.a}, {j, j}});
    } else if (j < m.b) {
      script.push_back({OpKind::insert, {i, i}, {j, m.b}});
    }
    i = m.a + m.size;
    j = m.b + m.size;
    if (m.size > 0) script.push_back({OpKind::equal, {m.a, i}, {m.b, j}});
  }
  return script;
}

Words apply_script(const OpcodeScript& script, std::span<const std::string> a,
                   std::span<const std::string> b) {
  Words out;
  for (const auto& op : script) {
    switch (op.kind) {
      case OpKind::equal:
        out.insert(out.end(), a.begin() + op.a.begin, a.begin() + op.a.end);
        break;
      case OpKind::erase:
        break;
      case OpKind::insert:
      case OpKind::replace:
        out.insert(out.end(), b.begin() + op.b.begin, b.begin() + op.b.end);
        break;
    }
  }
  return out;
}

ReversionResult revert(std::span<const std::string> original,
                       std::span<const std::string> response) {
  ReversionResult result;
  for (const auto& op : diff(original, response)) {
    switch (op.kind) {
      case OpKind::equal:
        for (std::size_t i = op.a.begin; i < op.a.end; ++i) {
          result.kept_indices.push_back(i);
        }
        break;
      case OpKind::replace:
        // Substitutions are restored to the original words.
        result.paraphrase_count += op.b.size();
        for (std::size_t i = op.a.begin; i < op.a.end; ++i) {
          result.kept_indices.push_back(i);
        }
        break;
      case OpKind::insert:
        result.paraphrase_count += op.b.size();
        break;
      case OpKind::erase:
        break;
    }
  }
  result.reverted_words.reserve(result.kept_indices.size());
  for (const std::size_t i : result.kept_indices) {
    result.reverted_words.push_back(original[i]);
  }
  return result;
}

bool is_subsequence(std::span<const std::string> needle,
                    std::span<const std::string> haystack) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < haystack.size() && j < needle.size(); ++i) {
    if (haystack[i] == needle[j]) ++j;
  }
  return j == needle.size();
}

std::vector<RoundLabel> labels_from_positions(
    std::size_t original_size, const std::vector<std::vector<std::size_t>>& positions) {
  std::vector<RoundLabel> labels(original_size);
  std::vector<bool> alive(original_size, true);
  for (std::size_t round = 1; round < positions.size(); ++round) {
    std::vector<bool> next(original_size, false);
    std::size_t last = 0;
    bool first = true;
    for (const std::size_t p : positions[round]) {
      if (p >= original_size || !alive[p] || (!first && p <= last)) {
        throw NestingViolation("level " + std::to_string(round) +
                               " is not a subsequence of level " +
                               std::to_string(round - 1));
      }
      next[p] = true;
      last = p;
      first = false;
    }
    for (std::size_t i = 0; i < original_size; ++i) {
      if (alive[i] && !next[i]) labels[i] = RoundLabel::removed_at(round);
    }
    alive = std::move(next);
  }
  return labels;
}

std::vector<RoundLabel> align_levels(const std::vector<Words>& levels) {
  if (levels.empty()) return {};
  // positions[k][m] = index into levels[0] of word m of levels[k].
  std::vector<std::vector<std::size_t>> positions;
  std::vector<std::size_t> identity(levels[0].size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  positions.push_back(std::move(identity));

  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const Words& prev = levels[k];
    const Words& next = levels[k + 1];
    std::vector<std::size_t> inject;
    inject.reserve(next.size());

    const auto script = diff(prev, next);
    const bool pure = std::all_of(script.begin(), script.end(), [](const Opcode& op) {
      return op.kind == OpKind::equal || op.kind == OpKind::erase;
    });
    if (pure) {
      for (const auto& op : script) {
        if (op.kind != OpKind::equal) continue;
        for (std::size_t i = op.a.begin; i < op.a.end; ++i) inject.push_back(i);
      }
    } else {
      std::size_t i = 0;
      for (const auto& w : next) {
        while (i < prev.size() && prev[i] != w) ++i;
        if (i == prev.size()) {
          throw NestingViolation("level " + std::to_string(k + 1) +
                                 " is not a subsequence of level " + std::to_string(k));
        }
        inject.push_back(i++);
      }
    }

    std::vector<std::size_t> composed;
    composed.reserve(inject.size());
    for (const std::size_t i : inject) composed.push_back(positions.back()[i]);
    positions.push_back(std::move(composed));
  }
  return labels_from_positions(levels[0].size(), positions);
}

}  // namespace gptsm
