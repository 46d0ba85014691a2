#pragma once

// Naive merge-by-rank BPE used as a test oracle. Works on token strings and
// shares no code with the library encoder: each round rescans every adjacent
// pair and applies the lowest-ranked one (leftmost on ties).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pint::testkit {

class NaiveBpe {
 public:
  NaiveBpe(const std::vector<std::string>& vocab, const std::vector<std::pair<std::string, std::string>>& merges) {
    for (std::size_t i = 0; i < vocab.size(); ++i) ids_[vocab[i]] = static_cast<std::uint32_t>(i);
    for (std::size_t r = 0; r < merges.size(); ++r) ranks_.emplace(merges[r], r);
  }

  // One starting symbol per byte. Fine for single-byte alphabets only.
  std::optional<std::vector<std::uint32_t>> encode(const std::string& text) const {
    std::vector<std::string> syms;
    for (char c : text) syms.emplace_back(1, c);
    while (syms.size() > 1) {
      std::size_t best = syms.size();
      std::size_t best_rank = SIZE_MAX;
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        auto it = ranks_.find({syms[i], syms[i + 1]});
        if (it != ranks_.end() && it->second < best_rank) {
          best_rank = it->second;
          best = i;
        }
      }
      if (best == syms.size()) break;
      syms[best] += syms[best + 1];
      syms.erase(syms.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    }
    std::vector<std::uint32_t> out;
    for (const auto& s : syms) {
      auto it = ids_.find(s);
      if (it == ids_.end()) return std::nullopt;
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::map<std::string, std::uint32_t> ids_;
  std::map<std::pair<std::string, std::string>, std::size_t> ranks_;
};

// Every string of length 0..max_len over `alphabet`, shortest first.
inline std::vector<std::string> all_strings(const std::string& alphabet, std::size_t max_len) {
  std::vector<std::string> out{""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (char c : alphabet) out.push_back(out[i] + c);
    begin = end;
  }
  return out;
}

struct MergeTable {
  std::vector<std::string> vocab;
  std::vector<std::pair<std::string, std::string>> merges;
};

// Random merge list over `alphabet`. Pairs may produce a string that an
// earlier merge already produced, which the encoder has to handle.
template <typename Rng>
MergeTable random_merge_table(const std::string& alphabet, std::size_t n_merges, std::size_t max_token_len, Rng& rng) {
  MergeTable t;
  std::map<std::string, bool> known;
  for (char c : alphabet) {
    t.vocab.emplace_back(1, c);
    known[t.vocab.back()] = true;
  }
  std::map<std::pair<std::string, std::string>, bool> used;
  for (std::size_t attempt = 0; t.merges.size() < n_merges && attempt < n_merges * 50; ++attempt) {
    const auto& l = t.vocab[rng() % t.vocab.size()];
    const auto& r = t.vocab[rng() % t.vocab.size()];
    if (l.size() + r.size() > max_token_len || used.count({l, r})) continue;
    used[{l, r}] = true;
    auto merged = l + r;
    t.merges.emplace_back(l, r);
    if (!known.count(merged)) {
      known[merged] = true;
      t.vocab.push_back(merged);
    }
  }
  return t;
}

}  // namespace pint::testkit
