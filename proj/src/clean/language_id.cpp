#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pint/clean.hpp"
#include "pint/utf8.hpp"

namespace pint::clean {

namespace {

struct SeedText {
  std::string_view code;
  std::string_view text;
};

constexpr SeedText kSeeds[] = {
#include "lang_corpora.inc"
};

constexpr int kMaxOrder = 3;
constexpr double kSmoothing = 0.5;
constexpr std::size_t kMaxBytes = 20000;

bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0xC0 && cp <= 0x24F) return true;  // Latin-1 + Latin Extended
  if (cp >= 0x370 && cp <= 0x52F) return true;  // Greek, Cyrillic
  return cp >= 0x3040 && cp <= 0x9FFF;          // kana, CJK
}

char32_t fold(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x17F && cp % 2 == 0) return cp + 1;
  return cp;
}

// Splits into lowercase words, each wrapped in single spaces.
std::vector<std::u32string> words_of(std::string_view text) {
  std::vector<std::u32string> words;
  std::u32string current;
  std::size_t pos = 0;
  const std::size_t limit = std::min(text.size(), kMaxBytes);
  while (pos < limit) {
    char32_t cp = utf8::next(text, pos);
    if (cp == '\'' || cp == 0x2019) continue;  // apostrophes keep words together
    if (is_letter(cp)) {
      current.push_back(fold(cp));
    } else if (!current.empty()) {
      words.push_back(U" " + current + U" ");
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(U" " + current + U" ");
  return words;
}

template <typename Fn>
void for_each_ngram(const std::vector<std::u32string>& words, Fn&& fn) {
  std::string gram;
  for (const auto& w : words) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (int n = 1; n <= kMaxOrder && i + n <= w.size(); ++n) {
        if (n == 1 && w[i] == U' ') continue;
        gram.clear();
        for (int k = 0; k < n; ++k) utf8::append(gram, w[i + k]);
        fn(n, gram);
      }
    }
  }
}

struct Profile {
  std::string code;
  std::unordered_map<std::string, double> counts;
  double totals[kMaxOrder + 1] = {};
};

struct Model {
  std::vector<Profile> profiles;
  double vocabulary[kMaxOrder + 1] = {};
};

const Model& model() {
  static const Model m = [] {
    Model built;
    std::unordered_map<std::string, int> vocab;
    for (const auto& seed : kSeeds) {
      Profile p;
      p.code = std::string(seed.code);
      for_each_ngram(words_of(seed.text), [&](int n, const std::string& g) {
        p.counts[g] += 1.0;
        p.totals[n] += 1.0;
        vocab.emplace(g, n);
      });
      built.profiles.push_back(std::move(p));
    }
    for (const auto& [g, n] : vocab) built.vocabulary[n] += 1.0;
    return built;
  }();
  return m;
}

}  // namespace

std::vector<std::string> supported_languages() {
  std::vector<std::string> codes;
  for (const auto& seed : kSeeds) codes.emplace_back(seed.code);
  return codes;
}

LanguageGuess language_id(std::string_view text) {
  auto words = words_of(text);
  if (words.empty()) return {"und", 0.0};

  const Model& m = model();
  std::vector<double> log_likelihood(m.profiles.size(), 0.0);
  for_each_ngram(words, [&](int n, const std::string& g) {
    for (std::size_t l = 0; l < m.profiles.size(); ++l) {
      const auto& p = m.profiles[l];
      auto it = p.counts.find(g);
      double c = it == p.counts.end() ? 0.0 : it->second;
      log_likelihood[l] +=
          std::log((c + kSmoothing) / (p.totals[n] + kSmoothing * (m.vocabulary[n] + 1.0)));
    }
  });

  // Posterior under a uniform prior.
  auto best = std::max_element(log_likelihood.begin(), log_likelihood.end());
  double denom = 0.0;
  for (double ll : log_likelihood) denom += std::exp(ll - *best);
  auto idx = static_cast<std::size_t>(best - log_likelihood.begin());
  return {m.profiles[idx].code, 1.0 / denom};
}

}  // namespace pint::clean
