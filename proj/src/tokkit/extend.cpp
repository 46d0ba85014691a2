#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "pint/percent.hpp"
#include "pint/tokkit.hpp"

namespace pint::tok {

TokenizerDef extend_vocab(const TokenizerDef& def, const std::optional<std::string>& pad,
                          std::span<const std::string> chat, std::size_t multiple) {
  if (multiple < 1) throw ValidationError("multiple must be at least 1");

  std::vector<std::string> tokens = def.tokens();
  std::vector<SpecialToken> specials = def.specials();
  std::unordered_set<std::string> added;

  auto add = [&](const std::string& literal, SpecialKind kind) {
    if (literal.empty()) throw ValidationError("special token literal must not be empty");
    if (def.find(literal) || added.count(literal))
      throw ValidationError("literal collision: '" + literal + "' is already in the vocabulary");
    specials.push_back({literal, static_cast<TokenId>(tokens.size()), kind});
    tokens.push_back(literal);
    added.insert(literal);
  };

  std::unordered_set<std::string> unique_chat;
  for (const auto& c : chat)
    if (!unique_chat.insert(c).second) throw ValidationError("duplicate chat literal '" + c + "'");

  if (pad) add(*pad, SpecialKind::pad);
  for (const auto& c : chat) add(c, SpecialKind::chat);

  const std::size_t target = (tokens.size() + multiple - 1) / multiple * multiple;
  for (std::size_t n = 0; tokens.size() < target; ++n) {
    std::string literal = "<|reserved_" + std::to_string(n) + "|>";
    if (def.find(literal)) continue;
    add(literal, SpecialKind::reserved);
  }

  return TokenizerDef(std::move(tokens), def.merges(), std::move(specials), def.options(), def.size());
}

std::size_t count_specials(const TokenizerDef& def, SpecialKind kind) {
  return static_cast<std::size_t>(std::count_if(def.specials().begin(), def.specials().end(),
                                                [&](const SpecialToken& s) { return s.kind == kind; }));
}

double compare_counts(std::uint64_t count_a, std::uint64_t count_b) {
  if (count_a == 0) throw ValidationError("reference token count must be positive");
  const double a = static_cast<double>(count_a);
  const double diff = static_cast<double>(static_cast<long double>(count_a) - static_cast<long double>(count_b));
  return 100.0 * diff / a;
}

std::string compare_counts_2dp(std::uint64_t count_a, std::uint64_t count_b) {
  if (count_a == 0) throw ValidationError("reference token count must be positive");
  return percent_2dp(static_cast<std::int64_t>(count_a) - static_cast<std::int64_t>(count_b),
                     static_cast<std::int64_t>(count_a));
}

double bpc(const BpcInput& input) {
  if (input.char_count < 1) throw ValidationError("character count must be at least 1");
  long double sum = 0.0L;
  for (double loss : input.token_losses) {
    if (!(loss >= 0.0) || loss == std::numeric_limits<double>::infinity())
      throw ValidationError("token losses must be finite and non-negative");
    sum += loss;
  }
  return static_cast<double>(sum / static_cast<long double>(input.char_count));
}

}  // namespace pint::tok
