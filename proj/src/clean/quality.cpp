#include <algorithm>
#include <cctype>
#include <exception>

#include "pint/clean.hpp"
#include "pint/error.hpp"
#include "pint/utf8.hpp"

namespace pint::clean {

namespace {

constexpr char32_t kSoftHyphen = 0x00AD;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

enum class CharClass { alnum, punct, space, symbol };

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (std::isalnum(static_cast<int>(cp))) return CharClass::alnum;
    if (std::isspace(static_cast<int>(cp))) return CharClass::space;
    switch (cp) {
      case '.': case ',': case ';': case ':': case '!': case '?': case '\'': case '"':
      case '(': case ')': case '[': case ']': case '{': case '}': case '-': case '/':
        return CharClass::punct;
      default:
        return CharClass::symbol;
    }
  }
  if (cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000) return CharClass::space;
  if (cp == 0xAB || cp == 0xBB || cp == 0xA1 || cp == 0xBF || cp == 0xB7) return CharClass::punct;
  if (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7) return CharClass::alnum;
  if (cp >= 0x370 && cp <= 0x1FFF) return CharClass::alnum;  // Greek .. Latin Extended Additional
  if (cp >= 0x2010 && cp <= 0x206F) return CharClass::punct;
  if (cp >= 0x3001 && cp <= 0x303F) return CharClass::punct;
  if ((cp >= 0x3040 && cp <= 0x9FFF) || (cp >= 0xAC00 && cp <= 0xD7AF)) return CharClass::alnum;
  if (cp >= 0xFF01 && cp <= 0xFFEF) return CharClass::alnum;
  return CharClass::symbol;
}

struct Token {
  std::string_view text;
  bool newline_after = false;  // the whitespace run after it contains '\n'
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    if (i >= s.size()) break;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    Token t{s.substr(start, i - start)};
    for (std::size_t j = i; j < s.size() && is_space(s[j]); ++j)
      if (s[j] == '\n') t.newline_after = true;
    out.push_back(t);
  }
  return out;
}

std::vector<std::string_view> paragraphs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto flush = [&](std::size_t end) {
    auto para = s.substr(start, end - start);
    if (para.find_first_not_of(" \t\r\n") != std::string_view::npos) out.push_back(para);
  };
  while (i < s.size()) {
    if (s[i] == '\n') {
      // A blank line (only blanks between two newlines) ends the paragraph.
      std::size_t j = i + 1;
      while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
      if (j < s.size() && s[j] == '\n') {
        flush(i);
        while (j < s.size() && is_space(s[j])) ++j;
        start = i = j;
        continue;
      }
    }
    ++i;
  }
  flush(s.size());
  return out;
}

// Hyphenated fragment left by a line break: "exam-\nple".
bool is_linebreak_fragment(const Token& t, const Token* next) {
  auto w = t.text;
  if (w.size() < 2 || w.back() != '-' || !t.newline_after || next == nullptr) return false;
  if (!std::isalpha(static_cast<unsigned char>(w[w.size() - 2]))) return false;
  return std::islower(static_cast<unsigned char>(next->text.front())) != 0;
}

bool paragraph_is_jumbled(std::string_view para, double max_absent_fraction) {
  std::size_t alphabetic = 0;
  std::size_t absent = 0;
  for (const auto& tok : tokenize(para)) {
    auto w = tok.text;
    auto first = w.find_first_not_of(".,;:!?\"'()[]{}-*_");
    if (first == std::string_view::npos) continue;
    auto last = w.find_last_not_of(".,;:!?\"'()[]{}-*_");
    w = w.substr(first, last - first + 1);
    bool letters = std::all_of(w.begin(), w.end(), [](char c) {
      return std::isalpha(static_cast<unsigned char>(c)) || c == '\'';
    });
    if (!letters) continue;
    std::string lower(w);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    ++alphabetic;
    if (!in_wordlist(lower)) ++absent;
  }
  return alphabetic > 0 && static_cast<double>(absent) / static_cast<double>(alphabetic) > max_absent_fraction;
}

bool paragraph_has_symbols(std::string_view para, double max_symbol_fraction) {
  std::size_t total = 0;
  std::size_t symbols = 0;
  std::size_t pos = 0;
  while (pos < para.size()) {
    char32_t cp = utf8::next(para, pos);
    ++total;
    if (classify(cp) == CharClass::symbol) ++symbols;
  }
  return total > 0 && static_cast<double>(symbols) / static_cast<double>(total) > max_symbol_fraction;
}

double ratio(std::size_t num, std::size_t den) {
  if (den == 0) return num == 0 ? 0.0 : 1.0;
  return std::min(1.0, static_cast<double>(num) / static_cast<double>(den));
}

}  // namespace

bool is_broken_word(std::string_view token) {
  std::size_t pos = 0;
  while (pos < token.size()) {
    char32_t cp = utf8::next(token, pos);
    if (cp == utf8::kReplacement || cp == kSoftHyphen) return true;
  }
  return false;
}

CleanFlags quality_flags(std::string_view text, const QualityThresholds& t) {
  if (text.empty()) throw ValidationError("empty document");

  auto tokens = tokenize(text);
  std::size_t broken = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token* next = i + 1 < tokens.size() ? &tokens[i + 1] : nullptr;
    if (is_broken_word(tokens[i].text) || is_linebreak_fragment(tokens[i], next)) ++broken;
  }

  std::size_t blank_runs = 0;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == ' ' || text[i] == '\t') {
      std::size_t j = i;
      while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
      if (j - i >= 2) ++blank_runs;
      i = j;
    } else {
      ++i;
    }
  }

  auto paras = paragraphs(text);
  std::size_t jumbled = 0;
  std::size_t symbolic = 0;
  for (auto p : paras) {
    if (paragraph_is_jumbled(p, t.jumbled_token_fraction)) ++jumbled;
    if (paragraph_has_symbols(p, t.symbol_char_fraction)) ++symbolic;
  }

  CleanFlags f;
  f.broken_word_ratio = ratio(broken, tokens.size());
  f.jumbled_paragraph_ratio = ratio(jumbled, paras.size());
  f.symbol_paragraph_ratio = ratio(symbolic, paras.size());
  f.whitespace_ratio = ratio(blank_runs, tokens.size());
  f.clean = f.broken_word_ratio <= t.broken_word && f.jumbled_paragraph_ratio <= t.jumbled_paragraph &&
            f.symbol_paragraph_ratio <= t.symbol_paragraph && f.whitespace_ratio <= t.whitespace;
  return f;
}

namespace {

CleanFlags flags_or_unclean(const Document& doc, const QualityThresholds& t) {
  if (doc.text.empty()) return CleanFlags{0.0, 0.0, 0.0, 0.0, false};
  return quality_flags(doc.text, t);
}

}  // namespace

std::vector<CleanFlags> quality_flags_batch_serial(std::span<const Document> docs, const QualityThresholds& t) {
  std::vector<CleanFlags> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(flags_or_unclean(d, t));
  return out;
}

std::vector<CleanFlags> quality_flags_batch(std::span<const Document> docs, const QualityThresholds& t) {
  std::vector<CleanFlags> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = flags_or_unclean(docs[i], t);
  return out;
}

}  // namespace pint::clean
