#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pint/document.hpp"

namespace pint::clean {

enum class RuleKind {
  strip_first_lines,
  min_chars,
  strip_html,
  remove_edit_source,
  language_filter,
  latex_to_markdown,
  normalize_whitespace,
};

std::string_view rule_name(RuleKind kind);
std::optional<RuleKind> rule_kind_from_name(std::string_view name);

struct CleaningRule {
  RuleKind kind = RuleKind::normalize_whitespace;
  std::size_t n = 0;            // strip_first_lines, min_chars
  std::string lang;             // language_filter
  double min_confidence = 0.0;  // language_filter

  static CleaningRule strip_first_lines(std::size_t lines) { return {RuleKind::strip_first_lines, lines, {}, 0.0}; }
  static CleaningRule min_chars(std::size_t chars) { return {RuleKind::min_chars, chars, {}, 0.0}; }
  static CleaningRule language_filter(std::string lang, double min_confidence) {
    return {RuleKind::language_filter, 0, std::move(lang), min_confidence};
  }
  static CleaningRule of(RuleKind kind) { return {kind, 0, {}, 0.0}; }

  // Throws ValidationError if parameters are out of range.
  void validate() const;

  bool operator==(const CleaningRule&) const = default;
};

struct Dropped {
  std::string rule;  // name of the first rule that rejected the document
  bool operator==(const Dropped&) const = default;
};

using Outcome = std::variant<Document, Dropped>;

// Applies `rules` in order. A transform that leaves no text drops the
// document; so does a failed filter.
Outcome apply_rules(Document doc, std::span<const CleaningRule> rules);

// --- individual transforms ------------------------------------------------

// Removes the first `n` lines. Returns nullopt when nothing is left.
std::optional<std::string> strip_first_lines(std::string_view text, std::size_t n);

// Removes tags (and <script>/<style> bodies), decodes entities, and maps
// block-level tags to line breaks. Iterates to a fixed point, so the result
// contains no tag or entity that a second pass would rewrite.
std::string strip_html(std::string_view text);

// Removes "[edit]" / "[edit source]" link residue and the blanks before it.
std::string remove_edit_source(std::string_view text);

// Collapses runs of blanks/tabs to one space, trims line ends, collapses 3+
// newlines to a single blank line, and trims the whole text.
std::string normalize_whitespace(std::string_view text);

// Best-effort LaTeX to Markdown rewrite. Idempotent on its own output.
std::string latex_to_markdown(std::string_view text);

// --- language identification ---------------------------------------------

struct LanguageGuess {
  std::string code;  // ISO 639-1, or "und"
  double confidence = 0.0;
};

// Naive Bayes over character 1-3 grams against bundled profiles.
LanguageGuess language_id(std::string_view text);
std::vector<std::string> supported_languages();

// --- quality heuristics ---------------------------------------------------

struct QualityThresholds {
  double broken_word = 0.1;
  double jumbled_paragraph = 0.2;
  double symbol_paragraph = 0.2;
  double whitespace = 0.1;
  // A paragraph is jumbled when more than this fraction of its alphabetic
  // tokens is missing from the bundled wordlist.
  double jumbled_token_fraction = 0.5;
  // A paragraph is symbol-laden when more than this fraction of its
  // characters are neither alphanumeric, punctuation nor whitespace.
  double symbol_char_fraction = 0.1;
};

struct CleanFlags {
  double broken_word_ratio = 0.0;
  double jumbled_paragraph_ratio = 0.0;
  double symbol_paragraph_ratio = 0.0;
  double whitespace_ratio = 0.0;
  bool clean = true;
};

// Throws ValidationError("empty document") for empty text.
CleanFlags quality_flags(std::string_view text, const QualityThresholds& thresholds = {});

// Exposed for tests and tooling.
bool is_broken_word(std::string_view token);
bool in_wordlist(std::string_view lowercase_word);

// --- batch kernels --------------------------------------------------------

struct BatchResult {
  std::vector<Document> kept;                  // input order preserved
  std::map<std::string, std::size_t> dropped;  // rule name -> count
};

// OpenMP-parallel over documents; order restored at the sink.
BatchResult clean_batch(std::vector<Document> docs, std::span<const CleaningRule> rules);

// Single-threaded reference for clean_batch.
BatchResult clean_batch_serial(std::vector<Document> docs, std::span<const CleaningRule> rules);

// Empty documents get all-zero ratios and clean = false instead of an error.
std::vector<CleanFlags> quality_flags_batch(std::span<const Document> docs,
                                            const QualityThresholds& thresholds = {});
std::vector<CleanFlags> quality_flags_batch_serial(std::span<const Document> docs,
                                                   const QualityThresholds& thresholds = {});

}  // namespace pint::clean
