#include <array>
#include <exception>

#include "pint/clean.hpp"
#include "pint/error.hpp"
#include "pint/utf8.hpp"

namespace pint::clean {

namespace {

constexpr std::array<std::pair<RuleKind, std::string_view>, 7> kRuleNames{{
    {RuleKind::strip_first_lines, "strip_first_lines"},
    {RuleKind::min_chars, "min_chars"},
    {RuleKind::strip_html, "strip_html"},
    {RuleKind::remove_edit_source, "remove_edit_source"},
    {RuleKind::language_filter, "language_filter"},
    {RuleKind::latex_to_markdown, "latex_to_markdown"},
    {RuleKind::normalize_whitespace, "normalize_whitespace"},
}};

bool is_blank_char(char c) { return c == ' ' || c == '\t'; }

}  // namespace

std::string_view rule_name(RuleKind kind) {
  for (const auto& [k, name] : kRuleNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<RuleKind> rule_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kRuleNames)
    if (n == name) return k;
  return std::nullopt;
}

void CleaningRule::validate() const {
  if (kind == RuleKind::language_filter) {
    if (lang.empty()) throw ValidationError("language_filter requires a language code");
    if (!(min_confidence >= 0.0 && min_confidence <= 1.0))
      throw ValidationError("language_filter min_confidence must be in [0,1]");
  }
}

std::optional<std::string> strip_first_lines(std::string_view text, std::size_t n) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) return std::nullopt;
    pos = nl + 1;
  }
  if (pos >= text.size()) return std::nullopt;
  return std::string(text.substr(pos));
}

std::string remove_edit_source(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '[') {
      // Match "[ edit ]" or "[ edit source ]" with optional inner blanks.
      std::size_t j = i + 1;
      while (j < text.size() && is_blank_char(text[j])) ++j;
      bool matched = false;
      if (text.compare(j, 4, "edit") == 0) {
        j += 4;
        std::size_t k = j;
        while (k < text.size() && is_blank_char(text[k])) ++k;
        if (text.compare(k, 6, "source") == 0) j = k + 6;
        while (j < text.size() && is_blank_char(text[j])) ++j;
        matched = j < text.size() && text[j] == ']';
      }
      if (matched) {
        while (!out.empty() && is_blank_char(out.back())) out.pop_back();
        i = j + 1;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string collapsed;
  collapsed.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\r') continue;
    if (is_blank_char(c)) {
      while (i + 1 < text.size() && is_blank_char(text[i + 1])) ++i;
      // Blanks right before a newline are dropped entirely.
      if (i + 1 < text.size() && (text[i + 1] == '\n' || text[i + 1] == '\r')) continue;
      collapsed.push_back(' ');
      continue;
    }
    if (c == '\n') {
      // Leading blanks on the next line are dropped too.
      while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    }
    collapsed.push_back(c);
  }

  std::string out;
  out.reserve(collapsed.size());
  std::size_t newlines = 0;
  for (std::size_t i = 0; i < collapsed.size(); ++i) {
    char c = collapsed[i];
    if (c == '\n') {
      if (++newlines <= 2) out.push_back(c);
      continue;
    }
    if (c == ' ' && newlines > 0) continue;  // indentation after a break
    newlines = 0;
    out.push_back(c);
  }

  auto first = out.find_first_not_of(" \n");
  if (first == std::string::npos) return {};
  auto last = out.find_last_not_of(" \n");
  return out.substr(first, last - first + 1);
}

Outcome apply_rules(Document doc, std::span<const CleaningRule> rules) {
  for (const auto& rule : rules) {
    const std::string name(rule_name(rule.kind));
    switch (rule.kind) {
      case RuleKind::strip_first_lines: {
        auto rest = strip_first_lines(doc.text, rule.n);
        if (!rest) return Dropped{name};
        doc.text = std::move(*rest);
        break;
      }
      case RuleKind::min_chars:
        if (utf8::length(doc.text) < rule.n) return Dropped{name};
        break;
      case RuleKind::strip_html:
        doc.text = strip_html(doc.text);
        break;
      case RuleKind::remove_edit_source:
        doc.text = remove_edit_source(doc.text);
        break;
      case RuleKind::language_filter: {
        auto guess = language_id(doc.text);
        if (guess.code != rule.lang || guess.confidence < rule.min_confidence) return Dropped{name};
        break;
      }
      case RuleKind::latex_to_markdown:
        doc.text = latex_to_markdown(doc.text);
        break;
      case RuleKind::normalize_whitespace:
        doc.text = normalize_whitespace(doc.text);
        break;
    }
    if (doc.text.empty()) return Dropped{name};
  }
  return doc;
}

namespace {

BatchResult collect(std::vector<Outcome>& outcomes) {
  BatchResult result;
  for (auto& outcome : outcomes) {
    if (auto* doc = std::get_if<Document>(&outcome))
      result.kept.push_back(std::move(*doc));
    else
      ++result.dropped[std::get<Dropped>(outcome).rule];
  }
  return result;
}

}  // namespace

BatchResult clean_batch_serial(std::vector<Document> docs, std::span<const CleaningRule> rules) {
  std::vector<Outcome> outcomes;
  outcomes.reserve(docs.size());
  for (auto& doc : docs) outcomes.push_back(apply_rules(std::move(doc), rules));
  return collect(outcomes);
}

BatchResult clean_batch(std::vector<Document> docs, std::span<const CleaningRule> rules) {
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::vector<Outcome> outcomes(docs.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      outcomes[i] = apply_rules(std::move(docs[i]), rules);
    } catch (...) {
#pragma omp critical(pint_clean_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return collect(outcomes);
}

}  // namespace pint::clean
