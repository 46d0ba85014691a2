#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pint/clean.hpp"
#include "pint/document.hpp"

namespace pint::corpus {

enum class Role { textbook, web, code, finetune, alignment };
enum class Order { date_descending, file_order };

std::string_view to_string(Role role);
std::string_view to_string(Order order);
std::optional<Role> role_from_string(std::string_view s);
std::optional<Order> order_from_string(std::string_view s);

struct DatasetSpec {
  std::string name;
  Role role = Role::web;
  std::vector<std::filesystem::path> inputs;
  std::vector<clean::CleaningRule> cleaning_rules;
  std::optional<std::uint64_t> token_budget;
  Order order = Order::file_order;
};

struct Manifest {
  std::vector<DatasetSpec> datasets;
  std::map<Role, double> target_proportions;
  std::uint64_t total_token_target = 0;
  // Tokenizer definition used for token accounting; empty means the
  // built-in byte-level tokenizer.
  std::filesystem::path tokenizer;

  const DatasetSpec* find(std::string_view name) const;
  const DatasetSpec& at(std::string_view name) const;  // throws Error
};

// Parses a YAML manifest. Relative input and tokenizer paths resolve against
// the manifest's directory. Throws ParseError / ValidationError.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::string_view yaml, const std::filesystem::path& base_dir = {});

// Checks every Manifest invariant; called by the loaders.
void validate(const Manifest& manifest);

struct RecordError {
  std::filesystem::path file;
  std::size_t line = 0;
  std::string message;
};

struct ReadResult {
  std::vector<Document> documents;
  std::vector<RecordError> errors;  // skipped records, in file/line order

  std::size_t skipped() const { return errors.size(); }
};

// Reads every input of `spec` in the document line format. Malformed records
// (bad JSON, missing id/text, duplicate id, missing date under
// date_descending) are skipped and reported. Files are parsed in parallel and
// merged in declared order. Documents without a `source` get spec.name.
ReadResult read_documents(const DatasetSpec& spec);

// Sorts by date descending; unparseable dates sort last; ties by id ascending.
void sort_date_descending(std::vector<Document>& docs);

using TokenCounter = std::function<std::uint64_t(const Document&)>;

struct Subsample {
  std::size_t count = 0;      // length of the emitted prefix
  std::uint64_t total = 0;    // exact cumulative token count of the prefix
};

// Longest prefix whose running total stays below `budget`, plus the document
// that reaches or crosses it.
Subsample subsample_by_budget(std::span<const Document> docs, std::uint64_t budget, const TokenCounter& counter);

// Streaming form of subsample_by_budget.
class BudgetGate {
 public:
  explicit BudgetGate(std::uint64_t budget) : budget_(budget) {}

  // True if a document of `tokens` tokens is emitted; updates the total.
  bool admit(std::uint64_t tokens) {
    if (total_ >= budget_) return false;
    total_ += tokens;
    return true;
  }
  bool exhausted() const { return total_ >= budget_; }
  std::uint64_t total() const { return total_; }

 private:
  std::uint64_t budget_;
  std::uint64_t total_ = 0;
};

}  // namespace pint::corpus
