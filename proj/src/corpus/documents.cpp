#include <algorithm>
#include <exception>
#include <unordered_set>

#include "pint/corpus.hpp"
#include "pint/error.hpp"
#include "pint/lines.hpp"

namespace pint::corpus {

namespace {

struct FileBatch {
  std::vector<std::pair<std::size_t, Document>> docs;  // (line, document)
  std::vector<RecordError> errors;
};

FileBatch parse_file(const std::filesystem::path& path) {
  FileBatch batch;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    if (is_blank(line)) return;
    try {
      batch.docs.emplace_back(lineno, parse_document(line));
    } catch (const ParseError& e) {
      batch.errors.push_back({path, lineno, e.what()});
    }
  });
  return batch;
}

}  // namespace

void sort_date_descending(std::vector<Document>& docs) {
  struct Keyed {
    std::optional<Date> date;
    Document* doc;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(docs.size());
  for (auto& d : docs) keyed.push_back({d.date ? parse_iso_date(*d.date) : std::nullopt, &d});
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.date.has_value() != b.date.has_value()) return a.date.has_value();
    if (a.date && *a.date != *b.date) return *a.date > *b.date;
    return a.doc->id < b.doc->id;
  });
  std::vector<Document> sorted;
  sorted.reserve(docs.size());
  for (auto& k : keyed) sorted.push_back(std::move(*k.doc));
  docs = std::move(sorted);
}

ReadResult read_documents(const DatasetSpec& spec) {
  const auto n = static_cast<std::ptrdiff_t>(spec.inputs.size());
  std::vector<FileBatch> batches(spec.inputs.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      batches[i] = parse_file(spec.inputs[i]);
    } catch (...) {
#pragma omp critical(pint_read_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Sequential merge keeps declared file order and first-wins id uniqueness.
  ReadResult result;
  std::unordered_set<std::string> seen;
  for (std::size_t f = 0; f < batches.size(); ++f) {
    auto& batch = batches[f];
    auto err = batch.errors.begin();
    for (auto& [line, doc] : batch.docs) {
      for (; err != batch.errors.end() && err->line < line; ++err) result.errors.push_back(std::move(*err));
      if (spec.order == Order::date_descending && !doc.date) {
        result.errors.push_back({spec.inputs[f], line, "missing 'date' (dataset is date-ordered)"});
        continue;
      }
      if (!seen.insert(doc.id).second) {
        result.errors.push_back({spec.inputs[f], line, "duplicate id '" + doc.id + "'"});
        continue;
      }
      if (doc.source.empty()) doc.source = spec.name;
      result.documents.push_back(std::move(doc));
    }
    for (; err != batch.errors.end(); ++err) result.errors.push_back(std::move(*err));
  }

  if (spec.order == Order::date_descending) sort_date_descending(result.documents);
  return result;
}

Subsample subsample_by_budget(std::span<const Document> docs, std::uint64_t budget, const TokenCounter& counter) {
  BudgetGate gate(budget);
  Subsample out;
  for (const auto& doc : docs) {
    if (gate.exhausted()) break;
    gate.admit(counter(doc));
    ++out.count;
  }
  out.total = gate.total();
  return out;
}

}  // namespace pint::corpus
