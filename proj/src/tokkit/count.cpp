#include <limits>
#include <memory>

#include "pint/tokkit.hpp"

namespace pint::tok {

namespace {

EncodeError with_document(const Document& doc, const EncodeError& e) {
  return EncodeError("document '" + doc.id + "': " + e.what());
}

}  // namespace

std::uint64_t count_tokens_serial(const TokenizerDef& def, std::span<const Document> docs) {
  Encoder enc(def);
  std::uint64_t total = 0;
  for (const auto& doc : docs) {
    try {
      total += enc.count(doc.text);
    } catch (const EncodeError& e) {
      throw with_document(doc, e);
    }
  }
  return total;
}

std::uint64_t count_tokens(const TokenizerDef& def, std::span<const Document> docs) {
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::uint64_t total = 0;
  // Lowest failing index wins so the reported error matches the serial path.
  std::ptrdiff_t first_failure = std::numeric_limits<std::ptrdiff_t>::max();
  std::string failure_message;
#pragma omp parallel reduction(+ : total)
  {
    Encoder enc(def);
#pragma omp for schedule(dynamic, 32)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        total += enc.count(docs[i].text);
      } catch (const EncodeError& e) {
#pragma omp critical(pint_count_failure)
        if (i < first_failure) {
          first_failure = i;
          failure_message = with_document(docs[i], e).what();
        }
      }
    }
  }
  if (!failure_message.empty()) throw EncodeError(failure_message);
  return total;
}

std::function<std::uint64_t(const Document&)> make_counter(const TokenizerDef& def) {
  auto enc = std::make_shared<Encoder>(def);
  return [enc](const Document& doc) -> std::uint64_t {
    try {
      return enc->count(doc.text);
    } catch (const EncodeError& e) {
      throw with_document(doc, e);
    }
  };
}

}  // namespace pint::tok
