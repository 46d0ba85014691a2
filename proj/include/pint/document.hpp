#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace pint {

// Calendar date; month/day default to 1 when the source gives only a year or
// year-month.
struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;
};

// Accepts YYYY, YYYY-MM, YYYY-MM-DD, optionally followed by a 'T' time part
// which is ignored.
std::optional<Date> parse_iso_date(std::string_view s);

struct Document {
  std::string id;
  std::string source;
  std::optional<std::string> date;  // raw, as found in the record
  std::string text;
  std::map<std::string, std::string> meta;

  bool operator==(const Document&) const = default;
};

// Serializes to one line of the document line format (no trailing newline).
// Key order is fixed: id, source, date, text, meta.
std::string to_line(const Document& doc);

// Parses one record. Throws ParseError for malformed input: not an object,
// missing/empty `id`, missing `text`, wrongly typed fields, invalid UTF-8.
Document parse_document(std::string_view line);

nlohmann::ordered_json to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j);

}  // namespace pint
