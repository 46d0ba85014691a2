#include "pint/document.hpp"

#include <charconv>

#include "pint/error.hpp"

namespace pint {

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{};
}

int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view s) {
  if (auto t = s.find('T'); t != std::string_view::npos) s = s.substr(0, t);
  Date d;
  if (s.size() < 4 || !parse_int(s.substr(0, 4), d.year)) return std::nullopt;
  if (s.size() == 4) return d;
  if (s.size() < 7 || s[4] != '-' || !parse_int(s.substr(5, 2), d.month)) return std::nullopt;
  if (d.month < 1 || d.month > 12) return std::nullopt;
  if (s.size() == 7) return d;
  if (s.size() != 10 || s[7] != '-' || !parse_int(s.substr(8, 2), d.day)) return std::nullopt;
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
  return d;
}

nlohmann::ordered_json to_json(const Document& doc) {
  nlohmann::ordered_json j;
  j["id"] = doc.id;
  if (!doc.source.empty()) j["source"] = doc.source;
  if (doc.date) j["date"] = *doc.date;
  j["text"] = doc.text;
  if (!doc.meta.empty()) j["meta"] = doc.meta;
  return j;
}

std::string to_line(const Document& doc) { return to_json(doc).dump(); }

Document document_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("record is not an object");
  if (!j.contains("id")) throw ParseError("missing 'id'");
  if (!j.contains("text")) throw ParseError("missing 'text'");
  Document doc;
  doc.id = string_field(j, "id");
  if (doc.id.empty()) throw ParseError("empty 'id'");
  doc.text = string_field(j, "text");
  if (j.contains("source") && !j["source"].is_null()) doc.source = string_field(j, "source");
  if (j.contains("date") && !j["date"].is_null()) doc.date = string_field(j, "date");
  if (j.contains("meta") && !j["meta"].is_null()) {
    const auto& meta = j["meta"];
    if (!meta.is_object()) throw ParseError("field 'meta' must be an object");
    for (const auto& [k, v] : meta.items()) {
      if (v.is_string())
        doc.meta.emplace(k, v.get<std::string>());
      else
        doc.meta.emplace(k, v.dump());
    }
  }
  return doc;
}

Document parse_document(std::string_view line) {
  nlohmann::json j;
  try {
    // The parser rejects ill-formed UTF-8 inside strings.
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  return document_from_json(j);
}

}  // namespace pint
