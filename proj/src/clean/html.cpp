#include <algorithm>
#include <array>
#include <cctype>

#include "pint/clean.hpp"
#include "pint/utf8.hpp"

namespace pint::clean {

namespace {

struct NamedEntity {
  std::string_view name;
  char32_t cp;
};

constexpr std::array<NamedEntity, 20> kEntities{{
    {"amp", '&'},      {"lt", '<'},         {"gt", '>'},        {"quot", '"'},
    {"apos", '\''},    {"nbsp", ' '},       {"ndash", 0x2013},  {"mdash", 0x2014},
    {"hellip", 0x2026}, {"lsquo", 0x2018},  {"rsquo", 0x2019},  {"ldquo", 0x201C},
    {"rdquo", 0x201D}, {"copy", 0x00A9},    {"reg", 0x00AE},    {"trade", 0x2122},
    {"laquo", 0x00AB}, {"raquo", 0x00BB},   {"middot", 0x00B7}, {"deg", 0x00B0},
}};

// Tags that separate blocks of text. Value is the number of line breaks the
// tag contributes (capped by what's already in the output).
int block_breaks(std::string_view tag) {
  static constexpr std::array<std::string_view, 10> kParagraph{
      "p", "div", "section", "article", "blockquote", "pre", "table", "ul", "ol", "h"};
  if (tag == "br" || tag == "li" || tag == "tr" || tag == "hr" || tag == "dt" || tag == "dd") return 1;
  if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6') return 2;
  for (auto p : kParagraph)
    if (tag == p) return 2;
  return 0;
}

bool iequals_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != word[i]) return false;
  return true;
}

std::size_t ifind(std::string_view text, std::size_t from, std::string_view word) {
  for (std::size_t i = from; i + word.size() <= text.size(); ++i)
    if (iequals_at(text, i, word)) return i;
  return std::string_view::npos;
}

void push_breaks(std::string& out, int wanted) {
  int have = 0;
  for (auto it = out.rbegin(); it != out.rend() && *it == '\n' && have < 2; ++it) ++have;
  if (out.empty()) return;  // no leading breaks
  for (int i = have; i < wanted; ++i) out.push_back('\n');
}

// Tries to decode an entity at `pos` (which holds '&'). On success appends
// the character and returns the entity's length.
std::size_t decode_entity(std::string_view text, std::size_t pos, std::string& out) {
  auto semi = text.find(';', pos + 1);
  if (semi == std::string_view::npos || semi - pos > 12) return 0;
  std::string_view body = text.substr(pos + 1, semi - pos - 1);
  if (body.empty()) return 0;
  if (body[0] == '#') {
    bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
    std::string_view digits = body.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    unsigned long value = 0;
    for (char c : digits) {
      int d;
      if (c >= '0' && c <= '9')
        d = c - '0';
      else if (hex && c >= 'a' && c <= 'f')
        d = c - 'a' + 10;
      else if (hex && c >= 'A' && c <= 'F')
        d = c - 'A' + 10;
      else
        return 0;
      value = value * (hex ? 16 : 10) + static_cast<unsigned long>(d);
      if (value > 0x10FFFF) value = 0x110000;
    }
    char32_t cp = static_cast<char32_t>(value);
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = utf8::kReplacement;
    utf8::append(out, cp);
    return semi - pos + 1;
  }
  for (const auto& e : kEntities) {
    if (e.name == body) {
      utf8::append(out, e.cp);
      return semi - pos + 1;
    }
  }
  return 0;
}

std::string strip_html_once(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '<' && i + 1 < text.size()) {
      char n = text[i + 1];
      if (text.compare(i, 4, "<!--") == 0) {
        auto end = text.find("-->", i + 4);
        i = end == std::string_view::npos ? text.size() : end + 3;
        continue;
      }
      bool tag_start = std::isalpha(static_cast<unsigned char>(n)) || n == '/' || n == '!' || n == '?';
      auto close = tag_start ? text.find('>', i + 1) : std::string_view::npos;
      if (close != std::string_view::npos) {
        std::size_t p = i + 1;
        if (text[p] == '/') ++p;
        std::size_t name_end = p;
        while (name_end < close && std::isalnum(static_cast<unsigned char>(text[name_end]))) ++name_end;
        std::string name(text.substr(p, name_end - p));
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        bool opening = text[i + 1] != '/';
        if (opening && (name == "script" || name == "style")) {
          auto end = ifind(text, close + 1, "</" + name);
          if (end == std::string_view::npos) {
            i = text.size();
          } else {
            auto end_close = text.find('>', end);
            i = end_close == std::string_view::npos ? text.size() : end_close + 1;
          }
          continue;
        }
        if (int breaks = block_breaks(name); breaks > 0) push_breaks(out, breaks);
        i = close + 1;
        continue;
      }
    }
    if (c == '&') {
      if (auto len = decode_entity(text, i, out); len > 0) {
        i += len;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

}  // namespace

std::string strip_html(std::string_view text) {
  // Every rewriting pass strictly shortens the text, so this terminates.
  std::string current = strip_html_once(text);
  for (;;) {
    std::string next = strip_html_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

}  // namespace pint::clean
