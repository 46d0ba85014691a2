#include "pint/utf8.hpp"

namespace pint::utf8 {

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Returns the decoded scalar and its byte length, or {kReplacement, 0} when
// the bytes at `pos` are not a well-formed sequence.
std::pair<char32_t, std::size_t> decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  const std::size_t left = s.size() - pos;
  if (b0 < 0x80) return {b0, 1};
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    if (left < 2 || !is_continuation(s[pos + 1])) return {kReplacement, 0};
    return {static_cast<char32_t>(((b0 & 0x1F) << 6) | (s[pos + 1] & 0x3F)), 2};
  }
  if (b0 >= 0xE0 && b0 <= 0xEF) {
    if (left < 3) return {kReplacement, 0};
    const auto b1 = static_cast<unsigned char>(s[pos + 1]);
    const auto b2 = static_cast<unsigned char>(s[pos + 2]);
    if (!is_continuation(b1) || !is_continuation(b2)) return {kReplacement, 0};
    if (b0 == 0xE0 && b1 < 0xA0) return {kReplacement, 0};  // overlong
    if (b0 == 0xED && b1 >= 0xA0) return {kReplacement, 0};  // surrogate
    return {static_cast<char32_t>(((b0 & 0x0F) << 12) | ((b1 & 0x3F) << 6) | (b2 & 0x3F)), 3};
  }
  if (b0 >= 0xF0 && b0 <= 0xF4) {
    if (left < 4) return {kReplacement, 0};
    const auto b1 = static_cast<unsigned char>(s[pos + 1]);
    const auto b2 = static_cast<unsigned char>(s[pos + 2]);
    const auto b3 = static_cast<unsigned char>(s[pos + 3]);
    if (!is_continuation(b1) || !is_continuation(b2) || !is_continuation(b3)) return {kReplacement, 0};
    if (b0 == 0xF0 && b1 < 0x90) return {kReplacement, 0};
    if (b0 == 0xF4 && b1 >= 0x90) return {kReplacement, 0};
    return {static_cast<char32_t>(((b0 & 0x07) << 18) | ((b1 & 0x3F) << 12) | ((b2 & 0x3F) << 6) |
                                  (b3 & 0x3F)),
            4};
  }
  return {kReplacement, 0};
}

}  // namespace

bool is_valid(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto [cp, len] = decode(s, pos);
    if (len == 0) return false;
    pos += len;
  }
  return true;
}

std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) pos += sequence_length(s, pos);
  return n;
}

char32_t next(std::string_view s, std::size_t& pos) {
  auto [cp, len] = decode(s, pos);
  pos += len == 0 ? 1 : len;
  return cp;
}

std::size_t sequence_length(std::string_view s, std::size_t pos) {
  auto len = decode(s, pos).second;
  return len == 0 ? 1 : len;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(char32_t cp) {
  std::string out;
  append(out, cp);
  return out;
}

}  // namespace pint::utf8
