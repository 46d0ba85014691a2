#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace pint::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

bool is_valid(std::string_view s);

// Number of Unicode scalar values. Invalid bytes count as one each.
std::size_t length(std::string_view s);

// Decodes the scalar starting at `pos` and advances `pos` past it. Invalid
// sequences yield kReplacement and advance by one byte.
char32_t next(std::string_view s, std::size_t& pos);

// Byte length of the sequence starting at `pos` (1 for invalid bytes).
std::size_t sequence_length(std::string_view s, std::size_t pos);

void append(std::string& out, char32_t cp);

std::string encode(char32_t cp);

}  // namespace pint::utf8
