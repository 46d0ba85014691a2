#pragma once

#include <cstdint>
#include <string>

namespace pint {

// 100 * num / den in hundredths of a percent, rounded half away from zero,
// using exact integer arithmetic. den must be positive.
std::int64_t percent_hundredths(std::int64_t num, std::int64_t den);

// Renders percent_hundredths as "17.31".
std::string percent_2dp(std::int64_t num, std::int64_t den);

std::string format_hundredths(std::int64_t hundredths);

}  // namespace pint
