#include "pint/percent.hpp"

#include "pint/error.hpp"

namespace pint {

std::int64_t percent_hundredths(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ValidationError("percentage of a non-positive total");
  const __int128 scaled = static_cast<__int128>(num) * 10000;
  const __int128 mag = scaled < 0 ? -scaled : scaled;
  const __int128 rounded = (2 * mag + den) / (2 * static_cast<__int128>(den));
  return static_cast<std::int64_t>(scaled < 0 ? -rounded : rounded);
}

std::string format_hundredths(std::int64_t h) {
  std::string out = h < 0 ? "-" : "";
  std::uint64_t mag = h < 0 ? static_cast<std::uint64_t>(-(h + 1)) + 1 : static_cast<std::uint64_t>(h);
  out += std::to_string(mag / 100);
  out += '.';
  auto frac = mag % 100;
  if (frac < 10) out += '0';
  out += std::to_string(frac);
  return out;
}

std::string percent_2dp(std::int64_t num, std::int64_t den) {
  return format_hundredths(percent_hundredths(num, den));
}

}  // namespace pint
