#include "runsched/time.hpp"

#include <charconv>
#include <stdexcept>

namespace runsched {

TimeTick parse_duration(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> TimeTick { throw std::invalid_argument("bad duration '" + original + "'"); };

  std::int64_t scale = 1;
  if (text.ends_with("us")) {
    text.remove_suffix(2);
  } else if (text.ends_with("ms")) {
    text.remove_suffix(2);
    scale = 1000;
  } else if (text.ends_with("s")) {
    text.remove_suffix(1);
    scale = 1000000;
  }
  if (text.empty()) return fail();

  std::string_view whole = text;
  std::string_view frac;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    whole = text.substr(0, dot);
    frac = text.substr(dot + 1);
    if (frac.empty()) return fail();
  }
  if (whole.empty()) whole = "0";

  std::int64_t integral = 0;
  auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), integral);
  if (ec != std::errc{} || p != whole.data() + whole.size() || integral < 0) return fail();

  std::int64_t us = integral * scale;
  std::int64_t place = scale;
  for (char c : frac) {
    if (c < '0' || c > '9') return fail();
    const int digit = c - '0';
    if (place % 10 != 0) {
      if (digit != 0) return fail();  // finer than a microsecond
      continue;
    }
    place /= 10;
    us += digit * place;
  }
  return TimeTick{us};
}

std::string format_duration(TimeTick t) {
  if (t.us != 0 && t.us % 1000000 == 0) return std::to_string(t.us / 1000000) + "s";
  if (t.us != 0 && t.us % 1000 == 0) return std::to_string(t.us / 1000) + "ms";
  return std::to_string(t.us) + "us";
}

}  // namespace runsched
