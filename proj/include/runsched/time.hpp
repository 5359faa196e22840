#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace runsched {

/// Simulated time in integer microseconds. Every period, offset, budget and
/// jitter bound in the system is one of these; there is no fractional time.
struct TimeTick {
  std::int64_t us = 0;

  friend constexpr auto operator<=>(TimeTick, TimeTick) = default;

  constexpr TimeTick& operator+=(TimeTick o) {
    us += o.us;
    return *this;
  }
  constexpr TimeTick& operator-=(TimeTick o) {
    us -= o.us;
    return *this;
  }
};

constexpr TimeTick operator+(TimeTick a, TimeTick b) { return TimeTick{a.us + b.us}; }
constexpr TimeTick operator-(TimeTick a, TimeTick b) { return TimeTick{a.us - b.us}; }
constexpr TimeTick operator*(std::int64_t k, TimeTick t) { return TimeTick{k * t.us}; }

inline constexpr TimeTick kNever{std::numeric_limits<std::int64_t>::max()};

constexpr double to_seconds(TimeTick t) { return static_cast<double>(t.us) * 1e-6; }

namespace literals {
constexpr TimeTick operator""_us(unsigned long long v) { return TimeTick{static_cast<std::int64_t>(v)}; }
constexpr TimeTick operator""_ms(unsigned long long v) { return TimeTick{static_cast<std::int64_t>(v) * 1000}; }
constexpr TimeTick operator""_s(unsigned long long v) { return TimeTick{static_cast<std::int64_t>(v) * 1000000}; }
}  // namespace literals

// Accepts "750us", "10ms", "0.75ms", "1s" and bare integers (microseconds).
// Throws std::invalid_argument when the text is malformed, negative, or does
// not land on a whole microsecond.
TimeTick parse_duration(std::string_view text);

// Shortest exact rendering, e.g. 20000 -> "20ms", 750 -> "750us".
std::string format_duration(TimeTick t);

}  // namespace runsched
