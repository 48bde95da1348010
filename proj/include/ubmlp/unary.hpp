/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Unary bit-stream types and the fully parallel constant-multiply /
 * accumulate primitives. A stream's integer value is its popcount; its
 * real value is popcount/width.
 */

#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ubmlp/common.hpp"

namespace ubmlp {

/// Fixed-width bit vector valued by its number of ones. Position 0 is the
/// first bit. Immutable by convention: all operations return new values.
struct UnaryStream {
  std::vector<std::uint8_t> bits;  // each element 0 or 1

  int width() const { return static_cast<int>(bits.size()); }

  int popcount() const {
    return std::accumulate(bits.begin(), bits.end(), 0,
                           [](int a, std::uint8_t b) { return a + (b != 0); });
  }

  std::string to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
  }

  static UnaryStream from_string(const std::string& s) {
    UnaryStream u;
    u.bits.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1')
        throw range_error("UnaryStream::from_string: bad character");
      u.bits.push_back(c == '1');
    }
    return u;
  }

  bool operator==(const UnaryStream&) const = default;
};

/// Exact rational value of a stream; avoids float rounding in contracts.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational reduced() const {
    long long g = std::gcd(num, den);
    if (g == 0) return {0, 1};
    return {num / g, den / g};
  }
  double to_double() const { return double(num) / double(den); }
  bool operator==(const Rational& o) const {
    return num * o.den == o.num * den;
  }
};

/// Thermometer code: `level` ones packed at the low-index end.
struct ThermometerCode {
  int width_ = 0;
  int level_ = 0;

  int width() const { return width_; }
  int level() const { return level_; }

  UnaryStream materialize() const {
    UnaryStream u;
    u.bits.assign(width_, 0);
    for (int i = 0; i < level_; ++i) u.bits[i] = 1;
    return u;
  }
};

/// Rate pattern: `count` ones spread by the deterministic even-spacing rule
/// bit i = [ floor((i+1)*count/width) > floor(i*count/width) ].
struct RatePattern {
  int width_ = 0;
  int count_ = 0;

  int width() const { return width_; }
  int count() const { return count_; }

  bool bit(int i) const {
    const long long c = count_, n = width_;
    return ((i + 1) * c) / n > (i * c) / n;
  }

  UnaryStream materialize() const {
    UnaryStream u;
    u.bits.resize(width_);
    for (int i = 0; i < width_; ++i) u.bits[i] = bit(i) ? 1 : 0;
    return u;
  }
};

inline ThermometerCode encode_thermometer(int level, int width) {
  if (width < 1) throw range_error("encode_thermometer: width must be >= 1");
  if (level < 0 || level > width)
    throw range_error("encode_thermometer: level " + std::to_string(level) +
                      " out of [0," + std::to_string(width) + "]");
  return ThermometerCode{width, level};
}

inline RatePattern encode_rate(int count, int width) {
  if (width < 1) throw range_error("encode_rate: width must be >= 1");
  if (count < 0 || count > width)
    throw range_error("encode_rate: count " + std::to_string(count) +
                      " out of [0," + std::to_string(width) + "]");
  return RatePattern{width, count};
}

inline int unary_value_int(const UnaryStream& s) { return s.popcount(); }

inline Rational unary_value_real(const UnaryStream& s) {
  if (s.width() < 1) throw range_error("unary_value_real: zero width");
  return Rational{s.popcount(), s.width()};
}

/// Bitwise-AND constant multiply. popcount of the result is
/// floor(level*count/width) under the even-spacing rule.
inline UnaryStream unary_mul(const ThermometerCode& input,
                             const RatePattern& weight) {
  if (input.width() != weight.width())
    throw dimension_error("unary_mul: width mismatch (" +
                          std::to_string(input.width()) + " vs " +
                          std::to_string(weight.width()) + ")");
  UnaryStream a = input.materialize();
  UnaryStream b = weight.materialize();
  UnaryStream out;
  out.bits.resize(a.bits.size());
  for (std::size_t i = 0; i < a.bits.size(); ++i)
    out.bits[i] = a.bits[i] & b.bits[i];
  return out;
}

/// Parallel unary addition: bits are non-positional, so the sum is the
/// popcount of the concatenation.
inline int unary_accumulate(const std::vector<UnaryStream>& streams) {
  int sum = 0;
  for (const auto& s : streams) sum += s.popcount();
  return sum;
}

}  // namespace ubmlp
