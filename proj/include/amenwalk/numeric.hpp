#pragma once

#include <gmpxx.h>

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace amenwalk {

using Rational = mpq_class;

// Global arithmetic mode, chosen once per run.
enum class Arithmetic { exact, floating };

std::string_view to_string(Arithmetic mode);

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Rational>;

// Parses "3", "-0.125", "2.5e-3" or "1/3" exactly.
Rational parse_rational(std::string_view text);

// "p/q", or "p" for integers.
std::string to_string(const Rational& value);

// Terminating decimal when the denominator is 2^a 5^b, else "p/q".
std::string to_decimal_string(const Rational& value);

// Fixed formatting used by every report: 12 significant digits.
std::string format_real(double value);

template <Scalar T>
T from_rational(const Rational& value) {
  if constexpr (std::same_as<T, double>) {
    return value.get_d();
  } else {
    return value;
  }
}

template <Scalar T>
double to_double(const T& value) {
  if constexpr (std::same_as<T, double>) {
    return value;
  } else {
    return value.get_d();
  }
}

template <Scalar T>
bool is_zero(const T& value) {
  if constexpr (std::same_as<T, double>) {
    return value == 0.0;
  } else {
    return sgn(value) == 0;
  }
}

// Neumaier-compensated summation for doubles; plain accumulation for
// rationals, which are exact anyway.
template <Scalar T>
class Accumulator {
 public:
  void add(const T& x) { sum_ += x; }
  T value() const { return sum_; }

 private:
  T sum_ = 0;
};

template <>
class Accumulator<double> {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// SplitMix64 step; used to derive independent sub-seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1) from 53 random bits.
template <class Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace amenwalk
