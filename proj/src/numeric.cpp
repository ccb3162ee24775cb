#include "amenwalk/numeric.hpp"

#include <cctype>
#include <cstdio>

#include "amenwalk/error.hpp"

namespace amenwalk {

std::string_view to_string(Arithmetic mode) {
  return mode == Arithmetic::exact ? "exact" : "double";
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

[[noreturn]] void bad_number(std::string_view text) {
  throw InvalidInput("not a number: \"" + std::string(text) + "\"");
}

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) bad_number(text);

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::string_view num = s.substr(0, slash);
    std::string_view den = s.substr(slash + 1);
    bool negative = false;
    if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
      negative = num.front() == '-';
      num.remove_prefix(1);
    }
    if (!all_digits(num) || !all_digits(den)) bad_number(text);
    const mpz_class n(std::string(num), 10), d(std::string(den), 10);
    if (d == 0) throw InvalidInput("zero denominator in \"" + std::string(text) + "\"");
    Rational r(negative ? mpz_class(-n) : n, d);
    r.canonicalize();
    return r;
  }

  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = s.substr(e + 1);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 6) bad_number(text);
    exponent = std::stol(std::string(exp_part));
    if (exp_negative) exponent = -exponent;
    s = s.substr(0, e);
  }
  std::string_view int_part = s, frac_part;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    int_part = s.substr(0, dot);
    frac_part = s.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) bad_number(text);
  if (!int_part.empty() && !all_digits(int_part)) bad_number(text);
  if (!frac_part.empty() && !all_digits(frac_part)) bad_number(text);

  mpz_class digits(std::string(int_part) + std::string(frac_part), 10);
  exponent -= static_cast<long>(frac_part.size());
  Rational r;
  if (exponent >= 0) {
    r = Rational(digits * pow10(static_cast<unsigned long>(exponent)));
  } else {
    r = Rational(digits, pow10(static_cast<unsigned long>(-exponent)));
  }
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

std::string to_string(const Rational& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::string to_decimal_string(const Rational& value) {
  mpz_class den = value.get_den();
  unsigned long twos = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(2).get_mpz_t());
  unsigned long fives = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(5).get_mpz_t());
  if (den != 1) return to_string(value);
  const unsigned long places = std::max(twos, fives);
  if (places == 0) return value.get_num().get_str();
  mpz_class scaled = value.get_num() * pow10(places) / value.get_den();
  const bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string digits = scaled.get_str();
  if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
  digits.insert(digits.size() - places, ".");
  while (digits.back() == '0') digits.pop_back();
  if (digits.back() == '.') digits.pop_back();
  return negative ? "-" + digits : digits;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

}  // namespace amenwalk
