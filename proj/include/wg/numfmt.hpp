#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "wg/exceptions.hpp"

namespace wg {

/// 17 significant digits: enough for the decimal form to round-trip exactly.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Scientific form with a zero-leading mantissa, the way convergence
/// tables are traditionally typeset: 1.688e-5 renders as "0.1688E-04".
inline std::string fortran_sci(double x) {
  if (x == 0.0) return "0.0000E+00";
  if (std::isnan(x)) return "       NaN";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3E", std::fabs(x));  // d.dddE(sign)ee
  std::string s = buf;
  std::size_t epos = s.find('E');
  std::string digits = s.substr(0, epos);
  digits.erase(digits.find('.'), 1);
  int exp = std::atoi(s.c_str() + epos + 1) + 1;
  char out[40];
  std::snprintf(out, sizeof(out), "%s0.%sE%+03d", x < 0.0 ? "-" : "",
                digits.c_str(), exp);
  return out;
}

inline double parse_double(const std::string& tok) {
  const char* s = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0') throw MeshError("not a number: '" + tok + "'");
  return v;
}

inline long parse_long(const std::string& tok) {
  const char* s = tok.c_str();
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0') throw MeshError("not an integer: '" + tok + "'");
  return v;
}

}  // namespace wg
