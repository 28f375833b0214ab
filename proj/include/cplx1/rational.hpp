#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>

#include "cplx1/numeric.hpp"

namespace cplx1 {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

inline std::int64_t to_int64(const BigInt& x, const char* what = "value") {
  if (x > std::numeric_limits<std::int64_t>::max() || x < std::numeric_limits<std::int64_t>::min())
    throw BudgetError(std::string(what) + " exceeds 64-bit range");
  return x.convert_to<std::int64_t>();
}

inline double to_double(const BigRat& q) { return q.convert_to<double>(); }

}  // namespace cplx1
