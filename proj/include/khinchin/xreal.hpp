#ifndef KHINCHIN_XREAL_HPP
#define KHINCHIN_XREAL_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/float128.hpp>

namespace khinchin {

/// Working real type for every series summation: IEEE binary128
/// (113-bit mantissa, about 34 significant decimal digits).
using xreal = boost::multiprecision::float128;

inline const xreal xpi = boost::multiprecision::float128(
    boost::math::constants::pi<boost::multiprecision::float128>());

inline xreal xinfinity() { return std::numeric_limits<xreal>::infinity(); }

inline bool is_finite(const xreal& x) { return boost::multiprecision::isfinite(x); }

inline double to_double(const xreal& x) { return static_cast<double>(x); }

inline std::string to_string(const xreal& x, int digits = 34) { return x.str(digits); }

/// Neumaier's variant of Kahan summation. Terms may arrive in any order and
/// sign; the running compensation keeps the error independent of the count.
template <typename T>
class compensated_sum {
public:
    compensated_sum() = default;
    explicit compensated_sum(const T& init) : sum_(init) {}

    compensated_sum& operator+=(const T& x) {
        T t = sum_ + x;
        if (abs(sum_) >= abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        return *this;
    }
    compensated_sum& operator-=(const T& x) { return *this += T(-x); }

    T value() const { return sum_ + comp_; }

private:
    static T abs(const T& x) { return x < T(0) ? T(-x) : x; }
    T sum_{0};
    T comp_{0};
};

/// x^n by repeated squaring; n may be zero.
template <typename T>
T ipow(T x, unsigned n) {
    T r(1);
    while (n) {
        if (n & 1u) r *= x;
        x *= x;
        n >>= 1u;
    }
    return r;
}

}  // namespace khinchin

#endif  // KHINCHIN_XREAL_HPP
