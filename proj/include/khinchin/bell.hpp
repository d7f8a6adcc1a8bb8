#ifndef KHINCHIN_BELL_HPP
#define KHINCHIN_BELL_HPP

// Exact combinatorial kernel: complete and partial Bell polynomials, the
// partition-indexed sums that map fulcrum quotients to normalized moments
// and back, and the moment/cumulant transforms.
//
// Conventions. Sequences are *order-indexed*: element k holds the order-k
// value, so x[1] is x_1. Element 0 is ignored on input unless stated
// otherwise. All routines are templates over the number type; with
// boost::multiprecision::cpp_rational they are exact.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"

namespace khinchin::bell {

using rational = boost::multiprecision::cpp_rational;
using integer = boost::multiprecision::cpp_int;

/// Largest order supported by the memoized partition tables.
inline constexpr int max_order = 16;

template <typename T>
inline constexpr bool is_exact_v =
    std::is_same_v<T, rational> || std::is_same_v<T, integer>;

/// One integer partition of `weight`, stored as multiplicities:
/// mult[j] is the number of parts equal to j (mult[0] unused).
struct MultiIndex {
    std::vector<int> mult;
    int weight = 0;
    int blocks = 0;
    /// weight! / prod_j (j!)^{m_j} m_j!, the number of set partitions of
    /// this block type. Fits in 64 bits for weight <= 16.
    std::uint64_t set_partitions = 0;
};

namespace detail {

inline std::uint64_t factorial_u64(int n) {
    std::uint64_t r = 1;
    for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
    return r;
}

inline void descend(int remaining, int largest, int min_part, std::vector<int>& mult,
                    std::vector<MultiIndex>& out, int n) {
    if (remaining == 0) {
        MultiIndex mi;
        mi.mult = mult;
        mi.weight = n;
        integer coef = factorial_u64(n);
        for (int j = 1; j <= n; ++j) {
            mi.blocks += mult[j];
            for (int r = 0; r < mult[j]; ++r) coef /= factorial_u64(j);
            coef /= factorial_u64(mult[j]);
        }
        mi.set_partitions = static_cast<std::uint64_t>(coef);
        out.push_back(std::move(mi));
        return;
    }
    for (int j = std::min(largest, remaining); j >= min_part; --j) {
        ++mult[j];
        descend(remaining - j, j, min_part, mult, out, n);
        --mult[j];
    }
}

struct partition_tables {
    // [min_part - 1][n]
    std::array<std::array<std::vector<MultiIndex>, max_order + 1>, 2> lists;
    partition_tables() {
        for (int min_part = 1; min_part <= 2; ++min_part) {
            for (int n = 0; n <= max_order; ++n) {
                std::vector<int> mult(static_cast<std::size_t>(n) + 1, 0);
                descend(n, n, min_part, mult, lists[min_part - 1][n], n);
            }
        }
    }
};

inline const partition_tables& tables() {
    static const partition_tables t;
    return t;
}

template <typename T>
T power(const T& x, int e) {
    T r(1);
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

template <typename T>
T factorial(int n) {
    T r(1);
    for (int i = 2; i <= n; ++i) r *= T(i);
    return r;
}

template <typename T>
T binomial(int n, int k) {
    if (k < 0 || k > n) return T(0);
    T r(1);
    for (int i = 1; i <= k; ++i) {
        r *= T(n - k + i);
        r /= T(i);
    }
    return r;
}

template <typename T>
T abs_value(const T& x) {
    return x < T(0) ? T(-x) : x;
}

inline void check_order(int n) {
    if (n < 0 || n > max_order)
        throw domain_error("bell: order outside [0, 16]");
}

template <typename T>
void check_agreement(const T& a, const T& b, const char* what) {
    if constexpr (is_exact_v<T>) {
        if (a != b) throw consistency_error(what);
    } else {
        const T scale = std::max(T(1), std::max(abs_value(a), abs_value(b)));
        if (abs_value(T(a - b)) > T(1e-10) * scale) throw consistency_error(what);
    }
}

}  // namespace detail

/// All partitions of n (parts >= min_part, min_part in {1, 2}), largest
/// part first. Memoized for n <= 16.
inline const std::vector<MultiIndex>& partitions(int n, int min_part = 1) {
    detail::check_order(n);
    if (min_part < 1 || min_part > 2) throw domain_error("bell: min_part must be 1 or 2");
    return detail::tables().lists[min_part - 1][n];
}

/// Complete Bell polynomial B_n(x_1..x_n) by the recurrence
/// B_{m+1} = sum_i C(m,i) B_{m-i} x_{i+1}. Requires x.size() > n.
template <typename T>
T complete_bell(int n, std::span<const T> x) {
    if (n < 0) throw domain_error("complete_bell: negative order");
    if (static_cast<int>(x.size()) <= n) throw domain_error("complete_bell: too few arguments");
    std::vector<T> b(static_cast<std::size_t>(n) + 1, T(0));
    b[0] = T(1);
    for (int m = 0; m < n; ++m) {
        T acc(0);
        T c(1);  // C(m, i)
        for (int i = 0; i <= m; ++i) {
            acc += c * b[m - i] * x[i + 1];
            c = c * T(m - i) / T(i + 1);
        }
        b[m + 1] = acc;
    }
    return b[n];
}

template <typename T>
T complete_bell(int n, const std::vector<T>& x) {
    return complete_bell<T>(n, std::span<const T>(x));
}

/// Partial Bell polynomial B_{n,k}(x_1..x_{n-k+1}) as an explicit sum over
/// partitions of n into k blocks.
template <typename T>
T incomplete_bell(int n, int k, std::span<const T> x) {
    detail::check_order(n);
    if (k < 0 || k > n) throw domain_error("incomplete_bell: need 0 <= k <= n");
    if (n == 0) return k == 0 ? T(1) : T(0);
    if (k == 0) return T(0);
    if (static_cast<int>(x.size()) < n - k + 2) throw domain_error("incomplete_bell: too few arguments");
    T total(0);
    for (const MultiIndex& mi : partitions(n)) {
        if (mi.blocks != k) continue;
        T term(static_cast<unsigned long long>(mi.set_partitions));
        for (int j = 1; j <= n; ++j)
            if (mi.mult[j]) term *= detail::power(x[j], mi.mult[j]);
        total += term;
    }
    return total;
}

template <typename T>
T incomplete_bell(int n, int k, const std::vector<T>& x) {
    return incomplete_bell<T>(n, k, std::span<const T>(x));
}

/// B_n assembled term by term from the defining partition sum
/// n! sum prod x_l^{j_l} / ((l!)^{j_l} j_l!).
template <typename T>
T complete_bell_partition_sum(int n, std::span<const T> x) {
    detail::check_order(n);
    if (static_cast<int>(x.size()) <= n) throw domain_error("complete_bell: too few arguments");
    const T nfact = detail::factorial<T>(n);
    T total(0);
    for (const MultiIndex& mi : partitions(n)) {
        T term = nfact;
        for (int l = 1; l <= n; ++l) {
            const int j = mi.mult[l];
            if (!j) continue;
            term *= detail::power(x[l], j);
            term /= detail::power(detail::factorial<T>(l), j) * detail::factorial<T>(j);
        }
        total += term;
    }
    return total;
}

/// Normalized moment of order n from the fulcrum quotients q (q[2] is
/// taken as 1): sum over 2m_2+...+nm_n = n of
/// n!/(m_2!...m_n!) prod_j (q_j/j!)^{m_j}.
template <typename T>
T normalized_moment_partition_sum(int n, std::span<const T> q) {
    detail::check_order(n);
    if (static_cast<int>(q.size()) <= n) throw domain_error("normalized moments: too few quotients");
    const T nfact = detail::factorial<T>(n);
    T total(0);
    for (const MultiIndex& mi : partitions(n, 2)) {
        T term = nfact;
        for (int j = 2; j <= n; ++j) {
            const int m = mi.mult[j];
            if (!m) continue;
            const T qj = j == 2 ? T(1) : q[j];
            term /= detail::factorial<T>(m);
            term *= detail::power(T(qj / detail::factorial<T>(j)), m);
        }
        total += term;
    }
    return total;
}

/// nu_n = B_n(0, 1, q_3, ..., q_n) for 3 <= n <= K. Returns an
/// order-indexed vector with nu[0] = 1, nu[1] = 0, nu[2] = 1. Every entry
/// is cross-checked against the partition sum (exact equality for exact T).
template <typename T>
std::vector<T> normalized_moments_from_quotients(int K, std::span<const T> q) {
    if (K < 3) throw domain_error("normalized moments: K must be >= 3");
    detail::check_order(K);
    if (static_cast<int>(q.size()) <= K) throw domain_error("normalized moments: too few quotients");
    std::vector<T> x(static_cast<std::size_t>(K) + 1, T(0));
    x[2] = T(1);
    for (int j = 3; j <= K; ++j) x[j] = q[j];
    std::vector<T> nu(static_cast<std::size_t>(K) + 1, T(0));
    nu[0] = T(1);
    nu[2] = T(1);
    for (int n = 3; n <= K; ++n) {
        nu[n] = complete_bell<T>(n, std::span<const T>(x));
        detail::check_agreement(nu[n], normalized_moment_partition_sum<T>(n, q),
                                "normalized moments: Bell route and partition sum disagree");
    }
    return nu;
}

template <typename T>
std::vector<T> normalized_moments_from_quotients(int K, const std::vector<T>& q) {
    return normalized_moments_from_quotients<T>(K, std::span<const T>(q));
}

/// Inverse map: q_n = sum over 2m_2+...+nm_n = n of
/// n!(l-1)!(-1)^{l+1}/(m_2!...m_n!) prod_j (nu_j/j!)^{m_j}, l = m_2+...+m_n,
/// with nu_2 = 1. Returns an order-indexed vector with q[2] = 1.
template <typename T>
std::vector<T> quotients_from_normalized_moments(int K, std::span<const T> nu) {
    if (K < 3) throw domain_error("quotients: K must be >= 3");
    detail::check_order(K);
    if (static_cast<int>(nu.size()) <= K) throw domain_error("quotients: too few moments");
    std::vector<T> q(static_cast<std::size_t>(K) + 1, T(0));
    q[2] = T(1);
    for (int n = 3; n <= K; ++n) {
        const T nfact = detail::factorial<T>(n);
        T total(0);
        for (const MultiIndex& mi : partitions(n, 2)) {
            const int l = mi.blocks;
            T term = nfact * detail::factorial<T>(l - 1);
            if (l % 2 == 0) term = -term;
            for (int j = 2; j <= n; ++j) {
                const int m = mi.mult[j];
                if (!m) continue;
                const T nuj = j == 2 ? T(1) : nu[j];
                term /= detail::factorial<T>(m);
                term *= detail::power(T(nuj / detail::factorial<T>(j)), m);
            }
            total += term;
        }
        q[n] = total;
    }
    return q;
}

template <typename T>
std::vector<T> quotients_from_normalized_moments(int K, const std::vector<T>& nu) {
    return quotients_from_normalized_moments<T>(K, std::span<const T>(nu));
}

/// Cumulants from raw moments mu'_1..mu'_K (order-indexed, mu[0] ignored):
/// kappa_n = mu'_n - sum_{k=1}^{n-1} C(n-1,k-1) kappa_k mu'_{n-k}.
template <typename T>
std::vector<T> cumulants_from_raw_moments(int K, std::span<const T> mu) {
    if (K < 1) throw domain_error("cumulants: K must be >= 1");
    if (static_cast<int>(mu.size()) <= K) throw domain_error("cumulants: too few moments");
    std::vector<T> kappa(static_cast<std::size_t>(K) + 1, T(0));
    for (int n = 1; n <= K; ++n) {
        T acc = mu[n];
        for (int k = 1; k < n; ++k) acc -= detail::binomial<T>(n - 1, k - 1) * kappa[k] * mu[n - k];
        kappa[n] = acc;
    }
    return kappa;
}

template <typename T>
std::vector<T> cumulants_from_raw_moments(int K, const std::vector<T>& mu) {
    return cumulants_from_raw_moments<T>(K, std::span<const T>(mu));
}

/// Raw moments mu'_n = B_n(kappa_1, ..., kappa_n); order-indexed, mu[0] = 1.
template <typename T>
std::vector<T> raw_moments_from_cumulants(int K, std::span<const T> kappa) {
    std::vector<T> mu(static_cast<std::size_t>(K) + 1, T(0));
    mu[0] = T(1);
    for (int n = 1; n <= K; ++n) mu[n] = complete_bell<T>(n, kappa);
    return mu;
}

/// Central moments E((X - kappa_1)^n) = B_n(0, kappa_2, ..., kappa_n).
template <typename T>
std::vector<T> central_moments_from_cumulants(int K, std::span<const T> kappa) {
    std::vector<T> x(kappa.begin(), kappa.end());
    if (x.size() > 1) x[1] = T(0);
    std::vector<T> mu(static_cast<std::size_t>(K) + 1, T(0));
    mu[0] = T(1);
    for (int n = 1; n <= K; ++n) mu[n] = complete_bell<T>(n, std::span<const T>(x));
    return mu;
}

/// E(Z^n) for Z ~ N(0,1): 0 for odd n, (2k)!/(k! 2^k) for n = 2k.
template <typename T>
T normal_moment(int n) {
    if (n % 2) return T(0);
    T r(1);
    for (int i = 1; i < n; i += 2) r *= T(i);  // (n-1)!!
    return r;
}

/// Stirling numbers of the second kind S(n, k), 0 <= n <= 40, by
/// S(n, k) = k S(n-1, k) + S(n-1, k-1).
inline const integer& stirling2(int n, int k) {
    constexpr int N = 40;
    static const std::vector<std::vector<integer>> table = [] {
        std::vector<std::vector<integer>> s(N + 1, std::vector<integer>(N + 1, 0));
        s[0][0] = 1;
        for (int i = 1; i <= N; ++i)
            for (int j = 1; j <= i; ++j) s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1];
        return s;
    }();
    static const integer zero = 0;
    if (n < 0 || n > N) throw domain_error("stirling2: n outside [0, 40]");
    if (k < 0 || k > n) return zero;
    return table[n][k];
}

}  // namespace khinchin::bell

#endif  // KHINCHIN_BELL_HPP
