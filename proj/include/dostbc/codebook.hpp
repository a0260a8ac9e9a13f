#pragma once

#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dostbc/code.hpp"
#include "dostbc/rational.hpp"
#include "dostbc/verifier.hpp"

namespace dostbc {

/// Thrown when a construction runs to completion but its output fails
/// verification. Distinct from std::invalid_argument (bad parameters).
class ConstructionVerificationError : public std::runtime_error {
  public:
    explicit ConstructionVerificationError(const std::string& what)
        : std::runtime_error(what) {}
};

enum class RateFamily { Dostbc, RowMonomial };

/// Data-rate upper bound, kept in its natural N/T form (unreduced).
struct RateBound {
    std::int64_t numerator = 0;
    std::int64_t denominator = 1;
    RateFamily family = RateFamily::Dostbc;

    Rational value() const { return Rational(numerator, denominator); }
};

/// N / ceil(N*K/2), valid for any number of symbols and relays.
inline RateBound rate_bound_dostbc(int n, int k) {
    if (n < 1 || k < 1) throw std::invalid_argument("rate_bound_dostbc: need N, K >= 1");
    const std::int64_t t = (static_cast<std::int64_t>(n) * k + 1) / 2;
    return {n, t, RateFamily::Dostbc};
}

/// Piecewise bound for row-monomial codes, by the parity of N = 2l(+1) and
/// K = 2m(+1). Requires l, m >= 1, i.e. N, K >= 2.
inline RateBound rate_bound_row_monomial(int n, int k) {
    if (n < 2 || k < 2)
        throw std::invalid_argument("rate_bound_row_monomial: need N, K >= 2");
    const std::int64_t l = n / 2;  // floor; for odd n, n = 2l+1
    const std::int64_t m = k / 2;
    std::int64_t t;
    if (n % 2 == 0 && k % 2 == 0) {
        t = 2 * l * m;  // rate 1/m in N/T form
    } else if (n % 2 == 1 && k % 2 == 0) {
        t = 2 * l * m + 2 * m;
    } else if (n % 2 == 0 && k % 2 == 1) {
        t = 2 * l * m + 2 * l;  // rate 1/(m+1)
    } else {
        t = 2 * l * m + std::max(2 * m + l + 1, 2 * l + m + 1);
    }
    return {n, t, RateFamily::RowMonomial};
}

namespace detail {

/// Lays the length-N alternating-sign diagonal into relay `even_relay`'s
/// a-matrix and the swap-pair block diagonal into relay `odd_relay`'s
/// b-matrix, over columns [col0, col0+block_n) and the symbol rows listed in
/// `symbols`.
inline void place_pair_block(std::vector<RelayMatrixPair>& relays, int even_relay,
                             int odd_relay, const std::vector<int>& symbols, int col0) {
    const int block_n = static_cast<int>(symbols.size());
    for (int t = 0; t < block_n; ++t) {
        relays[even_relay].a(symbols[t], col0 + t) =
            (t % 2 == 0) ? GaussianUnit::one() : GaussianUnit::minus_one();
        relays[odd_relay].b(symbols[t ^ 1], col0 + t) = GaussianUnit::one();
    }
}

inline std::vector<RelayMatrixPair> zero_relays(int k, int n, int t) {
    return std::vector<RelayMatrixPair>(k, RelayMatrixPair(UnitMatrix(n, t), UnitMatrix(n, t)));
}

}  // namespace detail

/// Even N = 2l, even K = 2m. Relay pair p (rows 2p, 2p+1) occupies column
/// block p with the alternating diagonal in the a-matrix and the swapped
/// conjugate block in the b-matrix; T = m*N, rate 1/m. Column blocks are
/// built incrementally, so the final length is m*N by construction rather
/// than preallocated.
inline DistributedCode construct_even_even(int n, int k) {
    if (n < 2 || n % 2 != 0 || k < 2 || k % 2 != 0)
        throw std::invalid_argument("construct_even_even: need even N >= 2 and even K >= 2");
    const int m = k / 2;
    const int t = m * n;
    auto relays = detail::zero_relays(k, n, t);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int p = 0; p < m; ++p)
        detail::place_pair_block(relays, 2 * p, 2 * p + 1, all, p * n);
    return DistributedCode(n, k, t, std::move(relays));
}

/// Odd N = 2l+1, even K = 2m: the even construction on the first N-1 symbols
/// followed by a K-column diagonal tail carrying the last symbol once per
/// relay. T = 2lm + K.
inline DistributedCode construct_odd_even(int n, int k) {
    if (n < 3 || n % 2 != 1 || k < 2 || k % 2 != 0)
        throw std::invalid_argument("construct_odd_even: need odd N >= 3 and even K >= 2");
    const int l = n / 2, m = k / 2;
    const int t1 = 2 * l * m;
    const int t = t1 + k;
    auto relays = detail::zero_relays(k, n, t);
    std::vector<int> head(n - 1);
    std::iota(head.begin(), head.end(), 0);
    for (int p = 0; p < m; ++p)
        detail::place_pair_block(relays, 2 * p, 2 * p + 1, head, p * (n - 1));
    for (int r = 0; r < k; ++r) relays[r].a(n - 1, t1 + r) = GaussianUnit::one();
    return DistributedCode(n, k, t, std::move(relays));
}

/// Even N = 2l, odd K = 2m+1: block diagonal of the even construction on the
/// first K-1 relays and one all-symbol row for the last relay. T = 2lm + N.
inline DistributedCode construct_even_odd(int n, int k) {
    if (n < 2 || n % 2 != 0 || k < 3 || k % 2 != 1)
        throw std::invalid_argument("construct_even_odd: need even N >= 2 and odd K >= 3");
    const int m = k / 2;
    const int t1 = m * n;
    const int t = t1 + n;
    auto relays = detail::zero_relays(k, n, t);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int p = 0; p < m; ++p)
        detail::place_pair_block(relays, 2 * p, 2 * p + 1, all, p * n);
    for (int s = 0; s < n; ++s) relays[k - 1].a(s, t1 + s) = GaussianUnit::one();
    return DistributedCode(n, k, t, std::move(relays));
}

/// Odd N = 2l+1, odd K = 2m+1. Part I stacks m two-relay blocks, block p
/// built by the even construction on all symbols except anchor(p) = p mod N,
/// leaving the last relay's row empty. Part II appends columns that hand each
/// relay pair its missing anchor symbol and let the last relay pick up every
/// symbol, pairing a fresh anchor with the largest still-unassigned symbol
/// whenever the last relay's corresponding matrix rows are free:
///
///   odd sweep, p = 0..m-1 (conjugate anchors, last relay collects in `a`):
///     column c:   b[2p](anchor) = 1,  a[K-1](s_max) = 1
///     column c+1: b[2p](s_max) = 1,   a[K-1](anchor) = -1
///   even sweep, p = 0..m-1 (plain anchors, last relay collects in `b`):
///     column c:   a[2p+1](anchor) = 1, b[K-1](s_max) = 1
///     column c+1: a[2p+1](s_max) = -1, b[K-1](anchor) = 1
///
/// A pairing is skipped (the anchor column stays on its own) when it would
/// reuse a row of the last relay's collecting matrix; symbols still
/// unassigned after both sweeps get one single-entry column each. The result
/// is always gated through the full verifier: rate optimality is only
/// confirmed case by case, so a failed verification aborts the construction.
inline DistributedCode construct_odd_odd(int n, int k, VerifyOptions opt = {}) {
    if (n < 3 || n % 2 != 1 || k < 3 || k % 2 != 1)
        throw std::invalid_argument("construct_odd_odd: need odd N >= 3 and odd K >= 3");
    const int l = n / 2, m = k / 2;
    const int t1 = 2 * l * m;
    const int t = t1 + std::max(2 * m + l + 1, 2 * l + m + 1);
    auto relays = detail::zero_relays(k, n, t);
    const int last = k - 1;

    // Part I: block-diagonal two-relay codes, each skipping its anchor symbol.
    for (int p = 0; p < m; ++p) {
        const int anchor = p % n;
        std::vector<int> symbols;
        for (int s = 0; s < n; ++s)
            if (s != anchor) symbols.push_back(s);
        detail::place_pair_block(relays, 2 * p, 2 * p + 1, symbols, 2 * l * p);
    }

    // Part II: the tail columns.
    std::set<int> remaining;
    for (int s = 0; s < n; ++s) remaining.insert(s);
    std::vector<bool> last_a_used(n, false), last_b_used(n, false);
    int c = t1;

    auto sweep = [&](bool odd_sweep) {
        auto& last_used = odd_sweep ? last_a_used : last_b_used;
        for (int p = 0; p < m; ++p) {
            const int anchor = p % n;
            const int anchor_relay = odd_sweep ? 2 * p : 2 * p + 1;
            // anchor entry: conjugate for the odd sweep, plain for the even one
            if (odd_sweep)
                relays[anchor_relay].b(anchor, c) = GaussianUnit::one();
            else
                relays[anchor_relay].a(anchor, c) = GaussianUnit::one();
            if (remaining.empty()) { ++c; continue; }
            const int s_max = *remaining.rbegin();
            if (s_max == anchor || last_used[s_max] || last_used[anchor]) { ++c; continue; }
            if (odd_sweep) {
                relays[last].a(s_max, c) = GaussianUnit::one();
                ++c;
                relays[anchor_relay].b(s_max, c) = GaussianUnit::one();
                relays[last].a(anchor, c) = GaussianUnit::minus_one();
            } else {
                relays[last].b(s_max, c) = GaussianUnit::one();
                ++c;
                relays[anchor_relay].a(s_max, c) = GaussianUnit::minus_one();
                relays[last].b(anchor, c) = GaussianUnit::one();
            }
            last_used[s_max] = last_used[anchor] = true;
            remaining.erase(s_max);
            remaining.erase(anchor);
            ++c;
        }
    };
    sweep(true);
    sweep(false);

    // Symbols no pairing reached (possible when l > m): one column each for
    // the last relay.
    for (int s : remaining) relays[last].a(s, c++) = GaussianUnit::one();

    if (c != t)
        throw ConstructionVerificationError(
            "construct_odd_odd(" + std::to_string(n) + "," + std::to_string(k) +
            "): produced length " + std::to_string(c) + ", expected " + std::to_string(t));

    DistributedCode code(n, k, t, std::move(relays));
    const auto rep = verify_code(code, opt);
    if (!rep.is_row_monomial_dostbc())
        throw ConstructionVerificationError(
            "construct_odd_odd(" + std::to_string(n) + "," + std::to_string(k) +
            "): output failed verification (" + to_string(rep.verdict) + ")");
    return code;
}

/// Dispatch on parity. Odd-odd outputs are verifier-gated.
inline DistributedCode construct(int n, int k) {
    if (n % 2 == 0 && k % 2 == 0) return construct_even_even(n, k);
    if (n % 2 == 1 && k % 2 == 0) return construct_odd_even(n, k);
    if (n % 2 == 0 && k % 2 == 1) return construct_even_odd(n, k);
    return construct_odd_odd(n, k);
}

}  // namespace dostbc
