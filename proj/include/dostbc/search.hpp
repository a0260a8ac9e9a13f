#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dostbc/code.hpp"
#include "dostbc/codebook.hpp"
#include "dostbc/verifier.hpp"

namespace dostbc {

class SearchBudgetExceeded : public std::runtime_error {
  public:
    explicit SearchBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct SearchOptions {
    std::uint64_t budget = 20'000'000;  // DFS nodes before giving up
};

struct SearchResult {
    bool found = false;
    int t = 0;
    std::optional<DistributedCode> witness;
    std::uint64_t nodes_explored = 0;
};

namespace detail {

// One column of a row-monomial candidate. The support structure every such
// code must have is baked in: per column at most one a-entry and one b-entry,
// from different relays (same-relay combinations and duplicated halves are
// ruled out by the column-monomial, disjoint-support and cross-relay
// column-disjointness conditions). Empty columns are not enumerated: lengths
// are searched in increasing order, so a code with an idle column would have
// been found one length earlier.
struct ColumnState {
    bool has_a = false;
    int ak = 0, an = 0;
    GaussianUnit au;
    bool has_b = false;
    int bk = 0, bn = 0;
    GaussianUnit bu;
};

inline std::vector<ColumnState> enumerate_column_states(int n, int k) {
    static const GaussianUnit units[4] = {GaussianUnit::one(), GaussianUnit::minus_one(),
                                          GaussianUnit::j(), GaussianUnit::minus_j()};
    std::vector<ColumnState> states;
    for (int ak = 0; ak < k; ++ak)
        for (int an = 0; an < n; ++an)
            for (auto au : units) {
                ColumnState s;
                s.has_a = true;
                s.ak = ak; s.an = an; s.au = au;
                states.push_back(s);
            }
    for (int bk = 0; bk < k; ++bk)
        for (int bn = 0; bn < n; ++bn)
            for (auto bu : units) {
                ColumnState s;
                s.has_b = true;
                s.bk = bk; s.bn = bn; s.bu = bu;
                states.push_back(s);
            }
    for (int ak = 0; ak < k; ++ak)
        for (int an = 0; an < n; ++an)
            for (auto au : units)
                for (int bk = 0; bk < k; ++bk) {
                    if (bk == ak) continue;
                    for (int bn = 0; bn < n; ++bn)
                        for (auto bu : units) {
                            ColumnState s;
                            s.has_a = true;
                            s.ak = ak; s.an = an; s.au = au;
                            s.has_b = true;
                            s.bk = bk; s.bn = bn; s.bu = bu;
                            states.push_back(s);
                        }
                }
    return states;
}

struct SearchContext {
    int n, k, t;
    const std::vector<ColumnState>* states;
    std::vector<int> chosen;                 // state id per column
    std::vector<std::vector<bool>> a_used;   // [relay][symbol] row already taken
    std::vector<std::vector<bool>> b_used;
    int uncovered;                           // (symbol, relay) slots with no entry yet
    std::vector<std::vector<int>> cover;     // [relay][symbol] entry count
    std::uint64_t nodes = 0;
    std::uint64_t budget = 0;
};

inline DistributedCode materialize(const SearchContext& ctx) {
    std::vector<RelayMatrixPair> relays(
        ctx.k, RelayMatrixPair(UnitMatrix(ctx.n, ctx.t), UnitMatrix(ctx.n, ctx.t)));
    for (int c = 0; c < ctx.t; ++c) {
        const ColumnState& s = (*ctx.states)[ctx.chosen[c]];
        if (s.has_a) relays[s.ak].a(s.an, c) = s.au;
        if (s.has_b) relays[s.bk].b(s.bn, c) = s.bu;
    }
    return DistributedCode(ctx.n, ctx.k, ctx.t, std::move(relays));
}

/// Depth-first over non-decreasing state ids (column order is irrelevant to
/// every defining condition, so only one representative per column multiset
/// is visited; the first accepted leaf is the lexicographically smallest
/// witness in this encoding). Exact channel-free verification at the leaves.
inline bool search_columns(SearchContext& ctx, int pos, int min_state,
                           std::optional<DistributedCode>& witness) {
    if (pos == ctx.t) {
        const auto code = materialize(ctx);
        if (check_channel_free_orthogonality(code).pass()) {
            witness = code;
            return true;
        }
        return false;
    }
    const int remaining = ctx.t - pos;
    if (ctx.uncovered > 2 * remaining) return false;
    const auto& states = *ctx.states;
    for (int sid = min_state; sid < static_cast<int>(states.size()); ++sid) {
        if (++ctx.nodes > ctx.budget)
            throw SearchBudgetExceeded("min_length_search: node budget exceeded");
        const ColumnState& s = states[sid];
        if (s.has_a && ctx.a_used[s.ak][s.an]) continue;
        if (s.has_b && ctx.b_used[s.bk][s.bn]) continue;
        if (s.has_a) {
            ctx.a_used[s.ak][s.an] = true;
            if (ctx.cover[s.ak][s.an]++ == 0) --ctx.uncovered;
        }
        if (s.has_b) {
            ctx.b_used[s.bk][s.bn] = true;
            if (ctx.cover[s.bk][s.bn]++ == 0) --ctx.uncovered;
        }
        ctx.chosen[pos] = sid;
        if (search_columns(ctx, pos + 1, sid, witness)) return true;
        if (s.has_a) {
            ctx.a_used[s.ak][s.an] = false;
            if (--ctx.cover[s.ak][s.an] == 0) ++ctx.uncovered;
        }
        if (s.has_b) {
            ctx.b_used[s.bk][s.bn] = false;
            if (--ctx.cover[s.bk][s.bn] == 0) ++ctx.uncovered;
        }
    }
    return false;
}

}  // namespace detail

/// Exhaustively finds the smallest length T <= max_t for which a row-monomial
/// code over the five-symbol alphabet exists for (n, k), together with one
/// witness, or reports that none exists. Deterministic: sequential DFS, the
/// witness is the first leaf in the canonical column ordering.
inline SearchResult min_length_search(int n, int k, int max_t, SearchOptions opt = {}) {
    if (n < 1 || k < 1 || max_t < 1)
        throw std::invalid_argument("min_length_search: need N, K, maxT >= 1");
    const auto states = detail::enumerate_column_states(n, k);
    SearchResult res;
    for (int t = 1; t <= max_t; ++t) {
        detail::SearchContext ctx;
        ctx.n = n;
        ctx.k = k;
        ctx.t = t;
        ctx.states = &states;
        ctx.chosen.assign(t, -1);
        ctx.a_used.assign(k, std::vector<bool>(n, false));
        ctx.b_used.assign(k, std::vector<bool>(n, false));
        ctx.cover.assign(k, std::vector<int>(n, 0));
        ctx.uncovered = n * k;
        ctx.budget = opt.budget;
        std::optional<DistributedCode> witness;
        const bool found = detail::search_columns(ctx, 0, 0, witness);
        res.nodes_explored += ctx.nodes;
        if (found) {
            res.found = true;
            res.t = t;
            res.witness = std::move(witness);
            return res;
        }
    }
    return res;
}

}  // namespace dostbc
