#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dostbc/channel.hpp"
#include "dostbc/codebook.hpp"
#include "dostbc/constellation.hpp"
#include "dostbc/decoder.hpp"
#include "dostbc/rational.hpp"

namespace dostbc {

// --- constellation pairing ----------------------------------------------------

/// Result of matching constellation sizes so both schemes hit the same
/// bandwidth efficiency: rate * log2(M) = bps on each side, exactly.
struct ConstellationPairing {
    bool feasible = false;
    int dostbc_bits = 0;      // log2(M) for the code
    int repetition_bits = 0;  // log2(M) for the repetition baseline
    Rational dostbc_rate{0, 1};
    Rational repetition_rate{0, 1};
    std::string infeasible_reason;
};

namespace detail {

/// bps * den / num as an exact fraction, or nullopt if bps is not close to a
/// small rational (binary fractions cover every value used in practice).
inline std::optional<Rational> bits_needed(double bps, const Rational& rate) {
    // rationalize bps with denominator up to 4096
    for (std::int64_t q = 1; q <= 4096; q *= 2) {
        const double pq = bps * q;
        if (std::abs(pq - std::round(pq)) < 1e-9)
            return Rational(static_cast<std::int64_t>(std::round(pq)) * rate.den,
                            q * rate.num);
    }
    return std::nullopt;
}

}  // namespace detail

/// Solves rate * log2(M) = target_bps for the (n, k) code and the rate-1/K
/// repetition baseline. Infeasible when either exponent is fractional; the
/// report names the offending exponent.
inline ConstellationPairing pair_constellations(int n, int k, double target_bps) {
    if (target_bps <= 0) throw std::invalid_argument("pair_constellations: need bps > 0");
    ConstellationPairing pc;
    const auto code = construct(n, k);
    pc.dostbc_rate = code.rate();
    pc.repetition_rate = Rational(1, k);
    const auto bd = detail::bits_needed(target_bps, pc.dostbc_rate);
    const auto br = detail::bits_needed(target_bps, pc.repetition_rate);
    if (!bd || !br) {
        pc.infeasible_reason = "target bps is not a small rational";
        return pc;
    }
    auto integral = [](const Rational& r) { return r.num % r.den == 0; };
    if (!integral(*bd)) {
        pc.infeasible_reason = "code needs a constellation of size 2^(" + bd->str() +
                               "), which is not an integer power";
        return pc;
    }
    if (!integral(*br)) {
        pc.infeasible_reason = "repetition needs a constellation of size 2^(" + br->str() +
                               "), which is not an integer power";
        return pc;
    }
    pc.dostbc_bits = static_cast<int>(bd->num / bd->den);
    pc.repetition_bits = static_cast<int>(br->num / br->den);
    pc.feasible = true;
    return pc;
}

// --- BER sweeps ----------------------------------------------------------------

struct ExperimentConfig {
    SchemeKind scheme = SchemeKind::Dostbc;
    int n = 4;
    int k = 4;
    std::string code_path;      // load instead of constructing (scheme = dostbc)
    std::string constellation;  // explicit override; empty = derive from bps pairing
    double bps = 1.0;
    std::vector<double> snr_db;
    std::uint64_t trials = 100000;     // frames per point (minimum when target_errors > 0)
    std::uint64_t target_errors = 0;   // 0 = fixed trial count
    std::uint64_t max_trials = 0;      // cap for error-targeted runs; 0 = 50x trials
    std::uint64_t seed = 42;
    bool force = false;  // accept a constellation that breaks the bps pairing
    int threads = 0;     // 0 = hardware concurrency
    std::uint64_t min_errors_flag = 100;
};

struct BerPoint {
    double snr_db = 0;
    std::uint64_t trials = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0, ci_low = 0, ci_high = 0;
    bool flagged = false;  // too few errors for the estimate to be trusted
};

struct BerCurve {
    std::vector<BerPoint> points;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string scheme;
    std::string constellation;
    int n = 0, k = 0;
    int bits_per_frame = 0;
};

/// Wilson score interval at 95%; well-behaved at zero observed errors.
inline std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t n_bits) {
    if (n_bits == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double nd = static_cast<double>(n_bits);
    const double p = static_cast<double>(errors) / nd;
    const double z2n = z * z / nd;
    const double center = (p + z2n / 2) / (1 + z2n);
    const double half = z * std::sqrt(p * (1 - p) / nd + z2n / (4 * nd)) / (1 + z2n);
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline std::string config_hash(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << (cfg.scheme == SchemeKind::Dostbc ? "dostbc" : "repetition") << '|' << cfg.n << '|'
       << cfg.k << '|' << cfg.code_path << '|' << cfg.constellation << '|' << cfg.bps << '|';
    for (double s : cfg.snr_db) os << s << ',';
    os << '|' << cfg.trials << '|' << cfg.target_errors << '|' << cfg.max_trials << '|'
       << cfg.seed;
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : os.str()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (salt * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
    x ^= x >> 29; x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 32;
    return x;
}

struct TrialBlockResult {
    std::uint64_t bit_errors = 0;
};

}  // namespace detail

/// Monte-Carlo BER sweep. For each SNR point: draw channels, modulate random
/// bits, simulate one frame, decode, count bit errors. Deterministic for a
/// given (config, seed): every trial runs on its own substream derived from
/// (seed, point, trial index), batches have a fixed size, and stopping is
/// decided only at batch boundaries, so thread count cannot change results.
inline BerCurve run_ber(const ExperimentConfig& cfg) {
    if (cfg.snr_db.empty() && cfg.trials > 0)
        throw std::invalid_argument("run_ber: empty SNR grid");

    std::optional<DistributedCode> code;
    std::optional<VerificationReport> report;
    std::vector<double> rep_scales;
    if (cfg.scheme == SchemeKind::Dostbc) {
        code = cfg.code_path.empty() ? construct(cfg.n, cfg.k) : load_code(cfg.code_path);
        report = verify_code(*code);
        if (!report->is_dostbc())
            throw std::runtime_error("run_ber: code failed verification, refusing to simulate");
    } else {
        // power pairing: match each relay's per-slot average to the code it is
        // being compared against
        rep_scales = repetition_power_scales(construct(cfg.n, cfg.k));
    }

    const Rational rate = cfg.scheme == SchemeKind::Dostbc ? code->rate() : Rational(1, cfg.k);
    int bits;
    if (!cfg.constellation.empty()) {
        const auto cons_probe = Constellation::make(cfg.constellation);
        bits = cons_probe.bits_per_symbol();
        const auto needed = detail::bits_needed(cfg.bps, rate);
        const bool pairing_ok =
            needed && needed->num == static_cast<std::int64_t>(bits) * needed->den;
        if (!pairing_ok && !cfg.force)
            throw std::invalid_argument(
                "run_ber: constellation breaks the bandwidth-efficiency pairing "
                "(rate * bits != bps); pass force to override");
    } else {
        const auto pairing = pair_constellations(cfg.n, cfg.k, cfg.bps);
        if (!pairing.feasible)
            throw std::invalid_argument("run_ber: infeasible pairing: " +
                                        pairing.infeasible_reason);
        bits = cfg.scheme == SchemeKind::Dostbc ? pairing.dostbc_bits
                                                : pairing.repetition_bits;
    }

    BerCurve curve;
    curve.config_hash = config_hash(cfg);
    curve.seed = cfg.seed;
    curve.scheme = cfg.scheme == SchemeKind::Dostbc ? "dostbc" : "repetition";
    curve.n = cfg.n;
    curve.k = cfg.k;
    curve.bits_per_frame = cfg.n * bits;
    curve.constellation = Constellation::for_bits(bits).name();
    if (cfg.trials == 0) return curve;  // metadata-only

    const int n_threads =
        cfg.threads > 0 ? cfg.threads
                        : std::max(1u, std::thread::hardware_concurrency());
    constexpr std::uint64_t kBatch = 4096;
    const std::uint64_t max_trials =
        cfg.target_errors == 0 ? cfg.trials
                               : (cfg.max_trials ? cfg.max_trials : cfg.trials * 50);

    for (size_t pi = 0; pi < cfg.snr_db.size(); ++pi) {
        const double snr = cfg.snr_db[pi];
        const double p = std::pow(10.0, snr / 10.0);
        PowerConfig power;
        power.es = p;
        power.er = p;
        power.per_relay_scale = rep_scales;  // empty for the code scheme
        const Constellation cons = Constellation::for_bits(bits, p);
        const std::uint64_t point_seed = detail::mix_seed(cfg.seed, pi);

        std::uint64_t done = 0, errors = 0;
        while (true) {
            const std::uint64_t want =
                cfg.target_errors == 0
                    ? std::min(kBatch, cfg.trials - done)
                    : std::min(kBatch, max_trials - done);
            if (want == 0) break;
            std::vector<detail::TrialBlockResult> partial(n_threads);
            std::vector<std::thread> pool;
            for (int th = 0; th < n_threads; ++th) {
                const std::uint64_t lo = done + want * th / n_threads;
                const std::uint64_t hi = done + want * (th + 1) / n_threads;
                pool.emplace_back([&, th, lo, hi] {
                    std::optional<DostbcChannel> chan;
                    std::optional<DostbcDecoder> dec;
                    if (code) {
                        chan.emplace(*code);
                        dec.emplace(*code, *report);
                    }
                    std::uint64_t errs = 0;
                    std::vector<int> labels(cfg.n);
                    std::vector<Cplx> s(cfg.n);
                    for (std::uint64_t trial = lo; trial < hi; ++trial) {
                        Rng rng = Rng::substream(point_seed, trial);
                        for (int i = 0; i < cfg.n; ++i) {
                            labels[i] = static_cast<int>(rng.uniform_below(cons.size()));
                            s[i] = cons.point(labels[i]);
                        }
                        std::vector<int> decoded;
                        if (cfg.scheme == SchemeKind::Dostbc) {
                            auto frame = chan->simulate(s, power, rng, true);
                            decoded = dec->single_symbol(frame, cons).symbols;
                        } else {
                            auto frame =
                                simulate_repetition_frame(cfg.k, s, power, rng, true);
                            decoded = repetition_ml_decode(frame, cfg.k, cons).symbols;
                        }
                        for (int i = 0; i < cfg.n; ++i)
                            errs += __builtin_popcount(
                                static_cast<unsigned>(labels[i] ^ decoded[i]));
                    }
                    partial[th].bit_errors = errs;
                });
            }
            for (auto& t : pool) t.join();
            for (const auto& pr : partial) errors += pr.bit_errors;
            done += want;
            if (cfg.target_errors == 0) {
                if (done >= cfg.trials) break;
            } else if (done >= cfg.trials &&
                       (errors >= cfg.target_errors || done >= max_trials)) {
                break;
            }
        }

        BerPoint pt;
        pt.snr_db = snr;
        pt.trials = done;
        pt.bit_errors = errors;
        const std::uint64_t n_bits = done * static_cast<std::uint64_t>(curve.bits_per_frame);
        pt.ber = n_bits ? static_cast<double>(errors) / n_bits : 0.0;
        std::tie(pt.ci_low, pt.ci_high) = wilson_interval(errors, n_bits);
        pt.flagged = errors < cfg.min_errors_flag;
        curve.points.push_back(pt);
    }
    return curve;
}

inline void write_ber_csv(const BerCurve& curve, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "# config_hash=" << curve.config_hash << " seed=" << curve.seed
       << " scheme=" << curve.scheme << " n=" << curve.n << " k=" << curve.k
       << " constellation=" << curve.constellation
       << " bits_per_frame=" << curve.bits_per_frame << "\n";
    os << "snr_db,trials,bit_errors,ber,ci_low,ci_high\n";
    char buf[256];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%.6g,%llu,%llu,%.10g,%.10g,%.10g\n", p.snr_db,
                      static_cast<unsigned long long>(p.trials),
                      static_cast<unsigned long long>(p.bit_errors), p.ber, p.ci_low,
                      p.ci_high);
        os << buf;
    }
}

inline BerCurve read_ber_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    BerCurve curve;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("snr_db", 0) == 0) continue;
        BerPoint p;
        unsigned long long tr, be;
        if (std::sscanf(line.c_str(), "%lf,%llu,%llu,%lf,%lf,%lf", &p.snr_db, &tr, &be,
                        &p.ber, &p.ci_low, &p.ci_high) == 6) {
            p.trials = tr;
            p.bit_errors = be;
            curve.points.push_back(p);
        }
    }
    return curve;
}

// --- diversity estimation ---------------------------------------------------

struct DiversityEstimate {
    double slope = 0;   // -d log10(BER) / d log10(P)
    double r2 = 0;
    double window_lo = 0, window_hi = 0;
    int points_used = 0;
};

/// Least-squares slope of log10(BER) against log10(P) (P in linear power, so
/// x = snr_db / 10), sign-flipped. Only points inside the window with at
/// least `min_errors` observed errors qualify; fewer than three such points
/// is an error, not an estimate.
inline DiversityEstimate estimate_diversity(const BerCurve& curve, double window_lo_db,
                                            double window_hi_db,
                                            std::uint64_t min_errors = 100) {
    std::vector<double> xs, ys;
    for (const auto& p : curve.points) {
        if (p.snr_db < window_lo_db - 1e-9 || p.snr_db > window_hi_db + 1e-9) continue;
        if (p.bit_errors < min_errors || p.ber <= 0) continue;
        xs.push_back(p.snr_db / 10.0);
        ys.push_back(std::log10(p.ber));
    }
    if (xs.size() < 3)
        throw std::runtime_error("estimate_diversity: fewer than 3 qualifying points");
    const int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i]; sy += ys[i];
        sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i]; syy += ys[i] * ys[i];
    }
    const double cov = sxy - sx * sy / n;
    const double varx = sxx - sx * sx / n;
    const double vary = syy - sy * sy / n;
    DiversityEstimate est;
    est.slope = -cov / varx;
    est.r2 = vary > 0 ? (cov * cov) / (varx * vary) : 1.0;
    est.window_lo = window_lo_db;
    est.window_hi = window_hi_db;
    est.points_used = n;
    return est;
}

// --- rate table ---------------------------------------------------------------

struct SymbolicRateRow {
    std::string parity;
    std::string dostbc_expr;
    std::string row_monomial_expr;
    std::string difference_expr;
};

struct RateTableEntry {
    int n, k, l, m, parity_case;
    RateBound dostbc;
    RateBound row_monomial;
    Rational difference{0, 1};
};

struct RateTable {
    std::array<SymbolicRateRow, 4> symbolic;
    std::vector<RateTableEntry> entries;
    int max_n = 0, max_k = 0;
};

inline int parity_case(int n, int k) { return (n % 2) * 1 + (k % 2) * 2; }  // 0..3

/// Both bounds and their difference for every (n, k) in range, plus the four
/// symbolic parity rows in (l, m) form.
inline RateTable emit_rate_table(int max_n, int max_k) {
    if (max_n < 2 || max_k < 2) throw std::invalid_argument("emit_rate_table: need >= 2");
    RateTable t;
    t.max_n = max_n;
    t.max_k = max_k;
    t.symbolic[0] = {"N=2l, K=2m", "1/m", "1/m", "0"};
    t.symbolic[1] = {"N=2l+1, K=2m", "1/m", "(2l+1)/(2lm+2m)", "1/(2lm+2m)"};
    t.symbolic[2] = {"N=2l, K=2m+1", "2/(2m+1)", "1/(m+1)", "1/((2m+1)(m+1))"};
    t.symbolic[3] = {"N=2l+1, K=2m+1", "(2l+1)/(2lm+l+m+1)",
                     "min((2l+1)/(2lm+2m+l+1), (2l+1)/(2lm+2l+m+1))",
                     "max(m(2l+1)/((2lm+l+m+1)(2lm+2m+l+1)), "
                     "l(2l+1)/((2lm+l+m+1)(2lm+2l+m+1)))"};
    for (int n = 2; n <= max_n; ++n)
        for (int k = 2; k <= max_k; ++k) {
            RateTableEntry e;
            e.n = n; e.k = k;
            e.l = n / 2; e.m = k / 2;
            e.parity_case = parity_case(n, k);
            e.dostbc = rate_bound_dostbc(n, k);
            e.row_monomial = rate_bound_row_monomial(n, k);
            e.difference = e.dostbc.value() - e.row_monomial.value();
            t.entries.push_back(e);
        }
    return t;
}

inline void write_rate_table_csv(const RateTable& t, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    for (int c = 0; c < 4; ++c)
        os << "# case " << c << " [" << t.symbolic[c].parity
           << "]: dostbc=" << t.symbolic[c].dostbc_expr
           << " row_monomial=" << t.symbolic[c].row_monomial_expr
           << " difference=" << t.symbolic[c].difference_expr << "\n";
    os << "n,k,l,m,parity_case,dostbc_num,dostbc_den,row_monomial_num,row_monomial_den,"
          "diff_num,diff_den\n";
    for (const auto& e : t.entries)
        os << e.n << ',' << e.k << ',' << e.l << ',' << e.m << ',' << e.parity_case << ','
           << e.dostbc.numerator << ',' << e.dostbc.denominator << ','
           << e.row_monomial.numerator << ',' << e.row_monomial.denominator << ','
           << e.difference.num << ',' << e.difference.den << "\n";
}

/// Bound-versus-K series for a fixed N (together with the 1/K repetition
/// rate), the plot-ready companion of the table.
inline void write_bound_series_csv(int n, int max_k, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "k,dostbc_num,dostbc_den,row_monomial_num,row_monomial_den,repetition_num,"
          "repetition_den\n";
    for (int k = 2; k <= max_k; ++k) {
        const auto d = rate_bound_dostbc(n, k);
        const auto r = rate_bound_row_monomial(n, k);
        os << k << ',' << d.numerator << ',' << d.denominator << ',' << r.numerator << ','
           << r.denominator << ',' << 1 << ',' << k << "\n";
    }
}

// --- config file -----------------------------------------------------------------

inline std::vector<double> parse_snr_grid(const std::string& spec) {
    // "start:step:stop" or a comma-separated list
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double a, s, b;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &s, &b) != 3 || s <= 0)
            throw std::invalid_argument("bad SNR grid '" + spec + "'");
        for (double v = a; v <= b + 1e-9; v += s) out.push_back(v);
        return out;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("scheme")) {
        const std::string s = j["scheme"].get<std::string>();
        if (s == "dostbc") cfg.scheme = SchemeKind::Dostbc;
        else if (s == "repetition") cfg.scheme = SchemeKind::Repetition;
        else throw std::invalid_argument("config: unknown scheme '" + s + "'");
    }
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("code")) cfg.code_path = j["code"].get<std::string>();
    if (j.contains("constellation")) cfg.constellation = j["constellation"].get<std::string>();
    if (j.contains("bps")) cfg.bps = j["bps"].get<double>();
    if (j.contains("snr")) {
        if (j["snr"].is_string()) cfg.snr_db = parse_snr_grid(j["snr"].get<std::string>());
        else cfg.snr_db = j["snr"].get<std::vector<double>>();
    }
    if (j.contains("trials")) cfg.trials = j["trials"].get<std::uint64_t>();
    if (j.contains("target_errors")) cfg.target_errors = j["target_errors"].get<std::uint64_t>();
    if (j.contains("max_trials")) cfg.max_trials = j["max_trials"].get<std::uint64_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("force")) cfg.force = j["force"].get<bool>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("min_errors_flag"))
        cfg.min_errors_flag = j["min_errors_flag"].get<std::uint64_t>();
    return cfg;
}

}  // namespace dostbc
