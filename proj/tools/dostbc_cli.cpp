// Command-line front end: code construction, rate bounds, exhaustive length
// search, code verification, BER sweeps, diversity estimation and rate
// tables.
//
// Exit codes: 0 success, 2 infeasible configuration, 3 verification failure,
// 1 any other error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "dostbc/channel.hpp"
#include "dostbc/codebook.hpp"
#include "dostbc/constellation.hpp"
#include "dostbc/decoder.hpp"
#include "dostbc/harness.hpp"
#include "dostbc/search.hpp"
#include "dostbc/verifier.hpp"

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitVerification = 3;

int cmd_construct(int n, int k, const std::string& out, bool do_verify) {
    const auto code = dostbc::construct(n, k);
    if (do_verify) {
        const auto rep = dostbc::verify_code(code);
        if (!rep.is_row_monomial_dostbc()) {
            std::cerr << "constructed code failed verification: "
                      << dostbc::to_string(rep.verdict) << "\n";
            return kExitVerification;
        }
    }
    if (out.empty())
        std::cout << dostbc::code_to_json(code).dump(1) << "\n";
    else
        dostbc::save_code(code, out);
    std::cerr << "X(" << n << "," << k << "): T=" << code.length()
              << " rate=" << code.rate() << "\n";
    return 0;
}

int cmd_rate_bound(int n, int k, const std::string& family) {
    if (family == "dostbc" || family == "both") {
        const auto b = dostbc::rate_bound_dostbc(n, k);
        std::cout << "dostbc " << b.numerator << "/" << b.denominator << "\n";
    }
    if (family == "row-monomial" || family == "both") {
        const auto b = dostbc::rate_bound_row_monomial(n, k);
        std::cout << "row-monomial " << b.numerator << "/" << b.denominator << "\n";
    }
    return 0;
}

int cmd_search(int n, int k, int max_t, std::uint64_t budget, const std::string& out) {
    dostbc::SearchOptions opt;
    if (budget) opt.budget = budget;
    const auto res = dostbc::min_length_search(n, k, max_t, opt);
    if (!res.found) {
        std::cout << "none (no code with T <= " << max_t << ")\n";
        return 0;
    }
    std::cout << "T=" << res.t << " (nodes explored: " << res.nodes_explored << ")\n";
    if (!out.empty())
        dostbc::save_code(*res.witness, out);
    else
        std::cout << dostbc::code_to_json(*res.witness).dump(1) << "\n";
    return 0;
}

int cmd_verify(const std::string& path, int draws, double tol, std::uint64_t seed,
               const std::string& format) {
    const auto code = dostbc::load_code(path);
    dostbc::VerifyOptions opt;
    opt.draws = draws;
    opt.tol = tol;
    opt.seed = seed;
    const auto rep = dostbc::verify_code(code, opt);
    if (format == "json") {
        std::cout << dostbc::report_to_json(rep).dump(1) << "\n";
    } else {
        auto pf = [](bool b) { return b ? "pass" : "FAIL"; };
        std::cout << "structural.alphabet                      " << pf(rep.structural.alphabet) << "\n"
                  << "structural.disjoint_support              " << pf(rep.structural.disjoint_support) << "\n"
                  << "structural.column_monomial               " << pf(rep.structural.column_monomial) << "\n"
                  << "structural.row_monomial                  " << pf(rep.structural.row_monomial) << "\n"
                  << "structural.column_disjoint_across_relays " << pf(rep.structural.column_disjoint_across_relays) << "\n"
                  << "algebraic.channel_free_orthogonality     " << pf(rep.channel_free.orthogonality) << "\n"
                  << "algebraic.positive_E                     " << pf(rep.channel_free.positive_e) << "\n"
                  << "algebraic.weighted_orthogonality         " << pf(rep.weighted.pass) << "\n"
                  << "algebraic.diagonal_R                     " << pf(rep.diagonal_r.pass()) << "\n"
                  << "columns: type_I=" << rep.column_classes.type_i_count
                  << " type_II=" << rep.column_classes.type_ii_count
                  << " zero=" << rep.column_classes.zero_count
                  << " invalid=" << rep.column_classes.invalid_count << "\n"
                  << "verdict: " << dostbc::to_string(rep.verdict) << "\n";
    }
    return rep.is_dostbc() ? 0 : kExitVerification;
}

int cmd_simulate(dostbc::ExperimentConfig cfg, const std::string& out) {
    const auto curve = dostbc::run_ber(cfg);
    if (out.empty()) {
        for (const auto& p : curve.points)
            std::printf("%6.2f dB  trials=%llu  errors=%llu  ber=%.4g  [%.4g, %.4g]%s\n",
                        p.snr_db, static_cast<unsigned long long>(p.trials),
                        static_cast<unsigned long long>(p.bit_errors), p.ber, p.ci_low,
                        p.ci_high, p.flagged ? "  (flagged: few errors)" : "");
    } else {
        dostbc::write_ber_csv(curve, out);
        std::cerr << "wrote " << out << " (" << curve.points.size() << " points)\n";
    }
    return 0;
}

int cmd_diversity(const std::string& in, const std::string& window, std::uint64_t min_errors) {
    double lo = 0, hi = 0;
    if (std::sscanf(window.c_str(), "%lf:%lf", &lo, &hi) != 2) {
        std::cerr << "bad window '" << window << "', expected lo:hi in dB\n";
        return kExitInfeasible;
    }
    const auto curve = dostbc::read_ber_csv(in);
    const auto est = dostbc::estimate_diversity(curve, lo, hi, min_errors);
    std::printf("slope=%.4f r2=%.5f points=%d window=[%g,%g] dB\n", est.slope, est.r2,
                est.points_used, est.window_lo, est.window_hi);
    return 0;
}

int cmd_rate_table(int max_n, int max_k, const std::string& out) {
    const auto table = dostbc::emit_rate_table(max_n, max_k);
    dostbc::write_rate_table_csv(table, out);
    auto series = [&](int n, const std::string& suffix) {
        std::string p = out;
        const auto dot = p.rfind('.');
        p.insert(dot == std::string::npos ? p.size() : dot, suffix);
        dostbc::write_bound_series_csv(n, max_k, p);
        return p;
    };
    const auto p2 = series(2, "_n2_series");
    const auto p3 = series(3, "_n3_series");
    std::cerr << "wrote " << out << ", " << p2 << ", " << p3 << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed orthogonal space-time block code toolkit"};
    app.require_subcommand(1);

    // construct
    int n = 4, k = 4;
    std::string out_path;
    bool no_verify = false;
    auto* construct = app.add_subcommand("construct", "build a code for (N, K)");
    construct->add_option("--n", n, "number of symbols")->required();
    construct->add_option("--k", k, "number of relays")->required();
    construct->add_option("--out", out_path, "output code file (default: stdout)");
    construct->add_flag("--no-verify", no_verify, "skip the verification gate");

    // rate-bound
    int rb_n = 4, rb_k = 4;
    std::string family = "both";
    auto* rate_bound = app.add_subcommand("rate-bound", "data-rate upper bounds");
    rate_bound->add_option("--n", rb_n)->required();
    rate_bound->add_option("--k", rb_k)->required();
    rate_bound->add_option("--family", family)
        ->check(CLI::IsMember({"dostbc", "row-monomial", "both"}));

    // search
    int s_n = 2, s_k = 2, s_maxt = 4;
    std::uint64_t s_budget = 0;
    std::string s_out;
    auto* search = app.add_subcommand("search", "exhaustive minimal-length search");
    search->add_option("--n", s_n)->required();
    search->add_option("--k", s_k)->required();
    search->add_option("--max-t", s_maxt)->required();
    search->add_option("--budget", s_budget, "DFS node budget");
    search->add_option("--out", s_out, "write the witness code here");

    // verify
    std::string v_path, v_format = "text";
    int v_draws = 8;
    double v_tol = 1e-9;
    std::uint64_t v_seed = 42;
    auto* verify = app.add_subcommand("verify", "check all defining conditions of a code file");
    verify->add_option("code", v_path, "code JSON file")->required();
    verify->add_option("--draws", v_draws, "channel samples for the weighted checks");
    verify->add_option("--tol", v_tol, "relative tolerance");
    verify->add_option("--seed", v_seed);
    verify->add_option("--report", v_format)->check(CLI::IsMember({"json", "text"}));

    // simulate
    dostbc::ExperimentConfig cfg;
    std::string sim_config, sim_scheme = "dostbc", sim_snr = "0:2:24", sim_out;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo BER sweep");
    simulate->add_option("--config", sim_config, "JSON config file");
    simulate->add_option("--n", cfg.n);
    simulate->add_option("--k", cfg.k);
    simulate->add_option("--scheme", sim_scheme)
        ->check(CLI::IsMember({"dostbc", "repetition"}));
    simulate->add_option("--code", cfg.code_path, "code file (default: construct)");
    simulate->add_option("--constellation", cfg.constellation);
    simulate->add_option("--bps", cfg.bps, "bandwidth efficiency (bps/Hz)");
    simulate->add_option("--snr", sim_snr, "grid start:step:stop in dB");
    simulate->add_option("--trials", cfg.trials, "frames per point");
    simulate->add_option("--target-errors", cfg.target_errors,
                         "keep running past --trials until this many bit errors");
    simulate->add_option("--max-trials", cfg.max_trials);
    simulate->add_option("--seed", cfg.seed);
    simulate->add_option("--threads", cfg.threads);
    simulate->add_flag("--force", cfg.force, "accept a pairing-breaking constellation");
    simulate->add_option("--out", sim_out, "CSV output path");

    // diversity
    std::string d_in, d_window = "16:24";
    std::uint64_t d_min_errors = 100;
    auto* diversity = app.add_subcommand("diversity", "slope fit on a BER CSV");
    diversity->add_option("--in", d_in)->required();
    diversity->add_option("--window", d_window, "lo:hi in dB");
    diversity->add_option("--min-errors", d_min_errors);

    // rate-table
    int rt_max_n = 9, rt_max_k = 9;
    std::string rt_out = "rate_table.csv";
    auto* rate_table = app.add_subcommand("rate-table", "bounds for every (N, K) in range");
    rate_table->add_option("--max-n", rt_max_n);
    rate_table->add_option("--max-k", rt_max_k);
    rate_table->add_option("--out", rt_out);

    // constellation
    std::string c_name = "qpsk", c_out;
    double c_es = 1.0;
    auto* constellation = app.add_subcommand("constellation", "export a labeled constellation");
    constellation->add_option("--name", c_name)->required();
    constellation->add_option("--es", c_es, "mean symbol energy");
    constellation->add_option("--out", c_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (construct->parsed()) return cmd_construct(n, k, out_path, !no_verify);
        if (rate_bound->parsed()) return cmd_rate_bound(rb_n, rb_k, family);
        if (search->parsed()) return cmd_search(s_n, s_k, s_maxt, s_budget, s_out);
        if (verify->parsed()) return cmd_verify(v_path, v_draws, v_tol, v_seed, v_format);
        if (simulate->parsed()) {
            if (!sim_config.empty()) {
                std::ifstream is(sim_config);
                if (!is) throw std::runtime_error("cannot open " + sim_config);
                nlohmann::json j;
                is >> j;
                cfg = dostbc::config_from_json(j);
            } else {
                cfg.scheme = sim_scheme == "dostbc" ? dostbc::SchemeKind::Dostbc
                                                    : dostbc::SchemeKind::Repetition;
                cfg.snr_db = dostbc::parse_snr_grid(sim_snr);
            }
            return cmd_simulate(cfg, sim_out);
        }
        if (diversity->parsed()) return cmd_diversity(d_in, d_window, d_min_errors);
        if (rate_table->parsed()) return cmd_rate_table(rt_max_n, rt_max_k, rt_out);
        if (constellation->parsed()) {
            dostbc::Constellation::make(c_name, c_es).export_csv(c_out);
            return 0;
        }
    } catch (const dostbc::ConstructionVerificationError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return kExitVerification;
    } catch (const std::invalid_argument& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
