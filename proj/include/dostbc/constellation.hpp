#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dostbc {

/// A labeled constellation. `point(label)` is the complex symbol transmitted
/// for bit pattern `label`; points are normalized to unit average energy and
/// then scaled by sqrt(es), so the mean symbol energy is exactly es.
class Constellation {
  public:
    static Constellation make(const std::string& name, double es = 1.0);
    static Constellation for_bits(int bits_per_symbol, double es = 1.0);

    const std::string& name() const { return name_; }
    int bits_per_symbol() const { return bits_; }
    int size() const { return static_cast<int>(points_.size()); }
    double es() const { return es_; }
    std::complex<double> point(int label) const { return points_.at(label); }
    const std::vector<std::complex<double>>& points() const { return points_; }

    double mean_energy() const {
        double e = 0;
        for (auto p : points_) e += std::norm(p);
        return e / size();
    }

    /// label,bits,re,im rows for auditing the exact mapping in use.
    void export_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open " + path);
        os << "label,bits,re,im\n";
        char buf[128];
        for (int lab = 0; lab < size(); ++lab) {
            std::string bstr;
            for (int b = bits_ - 1; b >= 0; --b) bstr += ((lab >> b) & 1) ? '1' : '0';
            std::snprintf(buf, sizeof buf, "%d,%s,%.12g,%.12g\n", lab, bstr.c_str(),
                          points_[lab].real(), points_[lab].imag());
            os << buf;
        }
    }

  private:
    Constellation(std::string name, int bits, std::vector<std::complex<double>> pts, double es)
        : name_(std::move(name)), bits_(bits), points_(std::move(pts)), es_(es) {
        double e = mean_energy();
        const double scale = std::sqrt(es / e);
        for (auto& p : points_) p *= scale;
        es_ = es;
    }

    std::string name_;
    int bits_;
    std::vector<std::complex<double>> points_;
    double es_;
};

namespace detail {

inline unsigned bin_to_gray(unsigned v) { return v ^ (v >> 1); }

inline unsigned gray_to_bin(unsigned g) {
    unsigned b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

/// Square QAM, Gray-coded independently per axis. label = [I bits | Q bits].
inline std::vector<std::complex<double>> square_qam(int bits) {
    const int half = bits / 2;
    const int side = 1 << half;
    std::vector<std::complex<double>> pts(1 << bits);
    for (int lab = 0; lab < (1 << bits); ++lab) {
        const unsigned gi = static_cast<unsigned>(lab) >> half;
        const unsigned gq = static_cast<unsigned>(lab) & (side - 1);
        const int i = static_cast<int>(gray_to_bin(gi));
        const int q = static_cast<int>(gray_to_bin(gq));
        pts[lab] = {double(2 * i - (side - 1)), double(2 * q - (side - 1))};
    }
    return pts;
}

inline std::vector<std::complex<double>> psk(int m, bool gray) {
    std::vector<std::complex<double>> pts(m);
    for (int p = 0; p < m; ++p) {
        const int lab = gray ? static_cast<int>(bin_to_gray(p)) : p;
        const double ang = 2.0 * M_PI * p / m;
        pts[lab] = {std::cos(ang), std::sin(ang)};
    }
    return pts;
}

/// Cross 32-QAM: the 6x6 grid on odd levels with the four corners removed.
/// Labels come from a deterministic greedy pass: points in (re, im)
/// lexicographic order, each taking the unused label with the fewest total
/// bit flips against its already-labeled grid neighbors (ties to the smallest
/// label). Not a perfect Gray map (none exists for the cross); the exact
/// labeling ships via export_csv.
inline std::vector<std::complex<double>> cross_32() {
    struct P { int x, y; };
    std::vector<P> grid;
    for (int x = -5; x <= 5; x += 2)
        for (int y = -5; y <= 5; y += 2) {
            if (std::abs(x) == 5 && std::abs(y) == 5) continue;
            grid.push_back({x, y});
        }
    std::sort(grid.begin(), grid.end(),
              [](const P& a, const P& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    const int m = static_cast<int>(grid.size());
    std::vector<int> label_of(m, -1);
    std::vector<bool> used(m, false);
    auto popcount5 = [](int v) { return __builtin_popcount(static_cast<unsigned>(v)); };
    for (int i = 0; i < m; ++i) {
        int best_lab = -1, best_cost = 1 << 30;
        for (int lab = 0; lab < m; ++lab) {
            if (used[lab]) continue;
            int cost = 0;
            for (int jprev = 0; jprev < i; ++jprev) {
                const int dx = std::abs(grid[i].x - grid[jprev].x);
                const int dy = std::abs(grid[i].y - grid[jprev].y);
                if (dx + dy == 2) cost += popcount5(lab ^ label_of[jprev]);
            }
            if (cost < best_cost) { best_cost = cost; best_lab = lab; }
        }
        label_of[i] = best_lab;
        used[best_lab] = true;
    }
    std::vector<std::complex<double>> pts(m);
    for (int i = 0; i < m; ++i)
        pts[label_of[i]] = {double(grid[i].x), double(grid[i].y)};
    return pts;
}

}  // namespace detail

inline Constellation Constellation::make(const std::string& name, double es) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(), [](char c) { return std::tolower(c); });
    if (n == "bpsk") return Constellation("bpsk", 1, {{1.0, 0.0}, {-1.0, 0.0}}, es);
    if (n == "qpsk" || n == "4qam") return Constellation("qpsk", 2, detail::square_qam(2), es);
    if (n == "8psk") return Constellation("8psk", 3, detail::psk(8, true), es);
    if (n == "16qam") return Constellation("16qam", 4, detail::square_qam(4), es);
    if (n == "32qam") return Constellation("32qam", 5, detail::cross_32(), es);
    if (n == "64qam") return Constellation("64qam", 6, detail::square_qam(6), es);
    if (n == "256qam") return Constellation("256qam", 8, detail::square_qam(8), es);
    if (n == "1024qam") return Constellation("1024qam", 10, detail::square_qam(10), es);
    throw std::invalid_argument("unknown constellation '" + name + "'");
}

inline Constellation Constellation::for_bits(int bits, double es) {
    switch (bits) {
        case 1: return make("bpsk", es);
        case 2: return make("qpsk", es);
        case 3: return make("8psk", es);
        case 4: return make("16qam", es);
        case 5: return make("32qam", es);
        case 6: return make("64qam", es);
        case 8: return make("256qam", es);
        case 10: return make("1024qam", es);
        default:
            throw std::invalid_argument("no supported constellation with " +
                                        std::to_string(bits) + " bits per symbol");
    }
}

}  // namespace dostbc
