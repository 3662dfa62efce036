#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "swd/common.hpp"
#include "swd/signal.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("swd_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// Naive DFT magnitude (amplitude units: |X_k| * 2 / N) at one integer bin.
inline double dft_amplitude(const Eigen::ArrayXd& x, Eigen::Index k) {
    const auto n = x.size();
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double phase = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) / static_cast<double>(n);
        acc += x[i] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return 2.0 * std::abs(acc) / static_cast<double>(n);
}

/// Bin of maximum DFT magnitude within [k_lo, k_hi].
inline Eigen::Index dft_peak_bin(const Eigen::ArrayXd& x, Eigen::Index k_lo, Eigen::Index k_hi) {
    Eigen::Index best = k_lo;
    double best_mag = -1.0;
    for (Eigen::Index k = k_lo; k <= k_hi; ++k) {
        const double m = dft_amplitude(x, k);
        if (m > best_mag) {
            best_mag = m;
            best = k;
        }
    }
    return best;
}

/// All-pairs any-overlap scoring oracle (O(n*m)), independent of the library
/// implementation.
struct BruteEventScore {
    int tp_pred = 0, fp_pred = 0, tp_truth = 0, fn_truth = 0;
};

inline BruteEventScore brute_force_eventwise(const std::vector<swd::Interval>& pred,
                                             const std::vector<swd::Interval>& truth) {
    BruteEventScore s;
    for (const auto& p : pred) {
        bool hit = false;
        for (const auto& t : truth) {
            if (p.start_s < t.end_s && t.start_s < p.end_s) {
                hit = true;
                break;
            }
        }
        (hit ? s.tp_pred : s.fp_pred)++;
    }
    for (const auto& t : truth) {
        bool hit = false;
        for (const auto& p : pred) {
            if (p.start_s < t.end_s && t.start_s < p.end_s) {
                hit = true;
                break;
            }
        }
        (hit ? s.tp_truth : s.fn_truth)++;
    }
    return s;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs the CLI binary with the given argument string.
inline CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const auto base = std::filesystem::temp_directory_path() /
                      ("swd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    const std::string out_path = base.string() + ".out";
    const std::string err_path = base.string() + ".err";
    const std::string cmd = std::string(SWD_CLI_PATH) + " " + args + " 1>" + out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    std::filesystem::remove(out_path);
    std::filesystem::remove(err_path);
    return result;
}

}  // namespace testutil
