#include "swd/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace swd {

namespace {

// s * sinc(s * t) with a Hann window spanning half_width zero crossings,
// t in input-sample units.
double kernel_at(double t, double s, double half_width) {
    const double u = t * s / half_width;
    if (u <= -1.0 || u >= 1.0) return 0.0;
    const double window = 0.5 * (1.0 + std::cos(M_PI * u));
    double core;
    if (std::abs(t) < 1e-12) {
        core = s;
    } else {
        core = std::sin(M_PI * s * t) / (M_PI * t);
    }
    return core * window;
}

// Best rational p/q for ratio with bounded denominator; returns false when no
// exact-enough representation exists.
bool rational_ratio(double ratio, int64_t max_den, int64_t& p, int64_t& q) {
    int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = ratio;
    for (int iter = 0; iter < 64; ++iter) {
        const double a_f = std::floor(x);
        const auto a = static_cast<int64_t>(a_f);
        int64_t p2 = a * p1 + p0;
        int64_t q2 = a * q1 + q0;
        if (q2 > max_den || p2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double rem = x - a_f;
        if (rem < 1e-12) break;
        x = 1.0 / rem;
    }
    if (q1 == 0 || p1 == 0) return false;
    p = p1;
    q = q1;
    return std::abs(static_cast<double>(p) / static_cast<double>(q) - ratio) <= 1e-12 * ratio;
}

}  // namespace

Recording resample(const Recording& rec, const ResampleSpec& spec) {
    if (spec.source_rate_hz <= 0.0 || spec.target_rate_hz <= 0.0)
        fail("InvalidRate", "resample rates must be positive");
    if (spec.kernel_half_width_zero_crossings < 1)
        fail("InvalidConfig", "kernel half-width must be >= 1");
    if (rec.sample_rate_hz != spec.source_rate_hz)
        fail("InvalidRate", "recording rate does not match the resample spec source rate");
    if (spec.source_rate_hz == spec.target_rate_hz) return rec;

    const double ratio = spec.target_rate_hz / spec.source_rate_hz;  // output samples per input sample
    const double s = std::min(1.0, ratio);
    const double half_width = static_cast<double>(spec.kernel_half_width_zero_crossings);
    const double support = half_width / s;  // in input samples, each side

    const Eigen::Index n_in = rec.samples.size();
    const auto n_out = static_cast<Eigen::Index>(std::llround(static_cast<double>(n_in) * ratio));
    if (static_cast<double>(n_in) < 2.0 * support + 1.0)
        fail("InputTooShort", "input shorter than the resampling kernel support");

    Recording out;
    out.sample_rate_hz = spec.target_rate_hz;
    out.subject_id = rec.subject_id;
    out.samples.resize(n_out);

    const double* x = rec.samples.data();

    auto accumulate = [&](Eigen::Index m, double u, const std::vector<double>& taps, Eigen::Index n_lo) {
        (void)u;
        double acc = 0.0;
        const auto count = static_cast<Eigen::Index>(taps.size());
        Eigen::Index j_lo = std::max<Eigen::Index>(0, -n_lo);
        Eigen::Index j_hi = std::min<Eigen::Index>(count, n_in - n_lo);
        for (Eigen::Index j = j_lo; j < j_hi; ++j) acc += taps[static_cast<std::size_t>(j)] * x[n_lo + j];
        out.samples[m] = acc;
    };

    int64_t p = 0, q = 0;
    if (rational_ratio(ratio, 1 << 16, p, q) && p <= 8192) {
        // polyphase: u = m*q/p, so tap patterns repeat with period p in m
        struct Phase {
            std::vector<double> taps;
            int64_t n_lo_off = 0;
        };
        std::vector<Phase> phases(static_cast<std::size_t>(p));
        for (int64_t r = 0; r < p; ++r) {
            const double frac = static_cast<double>(r) / static_cast<double>(p);
            const auto lo = static_cast<int64_t>(std::ceil(frac - support));
            const auto hi = static_cast<int64_t>(std::floor(frac + support));
            Phase ph;
            ph.n_lo_off = lo;
            ph.taps.resize(static_cast<std::size_t>(hi - lo + 1));
            double sum = 0.0;
            for (int64_t n = lo; n <= hi; ++n) {
                const double v = kernel_at(static_cast<double>(n) - frac, s, half_width);
                ph.taps[static_cast<std::size_t>(n - lo)] = v;
                sum += v;
            }
            for (auto& t : ph.taps) t /= sum;
            phases[static_cast<std::size_t>(r)] = std::move(ph);
        }
        for (Eigen::Index m = 0; m < n_out; ++m) {
            const int64_t mq = static_cast<int64_t>(m) * q;
            const int64_t base = mq / p;
            const auto& ph = phases[static_cast<std::size_t>(mq % p)];
            accumulate(m, 0.0, ph.taps, static_cast<Eigen::Index>(base + ph.n_lo_off));
        }
    } else {
        // irrational ratio: evaluate the kernel per output sample
        const double inv_ratio = spec.source_rate_hz / spec.target_rate_hz;
        std::vector<double> taps;
        for (Eigen::Index m = 0; m < n_out; ++m) {
            const double u = static_cast<double>(m) * inv_ratio;
            const auto lo = static_cast<int64_t>(std::ceil(u - support));
            const auto hi = static_cast<int64_t>(std::floor(u + support));
            taps.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
            double sum = 0.0;
            for (int64_t n = lo; n <= hi; ++n) {
                const double v = kernel_at(static_cast<double>(n) - u, s, half_width);
                taps[static_cast<std::size_t>(n - lo)] = v;
                sum += v;
            }
            for (auto& t : taps) t /= sum;
            accumulate(m, u, taps, static_cast<Eigen::Index>(lo));
        }
    }
    return out;
}

Recording resample_to(const Recording& rec, double target_rate_hz, int half_width) {
    ResampleSpec spec;
    spec.source_rate_hz = rec.sample_rate_hz;
    spec.target_rate_hz = target_rate_hz;
    spec.kernel_half_width_zero_crossings = half_width;
    return resample(rec, spec);
}

Recording minmax_scale(const Recording& rec) {
    if (rec.samples.size() < 1) fail("InputTooShort", "cannot scale an empty recording");
    Recording out;
    out.sample_rate_hz = rec.sample_rate_hz;
    out.subject_id = rec.subject_id;
    const double lo = rec.samples.minCoeff();
    const double hi = rec.samples.maxCoeff();
    if (hi == lo) {
        out.samples = Eigen::ArrayXd::Zero(rec.samples.size());
    } else {
        out.samples = 2.0 * (rec.samples - lo) / (hi - lo) - 1.0;
    }
    return out;
}

std::vector<EpochPair> epochize(const Recording& rec, const BinaryMask& mask, double epoch_seconds) {
    if (mask.size() != rec.samples.size())
        fail("ShapeMismatch", "recording and mask lengths differ");
    if (mask.sample_rate_hz != rec.sample_rate_hz)
        fail("InvalidRate", "recording and mask rates differ");
    if (epoch_seconds <= 0.0) fail("InvalidConfig", "epoch_seconds must be positive");

    const auto epoch_len = static_cast<Eigen::Index>(std::llround(epoch_seconds * rec.sample_rate_hz));
    std::vector<EpochPair> pairs;
    for (Eigen::Index start = 0; start + epoch_len <= rec.samples.size(); start += epoch_len) {
        EpochPair pair;
        pair.signal = rec.samples.segment(start, epoch_len).cast<float>();
        pair.target.resize(epoch_len);
        for (Eigen::Index i = 0; i < epoch_len; ++i)
            pair.target[i] = static_cast<float>(mask.values[static_cast<std::size_t>(start + i)]);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

}  // namespace swd
