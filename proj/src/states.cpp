#include "swd/states.hpp"

#include <algorithm>
#include <cmath>

#include "swd/spectral.hpp"

namespace swd {

StateEpochs detect_noise(const Recording& rec, double block_s, double k_sd) {
    if (block_s <= 0.0) fail("InvalidConfig", "block_s must be positive");
    const double rate = rec.sample_rate_hz;
    const auto block_len = static_cast<Eigen::Index>(std::llround(block_s * rate));
    const Eigen::Index n = rec.samples.size();
    if (n < block_len) fail("InputTooShort", "recording shorter than one noise block");

    const double mean = rec.samples.mean();
    const double sd = std::sqrt((rec.samples - mean).square().sum() / static_cast<double>(n));
    const double threshold = k_sd * sd;

    const Eigen::Index n_blocks = (n + block_len - 1) / block_len;  // trailing partial block included
    std::vector<Interval> flagged;
    for (Eigen::Index b = 0; b < n_blocks; ++b) {
        const Eigen::Index lo = b * block_len;
        const Eigen::Index len = std::min(block_len, n - lo);
        const double peak = (rec.samples.segment(lo, len) - mean).abs().maxCoeff();
        if (peak >= threshold) {
            const double start = static_cast<double>(lo) / rate;
            const double end = static_cast<double>(lo + len) / rate;
            if (!flagged.empty() && flagged.back().end_s >= start) {
                flagged.back().end_s = end;
            } else {
                flagged.push_back({start, end, "noise"});
            }
        }
    }

    StateEpochs out;
    out.kind = "noise";
    out.threshold_lo = threshold;
    out.threshold_hi = threshold;
    out.intervals = EventSet(std::move(flagged), static_cast<double>(n) / rate);
    return out;
}

namespace {

struct HistogramPeaks {
    bool bimodal = false;
    double low_value = 0.0;   // envelope value at the wake mode
    double high_value = 0.0;  // envelope value at the sleep mode
};

HistogramPeaks find_envelope_modes(const Eigen::ArrayXd& envelope, int bins, int smooth_passes,
                                   double min_separation_frac) {
    const double lo = envelope.minCoeff();
    const double hi = envelope.maxCoeff();
    HistogramPeaks peaks;
    if (hi <= lo) return peaks;

    Eigen::ArrayXd hist = Eigen::ArrayXd::Zero(bins);
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (Eigen::Index i = 0; i < envelope.size(); ++i) {
        auto b = static_cast<Eigen::Index>((envelope[i] - lo) * scale);
        b = std::min<Eigen::Index>(b, bins - 1);
        hist[b] += 1.0;
    }
    // repeated [1 2 1]/4 smoothing
    for (int pass = 0; pass < smooth_passes; ++pass) {
        Eigen::ArrayXd next = hist;
        for (int b = 1; b + 1 < bins; ++b) next[b] = 0.25 * hist[b - 1] + 0.5 * hist[b] + 0.25 * hist[b + 1];
        next[0] = 0.5 * hist[0] + 0.5 * hist[1];
        next[bins - 1] = 0.5 * hist[bins - 2] + 0.5 * hist[bins - 1];
        hist = next;
    }

    std::vector<int> maxima;
    for (int b = 0; b < bins; ++b) {
        const double left = b > 0 ? hist[b - 1] : -1.0;
        const double right = b + 1 < bins ? hist[b + 1] : -1.0;
        if (hist[b] > left && hist[b] >= right && hist[b] > 0.0) maxima.push_back(b);
    }
    if (maxima.size() < 2) return peaks;

    std::sort(maxima.begin(), maxima.end(), [&](int a, int b) { return hist[a] > hist[b]; });
    const int first = maxima[0];
    const auto min_sep = static_cast<int>(std::ceil(min_separation_frac * bins));
    // the second mode needs prominence: non-negligible height and a real
    // valley between the two peaks, otherwise the distribution is unimodal
    int second = -1;
    for (std::size_t i = 1; i < maxima.size(); ++i) {
        const int cand = maxima[i];
        if (std::abs(cand - first) < min_sep) continue;
        if (hist[cand] < 0.05 * hist[first]) continue;
        const int lo = std::min(first, cand), hi = std::max(first, cand);
        double valley = hist[lo];
        for (int b = lo; b <= hi; ++b) valley = std::min(valley, hist[b]);
        if (valley > 0.8 * hist[cand]) continue;
        second = cand;
        break;
    }
    if (second < 0) return peaks;

    auto bin_center = [&](int b) { return lo + (static_cast<double>(b) + 0.5) / scale; };
    peaks.bimodal = true;
    peaks.low_value = bin_center(std::min(first, second));
    peaks.high_value = bin_center(std::max(first, second));
    return peaks;
}

}  // namespace

StateEpochs detect_sleep(const Recording& rec, const SleepParams& params) {
    const double rate = rec.sample_rate_hz;
    if (rec.duration_s() < 60.0) fail("InputTooShort", "sleep detection needs at least 60 s of signal");

    StateEpochs out;
    out.kind = "sleep";

    int taps = static_cast<int>(std::llround(params.fir_seconds * rate));
    if (taps % 2 == 0) ++taps;
    taps = std::max(taps, 31);
    const Eigen::ArrayXd kernel = spectral::bandpass_kernel(params.band_lo_hz, params.band_hi_hz, rate, taps);
    const Eigen::ArrayXd banded = spectral::convolve_centered(rec.samples - rec.samples.mean(), kernel);
    const Eigen::ArrayXd envelope = spectral::hilbert_envelope(banded);

    const HistogramPeaks peaks = find_envelope_modes(envelope, params.hist_bins, params.hist_smooth_passes,
                                                     params.min_peak_separation_frac);
    if (!peaks.bimodal) {
        out.bimodal = false;
        out.diagnostic = "envelope distribution is unimodal; no sleep threshold available";
        out.intervals = EventSet({}, rec.duration_s());
        return out;
    }

    const double lower = 0.5 * (peaks.low_value + peaks.high_value);
    const double secondary = peaks.high_value;
    out.threshold_lo = lower;
    out.threshold_hi = secondary;

    // candidate epochs: runs with envelope >= lower that also reach the
    // secondary threshold at least once
    const Eigen::Index n = envelope.size();
    std::vector<Interval> epochs;
    Eigen::Index i = 0;
    while (i < n) {
        if (envelope[i] < lower) {
            ++i;
            continue;
        }
        Eigen::Index j = i;
        bool confirmed = false;
        while (j < n && envelope[j] >= lower) {
            if (envelope[j] >= secondary) confirmed = true;
            ++j;
        }
        if (confirmed) {
            const double start = static_cast<double>(i) / rate;
            const double end = static_cast<double>(j) / rate;
            if (!epochs.empty() && start - epochs.back().end_s < params.merge_gap_s) {
                epochs.back().end_s = end;
            } else {
                epochs.push_back({start, end, "sleep"});
            }
        }
        i = j;
    }

    out.intervals = EventSet(std::move(epochs), rec.duration_s());
    return out;
}

double proportion_in_state(const EventSet& events, const StateEpochs& state) {
    if (events.empty()) return 0.0;
    int hits = 0;
    for (const auto& ev : events.intervals()) {
        for (const auto& st : state.intervals.intervals()) {
            if (intervals_overlap(ev, st)) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(events.size());
}

}  // namespace swd
