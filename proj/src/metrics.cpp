#include "swd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "swd/spectral.hpp"

namespace swd {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double p, double r) { return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

EventSet mask_to_events(const BinaryMask& mask, double min_duration_s, double merge_gap_s,
                        const std::string& label) {
    if (mask.sample_rate_hz <= 0.0) fail("InvalidRate", "mask sample rate must be positive");
    const double rate = mask.sample_rate_hz;
    const auto n = static_cast<Eigen::Index>(mask.values.size());

    std::vector<std::pair<Eigen::Index, Eigen::Index>> runs;  // [start, end) in samples
    Eigen::Index i = 0;
    while (i < n) {
        if (mask.values[static_cast<std::size_t>(i)] == 0) {
            ++i;
            continue;
        }
        Eigen::Index j = i;
        while (j < n && mask.values[static_cast<std::size_t>(j)] == 1) ++j;
        runs.emplace_back(i, j);
        i = j;
    }

    // bridge sub-threshold gaps, then drop sub-threshold events; comparisons
    // happen in sample units so boundaries are exact
    const double merge_gap_samples = merge_gap_s * rate - 1e-9;
    const double min_duration_samples = min_duration_s * rate - 1e-9;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> merged;
    for (const auto& run : runs) {
        if (!merged.empty() && static_cast<double>(run.first - merged.back().second) < merge_gap_samples) {
            merged.back().second = run.second;
        } else {
            merged.push_back(run);
        }
    }
    std::vector<Interval> kept;
    for (const auto& run : merged) {
        if (static_cast<double>(run.second - run.first) >= min_duration_samples) {
            kept.push_back({static_cast<double>(run.first) / rate, static_cast<double>(run.second) / rate, label});
        }
    }

    return EventSet(std::move(kept), static_cast<double>(n) / rate);
}

PointwiseScore pointwise_metrics(const BinaryMask& pred, const BinaryMask& truth) {
    if (pred.values.size() != truth.values.size())
        fail("ShapeMismatch", "pointwise_metrics: mask lengths differ");
    PointwiseScore s;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const bool p = pred.values[i] != 0;
        const bool t = truth.values[i] != 0;
        if (p && t) ++s.tp;
        else if (p && !t) ++s.fp;
        else if (!p && t) ++s.fn;
        else ++s.tn;
    }
    s.precision = safe_ratio(static_cast<double>(s.tp), static_cast<double>(s.tp + s.fp));
    s.recall = safe_ratio(static_cast<double>(s.tp), static_cast<double>(s.tp + s.fn));
    s.f1 = f1_of(s.precision, s.recall);
    return s;
}

EventScore eventwise_metrics(const EventSet& pred, const EventSet& truth) {
    const auto& p = pred.intervals();
    const auto& t = truth.intervals();
    std::vector<uint8_t> p_hit(p.size(), 0), t_hit(t.size(), 0);

    // merge walk over the two sorted sets; advance whichever interval ends first
    std::size_t i = 0, j = 0;
    while (i < p.size() && j < t.size()) {
        if (intervals_overlap(p[i], t[j])) {
            p_hit[i] = 1;
            t_hit[j] = 1;
        }
        if (p[i].end_s <= t[j].end_s) ++i;
        else ++j;
    }

    EventScore s;
    for (auto h : p_hit) (h ? s.tp_pred : s.fp_pred)++;
    for (auto h : t_hit) (h ? s.tp_truth : s.fn_truth)++;
    s.precision = safe_ratio(static_cast<double>(s.tp_pred), static_cast<double>(s.tp_pred + s.fp_pred));
    s.recall = safe_ratio(static_cast<double>(s.tp_truth), static_cast<double>(s.tp_truth + s.fn_truth));
    s.f1 = f1_of(s.precision, s.recall);
    return s;
}

double peak_frequency(const Recording& rec, double start_s, double end_s) {
    if (!(start_s < end_s)) fail("InvalidInterval", "peak_frequency: start must be < end");
    if (end_s - start_s < 1.0 - 1e-9) fail("IntervalTooShort", "peak_frequency needs an interval of >= 1 s");
    const double rate = rec.sample_rate_hz;
    auto lo = static_cast<Eigen::Index>(std::ceil(start_s * rate - 1e-9));
    auto hi = static_cast<Eigen::Index>(std::ceil(end_s * rate - 1e-9));
    lo = std::max<Eigen::Index>(lo, 0);
    hi = std::min<Eigen::Index>(hi, rec.samples.size());
    if (hi <= lo) fail("InvalidInterval", "peak_frequency: interval lies outside the recording");
    Eigen::ArrayXd seg = rec.samples.segment(lo, hi - lo);
    return spectral::peak_frequency_hz(seg, rate, 1.0, 20.0);
}

SummaryStat summarize(const std::vector<double>& values) {
    SummaryStat s;
    s.n = static_cast<int>(values.size());
    if (s.n >= 1) {
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean = sum / s.n;
        if (s.n >= 2) {
            double ss = 0.0;
            for (double v : values) ss += (v - *s.mean) * (v - *s.mean);
            s.sd = std::sqrt(ss / (s.n - 1));
        }
    }
    return s;
}

EventStats event_stats(const EventSet& events, double total_duration_s) {
    EventStats stats;
    std::vector<double> durations;
    for (const auto& iv : events.intervals()) durations.push_back(iv.duration_s());
    stats.duration = summarize(durations);
    stats.rate_per_hour =
        total_duration_s > 0.0 ? static_cast<double>(events.size()) / (total_duration_s / 3600.0) : 0.0;
    return stats;
}

EventFeatures event_features(const Recording& rec, const EventSet& events) {
    EventFeatures f;
    for (const auto& iv : events.intervals()) {
        f.duration_s.push_back(iv.duration_s());
        if (iv.duration_s() >= 1.0 - 1e-9) {
            f.peak_frequency_hz.push_back(peak_frequency(rec, iv.start_s, iv.end_s));
        } else {
            f.peak_frequency_hz.push_back(std::nullopt);
        }
    }
    const double total = rec.duration_s();
    f.rate_per_hour = total > 0.0 ? static_cast<double>(events.size()) / (total / 3600.0) : 0.0;
    return f;
}

}  // namespace swd
