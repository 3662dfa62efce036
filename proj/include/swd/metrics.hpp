#pragma once

#include <optional>
#include <vector>

#include "swd/signal.hpp"

namespace swd {

struct PointwiseScore {
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct EventScore {
    int tp_pred = 0, fp_pred = 0;
    int tp_truth = 0, fn_truth = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct SummaryStat {
    int n = 0;
    std::optional<double> mean;
    std::optional<double> sd;  // sample (n-1) standard deviation
};

struct EventStats {
    SummaryStat duration;
    double rate_per_hour = 0.0;
};

/// Per-event features; peak frequency is absent for events shorter than the
/// 1 s analysis window.
struct EventFeatures {
    std::vector<double> duration_s;
    std::vector<std::optional<double>> peak_frequency_hz;
    double rate_per_hour = 0.0;
};

/// Maximal runs of ones become intervals; gaps shorter than merge_gap_s are
/// bridged first, then events shorter than min_duration_s are discarded.
EventSet mask_to_events(const BinaryMask& mask, double min_duration_s = 0.5,
                        double merge_gap_s = 0.2, const std::string& label = "SWD");

/// Per-sample confusion counts; precision/recall are 0 on an empty
/// denominator and F1 is 0 when P + R == 0.
PointwiseScore pointwise_metrics(const BinaryMask& pred, const BinaryMask& truth);

/// Any-overlap event matching: a predicted event is a true positive iff it
/// overlaps at least one truth event; a truth event is detected iff some
/// prediction overlaps it. Inputs must be canonical (sorted, non-overlapping).
EventScore eventwise_metrics(const EventSet& pred, const EventSet& truth);

/// Welch peak frequency (1 s Hann windows, 50% overlap) of the recording
/// samples inside [start_s, end_s), searched within 1-20 Hz.
double peak_frequency(const Recording& rec, double start_s, double end_s);

/// Mean/SD of event durations plus the hourly rate.
EventStats event_stats(const EventSet& events, double total_duration_s);

/// Durations and per-event peak frequencies against the parent recording.
EventFeatures event_features(const Recording& rec, const EventSet& events);

SummaryStat summarize(const std::vector<double>& values);

}  // namespace swd
