#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "swd/common.hpp"

namespace swd {

/// Single-channel amplitude series. Samples are finite, sample rate > 0.
struct Recording {
    Eigen::ArrayXd samples;
    double sample_rate_hz = 0.0;
    std::string subject_id;

    Eigen::Index size() const { return samples.size(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

struct Interval {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string label;

    double duration_s() const { return end_s - start_s; }

    bool operator==(const Interval&) const = default;
};

/// True when the open overlap of two intervals is non-empty (shared
/// endpoints alone do not count).
inline bool intervals_overlap(const Interval& a, const Interval& b) {
    return a.start_s < b.end_s && b.start_s < a.end_s;
}

/// Sorted set of labeled time intervals. Same-label intervals are
/// non-overlapping; touching or overlapping ones are merged on construction.
/// `total_duration_s` is timeline metadata (length of the parent recording)
/// and does not participate in equality.
class EventSet {
public:
    EventSet() = default;
    EventSet(std::vector<Interval> intervals, double total_duration_s);

    const std::vector<Interval>& intervals() const { return intervals_; }
    double total_duration_s() const { return total_duration_s_; }
    void set_total_duration_s(double t);

    std::size_t size() const { return intervals_.size(); }
    bool empty() const { return intervals_.empty(); }

    /// Subset with the given label (canonical by construction).
    EventSet filtered(const std::string& label) const;

    bool operator==(const EventSet& other) const { return intervals_ == other.intervals_; }

private:
    std::vector<Interval> intervals_;
    double total_duration_s_ = 0.0;
};

/// Per-sample {0,1} values aligned with a recording of the same rate.
struct BinaryMask {
    std::vector<uint8_t> values;
    double sample_rate_hz = 0.0;

    Eigen::Index size() const { return static_cast<Eigen::Index>(values.size()); }
};

enum class SignalFormat { csv, f32 };

/// Infers format from the file extension (.csv or .f32).
SignalFormat signal_format_for_path(const std::string& path);

Recording load_signal(const std::string& path, SignalFormat format);
Recording load_signal(const std::string& path);
void save_signal(const Recording& rec, const std::string& path, SignalFormat format);
void save_signal(const Recording& rec, const std::string& path);

EventSet load_labels(const std::string& path);
void save_labels(const EventSet& events, const std::string& path);

/// Rasterizes all intervals of the set onto a sample grid using the
/// half-open convention: sample i is 1 iff i/rate lies in [start, end).
BinaryMask events_to_mask(const EventSet& events, Eigen::Index n_samples, double sample_rate_hz);

/// Sidecar JSON path for a .f32 signal file ("x.f32" -> "x.json").
std::string sidecar_path(const std::string& f32_path);

}  // namespace swd
