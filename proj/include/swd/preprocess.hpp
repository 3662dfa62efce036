#pragma once

#include <vector>

#include "swd/signal.hpp"

namespace swd {

struct ResampleSpec {
    double source_rate_hz = 0.0;
    double target_rate_hz = 0.0;
    /// Half-width of the Hann-windowed sinc kernel, in zero crossings of the
    /// lower of the two rates.
    int kernel_half_width_zero_crossings = 32;
};

/// Windowed-sinc resampling with anti-aliasing at min(f_s, f_t)/2,
/// zero-padded edges and unit DC gain. Equal rates return the input as is.
/// Output length is round(N * f_t / f_s).
Recording resample(const Recording& rec, const ResampleSpec& spec);
Recording resample_to(const Recording& rec, double target_rate_hz, int half_width = 32);

/// Maps the amplitude range onto [-1, 1]; a constant signal maps to zeros.
Recording minmax_scale(const Recording& rec);

/// One fixed-length training example: signal window plus its binary target.
struct EpochPair {
    Eigen::ArrayXf signal;
    Eigen::ArrayXf target;
};

/// Cuts recording and mask into consecutive non-overlapping windows of
/// epoch_seconds; a trailing remainder shorter than one window is dropped.
std::vector<EpochPair> epochize(const Recording& rec, const BinaryMask& mask,
                                double epoch_seconds = 20.0);

}  // namespace swd
