#pragma once

#include <string>

#include "swd/signal.hpp"

namespace swd {

/// Detected noise or sleep epochs plus the thresholds that produced them.
struct StateEpochs {
    std::string kind;  // "noise" or "sleep"
    EventSet intervals;
    double threshold_lo = 0.0;
    double threshold_hi = 0.0;
    bool bimodal = true;       // sleep only: false when no second envelope mode was found
    std::string diagnostic;    // set when detection bailed out
};

/// Flags 5 s blocks containing any sample at least k_sd standard deviations
/// from the recording mean; adjacent flagged blocks coalesce. The test is in
/// SD units, so it is invariant under affine amplitude transforms.
StateEpochs detect_noise(const Recording& rec, double block_s = 5.0, double k_sd = 20.0);

struct SleepParams {
    double band_lo_hz = 0.1;
    double band_hi_hz = 4.0;
    double fir_seconds = 5.0;   // zero-phase windowed-sinc FIR length
    int hist_bins = 256;
    int hist_smooth_passes = 4;
    double min_peak_separation_frac = 0.10;  // of the envelope range
    double merge_gap_s = 20.0;
};

/// Hilbert-envelope sleep detection: band-pass 0.1-4 Hz, envelope, smoothed
/// histogram, two dominant modes (wake low / sleep high), candidate epochs at
/// the midpoint threshold, secondary-threshold confirmation, gap merging.
/// Returns empty with bimodal=false when the envelope distribution has no
/// second mode at the required separation.
StateEpochs detect_sleep(const Recording& rec, const SleepParams& params = {});

/// Fraction of events overlapping any state interval; 0 when there are none.
double proportion_in_state(const EventSet& events, const StateEpochs& state);

}  // namespace swd
