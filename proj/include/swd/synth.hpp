#pragma once

#include "swd/signal.hpp"

namespace swd {

/// Synthetic recording parameters. Event statistics default to the observed
/// C3H/HeJ spike-wave numbers (rate 23.55/h, duration 5.83 +/- 2.37 s, peak
/// 5.72 +/- 0.75 Hz).
struct SynthConfig {
    double duration_s = 3600.0;
    double rate_hz = 100.0;

    double swd_rate_per_hour = 23.55;
    double swd_duration_mean_s = 5.83;
    double swd_duration_sd_s = 2.37;
    double swd_duration_floor_s = 1.0;
    double swd_peak_hz_mean = 5.72;
    double swd_peak_hz_sd = 0.75;
    double swd_amplitude_ratio = 4.0;  // peak amplitude as a multiple of background SD

    double sleep_fraction = 0.3;
    double noise_events_per_hour = 2.0;

    uint64_t seed = 0;
    std::string subject_id = "synth";

    void validate() const {
        if (duration_s <= 0.0) fail("InvalidConfig", "duration_s must be positive");
        if (rate_hz <= 0.0) fail("InvalidConfig", "rate_hz must be positive");
        if (swd_rate_per_hour < 0.0 || noise_events_per_hour < 0.0)
            fail("InvalidConfig", "event rates must be >= 0");
        if (swd_amplitude_ratio <= 1.0) fail("InvalidConfig", "swd_amplitude_ratio must be > 1");
        if (sleep_fraction < 0.0 || sleep_fraction >= 1.0)
            fail("InvalidConfig", "sleep_fraction must lie in [0, 1)");
        if (swd_duration_floor_s <= 0.0) fail("InvalidConfig", "swd_duration_floor_s must be positive");
    }
};

struct SynthOutput {
    Recording recording;
    EventSet swd;
    EventSet sleep;
    EventSet noise;
};

/// Pink-noise background with Poisson-placed spike-wave bursts (harmonic
/// stack plus per-cycle transients), elevated slow-wave segments over the
/// sleep intervals, and rare high-amplitude artifacts. Deterministic in the
/// seed; returns all ground-truth interval sets.
SynthOutput generate(const SynthConfig& cfg);

}  // namespace swd
