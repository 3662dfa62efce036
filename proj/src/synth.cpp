#include "swd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "swd/common.hpp"
#include "swd/spectral.hpp"

namespace swd {

namespace {

Eigen::ArrayXd pink_noise(Eigen::Index n, Rng& rng) {
    // shape a white spectrum by 1/sqrt(f) and invert; hermitian bins only
    std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(n), {0.0, 0.0});
    const Eigen::Index half = n / 2;
    for (Eigen::Index k = 1; k <= half; ++k) {
        const double mag = 1.0 / std::sqrt(static_cast<double>(k));
        const std::complex<double> z(rng.normal() * mag, rng.normal() * mag);
        spectrum[static_cast<std::size_t>(k)] = z;
        if (k != n - k) spectrum[static_cast<std::size_t>(n - k)] = std::conj(z);
    }
    Eigen::ArrayXd x = spectral::ifft_real(spectrum);
    const double sd = std::sqrt((x - x.mean()).square().sum() / static_cast<double>(n));
    if (sd > 0.0) x = (x - x.mean()) / sd;
    return x;
}

double raised_cosine_edge(double into, double ramp) {
    if (into >= ramp) return 1.0;
    if (into <= 0.0) return 0.0;
    return 0.5 * (1.0 - std::cos(M_PI * into / ramp));
}

bool clear_of(const std::vector<Interval>& placed, double start, double end, double margin) {
    for (const auto& iv : placed) {
        if (start < iv.end_s + margin && iv.start_s - margin < end) return false;
    }
    return true;
}

struct SwdEvent {
    double start_s = 0.0;
    double duration_s = 0.0;
    double f0_hz = 0.0;
    double phase2 = 0.0;
    double phase3 = 0.0;
};

}  // namespace

SynthOutput generate(const SynthConfig& cfg) {
    cfg.validate();
    const double rate = cfg.rate_hz;
    const auto n = static_cast<Eigen::Index>(std::llround(cfg.duration_s * rate));
    if (n < 16) fail("InvalidConfig", "duration too short to synthesize");
    const double hours = cfg.duration_s / 3600.0;

    Rng rng(mix_seed(cfg.seed, 0x73796e7468ULL));

    Eigen::ArrayXd x = pink_noise(n, rng);
    const double background_sd = 1.0;

    // ---- noise artifact intervals ----
    std::vector<Interval> noise_ivs;
    {
        const int count = rng.poisson(cfg.noise_events_per_hour * hours);
        for (int e = 0; e < count; ++e) {
            const double dur = rng.uniform(0.1, 0.4);
            if (cfg.duration_s < dur + 2.0)
                fail("CapacityExceeded", "recording too short for the requested artifacts");
            bool placed = false;
            for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
                const double start = rng.uniform(1.0, cfg.duration_s - dur - 1.0);
                if (clear_of(noise_ivs, start, start + dur, 2.0)) {
                    noise_ivs.push_back({start, start + dur, "noise"});
                    placed = true;
                }
            }
            if (!placed) fail("CapacityExceeded", "cannot place the requested noise events");
        }
        std::sort(noise_ivs.begin(), noise_ivs.end(),
                  [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
    }

    // ---- spike-wave event placement (waveforms composed later) ----
    std::vector<SwdEvent> swd_events;
    std::vector<Interval> swd_ivs;
    {
        const int count = rng.poisson(cfg.swd_rate_per_hour * hours);
        double mass = 0.0;
        std::vector<Interval> avoid = noise_ivs;
        for (int e = 0; e < count; ++e) {
            SwdEvent ev;
            // fundamental within +/-2 SD keeps the measured Welch peak inside
            // the documented 3-SD envelope at 1 Hz bin resolution
            ev.f0_hz = rng.truncated_normal(cfg.swd_peak_hz_mean, cfg.swd_peak_hz_sd,
                                            cfg.swd_peak_hz_mean - 2.0 * cfg.swd_peak_hz_sd,
                                            cfg.swd_peak_hz_mean + 2.0 * cfg.swd_peak_hz_sd);
            // at least 5 spike-wave complexes at the drawn fundamental
            const double floor_s = std::max(cfg.swd_duration_floor_s, 5.0 / ev.f0_hz);
            ev.duration_s = rng.truncated_normal(cfg.swd_duration_mean_s, cfg.swd_duration_sd_s,
                                                 floor_s, std::max(floor_s * 2.0, 30.0));
            if (cfg.duration_s < ev.duration_s + 2.0)
                fail("CapacityExceeded", "recording too short for the drawn event duration");
            mass += ev.duration_s;
            if (mass > 0.7 * cfg.duration_s)
                fail("CapacityExceeded", "requested spike-wave mass exceeds recording capacity");
            bool placed = false;
            for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
                ev.start_s = rng.uniform(1.0, cfg.duration_s - ev.duration_s - 1.0);
                if (clear_of(avoid, ev.start_s, ev.start_s + ev.duration_s, 1.0)) placed = true;
            }
            if (!placed) fail("CapacityExceeded", "cannot place the requested spike-wave events");
            ev.phase2 = rng.uniform(0.0, 2.0 * M_PI);
            ev.phase3 = rng.uniform(0.0, 2.0 * M_PI);
            avoid.push_back({ev.start_s, ev.start_s + ev.duration_s, "SWD"});
            swd_ivs.push_back(avoid.back());
            swd_events.push_back(ev);
        }
        std::sort(swd_events.begin(), swd_events.end(),
                  [](const SwdEvent& a, const SwdEvent& b) { return a.start_s < b.start_s; });
        std::sort(swd_ivs.begin(), swd_ivs.end(),
                  [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
    }

    // ---- sleep bouts ----
    std::vector<Interval> sleep_ivs;
    if (cfg.sleep_fraction > 0.0 && cfg.duration_s > 120.0) {
        const double bout_mean = 120.0;
        const double gap_mean = std::max(30.0, bout_mean * (1.0 - cfg.sleep_fraction) / cfg.sleep_fraction);
        double cursor = rng.uniform(0.0, gap_mean);
        while (true) {
            const double bout = rng.uniform(60.0, 180.0);
            if (cursor + bout + 1.0 > cfg.duration_s) break;
            sleep_ivs.push_back({cursor, cursor + bout, "sleep"});
            cursor += bout + std::max(25.0, rng.uniform(0.5 * gap_mean, 1.5 * gap_mean));
        }
    }

    // the slow-wave oscillation pauses around spike-wave events, so each
    // event's spectrum stays dominated by its own fundamental
    auto swd_gate = [&](double t) {
        double gate = 1.0;
        for (const auto& iv : swd_ivs) {
            if (t < iv.start_s - 0.5) break;
            if (t >= iv.start_s - 0.5 && t < iv.end_s + 0.5) {
                const double d = t < iv.start_s ? iv.start_s - t : (t >= iv.end_s ? t - iv.end_s : 0.0);
                gate = std::min(gate, 1.0 - raised_cosine_edge(0.5 - d, 0.5));
            }
        }
        return gate;
    };

    for (const auto& iv : sleep_ivs) {
        const double freq = rng.uniform(1.0, 3.0);
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        const double amp = 3.0 * background_sd;
        const auto lo = static_cast<Eigen::Index>(std::llround(iv.start_s * rate));
        const auto hi = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::llround(iv.end_s * rate)), n);
        for (Eigen::Index i = lo; i < hi; ++i) {
            const double t = static_cast<double>(i) / rate;
            const double edge = std::min(raised_cosine_edge(t - iv.start_s, 2.0),
                                         raised_cosine_edge(iv.end_s - t, 2.0));
            x[i] += amp * edge * swd_gate(t) * std::sin(2.0 * M_PI * freq * t + phase);
        }
    }

    // ---- spike-wave waveforms: harmonic stack plus per-cycle transients ----
    for (const auto& ev : swd_events) {
        const auto lo = static_cast<Eigen::Index>(std::llround(ev.start_s * rate));
        const auto hi =
            std::min<Eigen::Index>(static_cast<Eigen::Index>(std::llround((ev.start_s + ev.duration_s) * rate)), n);
        const Eigen::Index len = hi - lo;
        if (len < 2) continue;
        Eigen::ArrayXd wave(len);
        const double spike_sd = 0.010;  // 10 ms transients
        const int n_cycles = static_cast<int>(std::floor(ev.duration_s * ev.f0_hz));
        for (Eigen::Index i = 0; i < len; ++i) {
            const double tt = static_cast<double>(i) / rate;
            double v = std::sin(2.0 * M_PI * ev.f0_hz * tt) +
                       0.4 * std::sin(4.0 * M_PI * ev.f0_hz * tt + ev.phase2) +
                       0.2 * std::sin(6.0 * M_PI * ev.f0_hz * tt + ev.phase3);
            for (int k = 0; k < n_cycles; ++k) {
                const double tk = (static_cast<double>(k) + 0.25) / ev.f0_hz;
                const double d = tt - tk;
                if (std::abs(d) < 5.0 * spike_sd) v += 1.0 * std::exp(-0.5 * d * d / (spike_sd * spike_sd));
            }
            const double edge =
                std::min(raised_cosine_edge(tt, 0.3), raised_cosine_edge(ev.duration_s - tt, 0.3));
            wave[i] = v * edge;
        }
        const double peak = wave.abs().maxCoeff();
        if (peak > 0.0) wave *= cfg.swd_amplitude_ratio * background_sd / peak;
        x.segment(lo, len) += wave;
    }

    // ---- noise artifact waveforms, scaled against the composed signal ----
    if (!noise_ivs.empty()) {
        const double composed_sd = std::sqrt((x - x.mean()).square().sum() / static_cast<double>(n));
        const double amp = 30.0 * composed_sd;
        for (const auto& iv : noise_ivs) {
            const auto lo = static_cast<Eigen::Index>(std::llround(iv.start_s * rate));
            const auto hi = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::llround(iv.end_s * rate)), n);
            const double dur = iv.end_s - iv.start_s;
            for (Eigen::Index i = lo; i < hi; ++i) {
                const double tt = static_cast<double>(i) / rate - iv.start_s;
                const double env = 0.5 * (1.0 - std::cos(2.0 * M_PI * tt / dur));
                x[i] += amp * env * (i % 2 == 0 ? 1.0 : -1.0);
            }
        }
    }

    SynthOutput out;
    out.recording.samples = std::move(x);
    out.recording.sample_rate_hz = rate;
    out.recording.subject_id = cfg.subject_id;
    out.swd = EventSet(std::move(swd_ivs), cfg.duration_s);
    out.sleep = EventSet(std::move(sleep_ivs), cfg.duration_s);
    out.noise = EventSet(std::move(noise_ivs), cfg.duration_s);
    return out;
}

}  // namespace swd
