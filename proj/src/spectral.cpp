#include "swd/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include "swd/common.hpp"

namespace swd::spectral {

std::vector<std::complex<double>> fft(const Eigen::ArrayXd& x) {
    Eigen::FFT<double> engine;
    std::vector<double> in(x.data(), x.data() + x.size());
    std::vector<std::complex<double>> out;
    engine.fwd(out, in);
    return out;
}

Eigen::ArrayXd ifft_real(const std::vector<std::complex<double>>& spectrum) {
    Eigen::FFT<double> engine;
    std::vector<std::complex<double>> time;
    engine.inv(time, spectrum);
    Eigen::ArrayXd out(static_cast<Eigen::Index>(time.size()));
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = time[static_cast<std::size_t>(i)].real();
    return out;
}

Eigen::ArrayXd hilbert_envelope(const Eigen::ArrayXd& x) {
    const Eigen::Index n = x.size();
    if (n < 2) fail("InputTooShort", "hilbert envelope needs at least 2 samples");
    auto spectrum = fft(x);
    // analytic-signal multiplier: keep DC (and Nyquist for even n), double positive bins
    const Eigen::Index half = n / 2;
    for (Eigen::Index k = 1; k < half; ++k) spectrum[static_cast<std::size_t>(k)] *= 2.0;
    if (n % 2 == 1 && half >= 1) spectrum[static_cast<std::size_t>(half)] *= 2.0;
    for (Eigen::Index k = half + 1; k < n; ++k) spectrum[static_cast<std::size_t>(k)] = 0.0;

    Eigen::FFT<double> engine;
    std::vector<std::complex<double>> analytic;
    engine.inv(analytic, spectrum);
    Eigen::ArrayXd env(n);
    for (Eigen::Index i = 0; i < n; ++i) env[i] = std::abs(analytic[static_cast<std::size_t>(i)]);
    return env;
}

Psd welch_psd(const Eigen::ArrayXd& x, double sample_rate_hz, double window_s) {
    if (sample_rate_hz <= 0.0) fail("InvalidRate", "sample rate must be positive");
    const Eigen::Index w = static_cast<Eigen::Index>(std::llround(window_s * sample_rate_hz));
    if (w < 4) fail("IntervalTooShort", "welch window shorter than 4 samples");
    if (x.size() < w) fail("IntervalTooShort", "welch needs at least one full window");
    const Eigen::Index hop = w / 2;

    // periodic Hann
    Eigen::ArrayXd window(w);
    for (Eigen::Index i = 0; i < w; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(w)));

    const Eigen::Index n_bins = w / 2 + 1;
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n_bins);
    Eigen::FFT<double> engine;
    int n_segments = 0;
    for (Eigen::Index start = 0; start + w <= x.size(); start += hop) {
        Eigen::ArrayXd seg = x.segment(start, w);
        seg -= seg.mean();
        seg *= window;
        std::vector<double> in(seg.data(), seg.data() + w);
        std::vector<std::complex<double>> spec;
        engine.fwd(spec, in);
        for (Eigen::Index k = 0; k < n_bins; ++k) acc[k] += std::norm(spec[static_cast<std::size_t>(k)]);
        ++n_segments;
    }
    acc /= static_cast<double>(n_segments);

    Psd psd;
    psd.power = acc;
    psd.freq_hz.resize(n_bins);
    for (Eigen::Index k = 0; k < n_bins; ++k)
        psd.freq_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(w);
    return psd;
}

double peak_frequency_hz(const Eigen::ArrayXd& x, double sample_rate_hz,
                         double band_lo_hz, double band_hi_hz) {
    Psd psd = welch_psd(x, sample_rate_hz);
    double best_f = -1.0;
    double best_p = -1.0;
    for (Eigen::Index k = 0; k < psd.freq_hz.size(); ++k) {
        double f = psd.freq_hz[k];
        if (f < band_lo_hz - 1e-12 || f > band_hi_hz + 1e-12) continue;
        if (psd.power[k] > best_p) {
            best_p = psd.power[k];
            best_f = f;
        }
    }
    if (best_f < 0.0) fail("IntervalTooShort", "no PSD bins inside the analysis band");
    return best_f;
}

Eigen::ArrayXd lowpass_kernel(double cutoff_hz, double sample_rate_hz, int taps) {
    if (taps < 3 || taps % 2 == 0) fail("InvalidConfig", "FIR taps must be odd and >= 3");
    if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0)
        fail("InvalidConfig", "cutoff must lie in (0, rate/2)");
    const int m = (taps - 1) / 2;
    Eigen::ArrayXd h(taps);
    for (int i = 0; i < taps; ++i) {
        const double t = static_cast<double>(i - m) / sample_rate_hz;
        double s;
        if (i == m) {
            s = 2.0 * cutoff_hz;
        } else {
            s = std::sin(2.0 * M_PI * cutoff_hz * t) / (M_PI * t);
        }
        const double w = 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(i - m) / static_cast<double>(m + 1)));
        h[i] = s * w;
    }
    h /= h.sum();
    return h;
}

Eigen::ArrayXd bandpass_kernel(double lo_hz, double hi_hz, double sample_rate_hz, int taps) {
    if (!(lo_hz < hi_hz)) fail("InvalidConfig", "band edges must satisfy lo < hi");
    return lowpass_kernel(hi_hz, sample_rate_hz, taps) - lowpass_kernel(lo_hz, sample_rate_hz, taps);
}

Eigen::ArrayXd convolve_centered(const Eigen::ArrayXd& x, const Eigen::ArrayXd& kernel) {
    const Eigen::Index n = x.size();
    const Eigen::Index k = kernel.size();
    if (k % 2 == 0) fail("InvalidConfig", "centered convolution needs an odd kernel");
    const Eigen::Index m = (k - 1) / 2;
    Eigen::ArrayXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j_lo = std::max<Eigen::Index>(0, i - m);
        const Eigen::Index j_hi = std::min<Eigen::Index>(n - 1, i + m);
        // kernel index for x[j] is (m + i - j); reversed segment keeps it a dot product
        const Eigen::Index len = j_hi - j_lo + 1;
        out[i] = (x.segment(j_lo, len) * kernel.segment(m + i - j_hi, len).reverse()).sum();
    }
    return out;
}

}  // namespace swd::spectral
