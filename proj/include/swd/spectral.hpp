#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace swd::spectral {

std::vector<std::complex<double>> fft(const Eigen::ArrayXd& x);
Eigen::ArrayXd ifft_real(const std::vector<std::complex<double>>& spectrum);

/// Magnitude of the analytic signal, computed over the whole input by the
/// frequency-domain method.
Eigen::ArrayXd hilbert_envelope(const Eigen::ArrayXd& x);

struct Psd {
    Eigen::ArrayXd freq_hz;
    Eigen::ArrayXd power;
};

/// Welch estimate: Hann windows of `window_s` seconds, 50% overlap, per-segment
/// mean removal. Requires at least one full window of samples.
Psd welch_psd(const Eigen::ArrayXd& x, double sample_rate_hz, double window_s = 1.0);

/// Frequency of maximum Welch power within [band_lo_hz, band_hi_hz].
double peak_frequency_hz(const Eigen::ArrayXd& x, double sample_rate_hz,
                         double band_lo_hz, double band_hi_hz);

/// Hann-windowed sinc low-pass, `taps` odd, normalized to unit DC gain.
Eigen::ArrayXd lowpass_kernel(double cutoff_hz, double sample_rate_hz, int taps);

/// Band-pass as the difference of two unit-DC low-passes (zero DC gain).
Eigen::ArrayXd bandpass_kernel(double lo_hz, double hi_hz, double sample_rate_hz, int taps);

/// Zero-phase FIR application: centered convolution with zero-padded edges.
/// Kernel length must be odd.
Eigen::ArrayXd convolve_centered(const Eigen::ArrayXd& x, const Eigen::ArrayXd& kernel);

}  // namespace swd::spectral
