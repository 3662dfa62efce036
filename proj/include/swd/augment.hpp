#pragma once

#include <Eigen/Dense>

#include "swd/common.hpp"

namespace swd {

/// Stochastic training-time augmentation settings. Probabilities select
/// whether each operator fires; draws come from the caller-supplied stream.
struct AugmentConfig {
    double p_scale = 0.5;
    double scale_min = 0.5;
    double scale_max = 2.0;
    double p_noise = 0.5;
    /// Upper bound on the noise sigma as a fraction of the input's amplitude range.
    double noise_level_max = 0.005;
    double p_invert = 0.2;
    uint64_t rng_seed = 0;

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(p_scale) || !prob(p_noise) || !prob(p_invert))
            fail("InvalidConfig", "augmentation probabilities must lie in [0, 1]");
        if (scale_min > scale_max) fail("InvalidConfig", "scale_min must be <= scale_max");
        if (noise_level_max < 0.0) fail("InvalidConfig", "noise_level_max must be >= 0");
    }
};

template <typename Scalar>
Eigen::ArrayX<Scalar> apply_scale(const Eigen::ArrayX<Scalar>& x, Scalar alpha) {
    if (!(alpha > Scalar(0))) fail("InvalidConfig", "scale factor must be positive");
    return alpha * x;
}

template <typename Scalar>
Eigen::ArrayX<Scalar> apply_noise(const Eigen::ArrayX<Scalar>& x, Scalar sigma, Rng& rng) {
    if (sigma < Scalar(0)) fail("InvalidConfig", "noise sigma must be >= 0");
    Eigen::ArrayX<Scalar> out = x;
    if (sigma == Scalar(0)) return out;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] += static_cast<Scalar>(rng.normal(0.0, static_cast<double>(sigma)));
    return out;
}

template <typename Scalar>
Eigen::ArrayX<Scalar> apply_invert(const Eigen::ArrayX<Scalar>& x) {
    return -x;
}

/// Fixed operator order scale -> noise -> invert, each firing independently
/// with its configured probability. The noise sigma is drawn uniformly from
/// [0, noise_level_max * range(x)] with range taken on the pipeline input.
template <typename Scalar>
Eigen::ArrayX<Scalar> apply_pipeline(const Eigen::ArrayX<Scalar>& x, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    Eigen::ArrayX<Scalar> out = x;
    const double input_range =
        x.size() > 0 ? static_cast<double>(x.maxCoeff()) - static_cast<double>(x.minCoeff()) : 0.0;

    if (rng.uniform() < cfg.p_scale) {
        const auto alpha = static_cast<Scalar>(rng.uniform(cfg.scale_min, cfg.scale_max));
        out = apply_scale(out, alpha);
    }
    if (rng.uniform() < cfg.p_noise) {
        const auto sigma = static_cast<Scalar>(rng.uniform(0.0, cfg.noise_level_max * input_range));
        out = apply_noise(out, sigma, rng);
    }
    if (rng.uniform() < cfg.p_invert) {
        out = apply_invert(out);
    }
    return out;
}

}  // namespace swd
