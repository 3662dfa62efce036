#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "swd/autodiff.hpp"
#include "swd/signal.hpp"

namespace swd {

/// Architecture hyperparameters. input_length must be divisible by 2^depth.
struct UNetConfig {
    int depth = 4;
    int base_channels = 16;
    int kernel_size = 7;
    int convs_per_block = 2;
    bool batchnorm = true;
    int input_length = 2000;

    void validate() const {
        if (depth < 1) fail("InvalidConfig", "depth must be >= 1");
        if (base_channels < 1) fail("InvalidConfig", "base_channels must be >= 1");
        if (kernel_size < 1 || kernel_size % 2 == 0) fail("InvalidConfig", "kernel_size must be odd");
        if (convs_per_block < 1) fail("InvalidConfig", "convs_per_block must be >= 1");
        if (input_length < (1 << depth) || input_length % (1 << depth) != 0)
            fail("InvalidConfig", "input_length must be divisible by 2^depth");
    }

    bool operator==(const UNetConfig&) const = default;
};

template <typename Scalar>
struct ParamEntry {
    std::string name;
    ad::Shape shape;
    ad::ArrayX<Scalar> data;
    bool trainable = true;
};

/// All weights, biases, norm parameters and running statistics in canonical
/// order (the checkpoint blob order).
template <typename Scalar>
struct ModelParams {
    UNetConfig config;
    std::vector<ParamEntry<Scalar>> entries;

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].name == name) return static_cast<int>(i);
        fail("InvalidConfig", "unknown parameter '" + name + "'");
    }

    ParamEntry<Scalar>& at(const std::string& name) { return entries[static_cast<std::size_t>(index_of(name))]; }
    const ParamEntry<Scalar>& at(const std::string& name) const {
        return entries[static_cast<std::size_t>(index_of(name))];
    }

    Eigen::Index param_count(bool trainable_only = true) const {
        Eigen::Index n = 0;
        for (const auto& e : entries)
            if (!trainable_only || e.trainable) n += e.data.size();
        return n;
    }
};

namespace detail {

struct BlockSpec {
    std::string prefix;
    int in_ch = 0;
    int out_ch = 0;
};

/// Encoder blocks, bottleneck, then decoder blocks (deepest first), mirroring
/// the forward pass and the canonical parameter order.
std::vector<BlockSpec> block_layout(const UNetConfig& cfg);

}  // namespace detail

/// Conv weights ~ N(0, 2/fan_in), biases zero, norm scale 1 / shift 0,
/// running stats (0, 1). Same seed gives bit-identical parameters.
template <typename Scalar>
ModelParams<Scalar> init_params(const UNetConfig& cfg, Rng& rng);

/// Tape leaves for each trainable entry, index-aligned with params.entries
/// (id -1 marks running statistics, which stay outside the tape).
template <typename Scalar>
struct BoundParams {
    std::vector<ad::Var<Scalar>> vars;
};

template <typename Scalar>
BoundParams<Scalar> bind_params(ad::Tape<Scalar>& tape, const ModelParams<Scalar>& params);

/// Runs the network on x of shape (B, 1, input_length), returning per-sample
/// probabilities of the same shape. Train mode updates running statistics in
/// `params` (single writer); eval mode leaves them untouched.
template <typename Scalar>
ad::Var<Scalar> unet_forward(ad::Tape<Scalar>& tape, ModelParams<Scalar>& params,
                             const BoundParams<Scalar>& bound, ad::Var<Scalar> x, ad::Mode mode);

/// Convenience wrapper binding parameters internally.
template <typename Scalar>
ad::Var<Scalar> unet_forward(ad::Tape<Scalar>& tape, ModelParams<Scalar>& params, ad::Var<Scalar> x,
                             ad::Mode mode, BoundParams<Scalar>* bound_out = nullptr);

/// Thresholds probabilities into a per-sample mask (1 where p >= threshold).
BinaryMask predict_mask(const Eigen::ArrayXf& probs, double sample_rate_hz, double threshold = 0.5);

/// Streaming accumulator for a Dice loss over many batches.
struct DiceAccumulator {
    double sum_pg = 0.0;
    double sum_p = 0.0;
    double sum_g = 0.0;

    void add(const Eigen::ArrayXf& probs, const Eigen::ArrayXf& targets) {
        sum_pg += (probs.cast<double>() * targets.cast<double>()).sum();
        sum_p += probs.cast<double>().sum();
        sum_g += targets.cast<double>().sum();
    }
    double loss(double smooth = 1.0) const {
        return 1.0 - (2.0 * sum_pg + smooth) / (sum_p + sum_g + smooth);
    }
};

/// Checkpoint = JSON manifest + little-endian float32 blob in canonical
/// parameter order, stored as <dir>/manifest.json and <dir>/params.f32.
void save_checkpoint(const std::string& dir, const ModelParams<float>& params,
                     const nlohmann::json& extra);
ModelParams<float> load_checkpoint(const std::string& dir, nlohmann::json* manifest_out = nullptr);

nlohmann::json unet_config_to_json(const UNetConfig& cfg);
UNetConfig unet_config_from_json(const nlohmann::json& j);

// ---- template implementation ----

template <typename Scalar>
ModelParams<Scalar> init_params(const UNetConfig& cfg, Rng& rng) {
    cfg.validate();
    ModelParams<Scalar> params;
    params.config = cfg;

    auto add_entry = [&](const std::string& name, ad::Shape shape, bool trainable) -> ParamEntry<Scalar>& {
        params.entries.push_back(ParamEntry<Scalar>{name, shape, ad::ArrayX<Scalar>(shape.size()), trainable});
        return params.entries.back();
    };
    auto add_conv = [&](const std::string& prefix, int in_ch, int out_ch, int k) {
        auto& w = add_entry(prefix + ".w", ad::Shape{out_ch, in_ch, k}, true);
        const double std_dev = std::sqrt(2.0 / (static_cast<double>(in_ch) * k));
        for (Eigen::Index i = 0; i < w.data.size(); ++i) w.data[i] = static_cast<Scalar>(rng.normal(0.0, std_dev));
        auto& b = add_entry(prefix + ".b", ad::Shape{out_ch, 1, 1}, true);
        b.data.setZero();
    };
    auto add_norm = [&](const std::string& prefix, int ch) {
        add_entry(prefix + ".gamma", ad::Shape{1, ch, 1}, true).data.setOnes();
        add_entry(prefix + ".beta", ad::Shape{1, ch, 1}, true).data.setZero();
        add_entry(prefix + ".running_mean", ad::Shape{1, ch, 1}, false).data.setZero();
        add_entry(prefix + ".running_var", ad::Shape{1, ch, 1}, false).data.setOnes();
    };

    for (const auto& block : detail::block_layout(cfg)) {
        int in_ch = block.in_ch;
        for (int j = 0; j < cfg.convs_per_block; ++j) {
            const std::string conv = block.prefix + ".conv" + std::to_string(j);
            add_conv(conv, in_ch, block.out_ch, cfg.kernel_size);
            if (cfg.batchnorm) add_norm(block.prefix + ".norm" + std::to_string(j), block.out_ch);
            in_ch = block.out_ch;
        }
        if (block.in_ch != block.out_ch) add_conv(block.prefix + ".shortcut", block.in_ch, block.out_ch, 1);
    }
    add_conv("head", cfg.base_channels, 1, 1);
    return params;
}

template <typename Scalar>
BoundParams<Scalar> bind_params(ad::Tape<Scalar>& tape, const ModelParams<Scalar>& params) {
    BoundParams<Scalar> bound;
    bound.vars.reserve(params.entries.size());
    for (const auto& e : params.entries) {
        if (e.trainable) {
            bound.vars.push_back(ad::leaf(tape, e.shape, e.data));
        } else {
            bound.vars.push_back(ad::Var<Scalar>{&tape, -1});
        }
    }
    return bound;
}

template <typename Scalar>
ad::Var<Scalar> unet_forward(ad::Tape<Scalar>& tape, ModelParams<Scalar>& params,
                             const BoundParams<Scalar>& bound, ad::Var<Scalar> x, ad::Mode mode) {
    const UNetConfig& cfg = params.config;
    cfg.validate();
    const ad::Shape xs = x.shape();
    if (xs.c != 1) fail("ShapeMismatch", "unet_forward: expected a single input channel");
    if (xs.l != cfg.input_length)
        fail("ShapeMismatch", "unet_forward: input length does not match the configured input_length");

    auto var_of = [&](const std::string& name) -> ad::Var<Scalar> {
        return bound.vars[static_cast<std::size_t>(params.index_of(name))];
    };
    auto res_block = [&](const std::string& prefix, int in_ch, int out_ch, ad::Var<Scalar> h) {
        ad::Var<Scalar> main = h;
        for (int j = 0; j < cfg.convs_per_block; ++j) {
            const std::string idx = std::to_string(j);
            main = ad::conv1d(main, var_of(prefix + ".conv" + idx + ".w"), var_of(prefix + ".conv" + idx + ".b"));
            if (cfg.batchnorm) {
                const std::string norm = prefix + ".norm" + idx;
                ad::RunningStats<Scalar> rs{&params.at(norm + ".running_mean").data,
                                            &params.at(norm + ".running_var").data};
                main = ad::batchnorm1d(main, var_of(norm + ".gamma"), var_of(norm + ".beta"), rs, mode);
            }
            main = ad::relu(main);
        }
        ad::Var<Scalar> shortcut = h;
        if (in_ch != out_ch)
            shortcut = ad::conv1d(h, var_of(prefix + ".shortcut.w"), var_of(prefix + ".shortcut.b"));
        return ad::add(main, shortcut);
    };

    const auto layout = detail::block_layout(cfg);
    std::vector<ad::Var<Scalar>> skips;
    ad::Var<Scalar> h = x;
    for (int i = 0; i < cfg.depth; ++i) {
        const auto& blk = layout[static_cast<std::size_t>(i)];
        h = res_block(blk.prefix, blk.in_ch, blk.out_ch, h);
        skips.push_back(h);
        h = ad::maxpool1d_2(h);
    }
    const auto& mid = layout[static_cast<std::size_t>(cfg.depth)];
    h = res_block(mid.prefix, mid.in_ch, mid.out_ch, h);
    for (int i = cfg.depth - 1; i >= 0; --i) {
        const auto& blk = layout[static_cast<std::size_t>(cfg.depth + 1 + (cfg.depth - 1 - i))];
        h = ad::nearest_upsample_2(h);
        h = ad::concat_channels(h, skips[static_cast<std::size_t>(i)]);
        h = res_block(blk.prefix, blk.in_ch, blk.out_ch, h);
    }
    h = ad::conv1d(h, var_of("head.w"), var_of("head.b"));
    return ad::sigmoid(h);
}

template <typename Scalar>
ad::Var<Scalar> unet_forward(ad::Tape<Scalar>& tape, ModelParams<Scalar>& params, ad::Var<Scalar> x,
                             ad::Mode mode, BoundParams<Scalar>* bound_out) {
    BoundParams<Scalar> bound = bind_params(tape, params);
    ad::Var<Scalar> probs = unet_forward(tape, params, bound, x, mode);
    if (bound_out) *bound_out = std::move(bound);
    return probs;
}

}  // namespace swd
