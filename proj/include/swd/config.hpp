#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "swd/model.hpp"
#include "swd/states.hpp"
#include "swd/synth.hpp"
#include "swd/training.hpp"

namespace swd {

struct PostprocessConfig {
    double threshold = 0.5;
    double min_duration_s = 0.5;
    double merge_gap_s = 0.2;
};

struct StatesConfig {
    double noise_block_s = 5.0;
    double noise_k_sd = 20.0;
    SleepParams sleep;
};

/// Composite configuration for the CLI. The top-level seed is the single
/// source of randomness: it is propagated into the training, augmentation
/// and synthesis sub-configs.
struct PipelineConfig {
    uint64_t seed = 0;
    double epoch_seconds = 20.0;
    double target_rate_hz = 100.0;
    int resample_half_width = 32;
    UNetConfig model;
    TrainConfig train;
    PostprocessConfig postprocess;
    StatesConfig states;
    SynthConfig synth;

    void propagate_seed() {
        train.seed = seed;
        train.augment.rng_seed = seed;
        synth.seed = seed;
    }
    void validate() const;
};

PipelineConfig default_pipeline_config();

/// Parses and strictly validates a config file: unknown keys and wrong types
/// are errors, and every invariant is checked before any command runs.
PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
nlohmann::json augment_config_to_json(const AugmentConfig& cfg);
nlohmann::json synth_config_to_json(const SynthConfig& cfg);

}  // namespace swd
