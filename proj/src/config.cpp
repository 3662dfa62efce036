#include "swd/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace swd {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail("InvalidConfig", where + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            fail("InvalidConfig", "unknown key '" + it.key() + "' in " + where);
    }
}

double get_num(const json& obj, const std::string& where, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail("InvalidConfig", where + "." + key + " must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& where, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) fail("InvalidConfig", where + "." + key + " must be an integer");
    return obj[key].get<int>();
}

bool get_bool(const json& obj, const std::string& where, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail("InvalidConfig", where + "." + key + " must be a boolean");
    return obj[key].get<bool>();
}

std::string get_str(const json& obj, const std::string& where, const std::string& key,
                    const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) fail("InvalidConfig", where + "." + key + " must be a string");
    return obj[key].get<std::string>();
}

AugmentConfig augment_from_json(const json& j, const std::string& where) {
    expect_keys(j, where, {"p_scale", "scale_min", "scale_max", "p_noise", "noise_level_max", "p_invert"});
    AugmentConfig a;
    a.p_scale = get_num(j, where, "p_scale", a.p_scale);
    a.scale_min = get_num(j, where, "scale_min", a.scale_min);
    a.scale_max = get_num(j, where, "scale_max", a.scale_max);
    a.p_noise = get_num(j, where, "p_noise", a.p_noise);
    a.noise_level_max = get_num(j, where, "noise_level_max", a.noise_level_max);
    a.p_invert = get_num(j, where, "p_invert", a.p_invert);
    return a;
}

TrainConfig train_from_json(const json& j, const std::string& where) {
    expect_keys(j, where,
                {"lr_max", "max_epochs", "batch_size", "warmup_steps", "cycle_steps", "lr_min", "gamma",
                 "patience_epochs", "val_fraction", "adam_beta1", "adam_beta2", "adam_eps", "train_fraction",
                 "augment"});
    TrainConfig t;
    t.lr_max = get_num(j, where, "lr_max", t.lr_max);
    t.max_epochs = get_int(j, where, "max_epochs", t.max_epochs);
    t.batch_size = get_int(j, where, "batch_size", t.batch_size);
    t.warmup_steps = get_int(j, where, "warmup_steps", t.warmup_steps);
    t.cycle_steps = get_int(j, where, "cycle_steps", t.cycle_steps);
    t.lr_min = get_num(j, where, "lr_min", t.lr_min);
    t.gamma = get_num(j, where, "gamma", t.gamma);
    t.patience_epochs = get_int(j, where, "patience_epochs", t.patience_epochs);
    t.val_fraction = get_num(j, where, "val_fraction", t.val_fraction);
    t.adam_beta1 = get_num(j, where, "adam_beta1", t.adam_beta1);
    t.adam_beta2 = get_num(j, where, "adam_beta2", t.adam_beta2);
    t.adam_eps = get_num(j, where, "adam_eps", t.adam_eps);
    t.train_fraction = get_num(j, where, "train_fraction", t.train_fraction);
    if (j.contains("augment")) t.augment = augment_from_json(j["augment"], where + ".augment");
    return t;
}

SynthConfig synth_from_json(const json& j, const std::string& where) {
    expect_keys(j, where,
                {"duration_s", "rate_hz", "swd_rate_per_hour", "swd_duration_mean_s", "swd_duration_sd_s",
                 "swd_duration_floor_s", "swd_peak_hz_mean", "swd_peak_hz_sd", "swd_amplitude_ratio",
                 "sleep_fraction", "noise_events_per_hour", "subject_id"});
    SynthConfig s;
    s.duration_s = get_num(j, where, "duration_s", s.duration_s);
    s.rate_hz = get_num(j, where, "rate_hz", s.rate_hz);
    s.swd_rate_per_hour = get_num(j, where, "swd_rate_per_hour", s.swd_rate_per_hour);
    s.swd_duration_mean_s = get_num(j, where, "swd_duration_mean_s", s.swd_duration_mean_s);
    s.swd_duration_sd_s = get_num(j, where, "swd_duration_sd_s", s.swd_duration_sd_s);
    s.swd_duration_floor_s = get_num(j, where, "swd_duration_floor_s", s.swd_duration_floor_s);
    s.swd_peak_hz_mean = get_num(j, where, "swd_peak_hz_mean", s.swd_peak_hz_mean);
    s.swd_peak_hz_sd = get_num(j, where, "swd_peak_hz_sd", s.swd_peak_hz_sd);
    s.swd_amplitude_ratio = get_num(j, where, "swd_amplitude_ratio", s.swd_amplitude_ratio);
    s.sleep_fraction = get_num(j, where, "sleep_fraction", s.sleep_fraction);
    s.noise_events_per_hour = get_num(j, where, "noise_events_per_hour", s.noise_events_per_hour);
    s.subject_id = get_str(j, where, "subject_id", s.subject_id);
    return s;
}

}  // namespace

void PipelineConfig::validate() const {
    if (epoch_seconds <= 0.0) fail("InvalidConfig", "epoch_seconds must be positive");
    if (target_rate_hz <= 0.0) fail("InvalidConfig", "target_rate_hz must be positive");
    if (resample_half_width < 1) fail("InvalidConfig", "resample_half_width must be >= 1");
    model.validate();
    train.validate();
    synth.validate();
    if (postprocess.threshold < 0.0 || postprocess.threshold > 1.0)
        fail("InvalidConfig", "postprocess.threshold must lie in [0, 1]");
    if (postprocess.min_duration_s < 0.0 || postprocess.merge_gap_s < 0.0)
        fail("InvalidConfig", "postprocess durations must be >= 0");
    if (states.noise_block_s <= 0.0 || states.noise_k_sd <= 0.0)
        fail("InvalidConfig", "noise detector parameters must be positive");
    if (!(states.sleep.band_lo_hz < states.sleep.band_hi_hz))
        fail("InvalidConfig", "sleep band edges must satisfy lo < hi");
    const auto expected_len =
        static_cast<int>(std::llround(epoch_seconds * target_rate_hz));
    if (model.input_length != expected_len)
        fail("InvalidConfig", "model.input_length must equal epoch_seconds * target_rate_hz");
}

PipelineConfig default_pipeline_config() {
    PipelineConfig cfg;
    cfg.propagate_seed();
    return cfg;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    expect_keys(j, "config",
                {"schema_version", "seed", "epoch_seconds", "resample", "model", "train", "postprocess",
                 "states", "synth"});
    PipelineConfig cfg;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) fail("InvalidConfig", "seed must be an integer");
        cfg.seed = j["seed"].get<uint64_t>();
    }
    cfg.epoch_seconds = get_num(j, "config", "epoch_seconds", cfg.epoch_seconds);
    if (j.contains("resample")) {
        const auto& r = j["resample"];
        expect_keys(r, "resample", {"target_rate_hz", "kernel_half_width"});
        cfg.target_rate_hz = get_num(r, "resample", "target_rate_hz", cfg.target_rate_hz);
        cfg.resample_half_width = get_int(r, "resample", "kernel_half_width", cfg.resample_half_width);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        expect_keys(m, "model",
                    {"depth", "base_channels", "kernel_size", "convs_per_block", "batchnorm", "input_length"});
        cfg.model = unet_config_from_json(m);
    }
    if (j.contains("train")) cfg.train = train_from_json(j["train"], "train");
    if (j.contains("postprocess")) {
        const auto& p = j["postprocess"];
        expect_keys(p, "postprocess", {"threshold", "min_duration_s", "merge_gap_s"});
        cfg.postprocess.threshold = get_num(p, "postprocess", "threshold", cfg.postprocess.threshold);
        cfg.postprocess.min_duration_s = get_num(p, "postprocess", "min_duration_s", cfg.postprocess.min_duration_s);
        cfg.postprocess.merge_gap_s = get_num(p, "postprocess", "merge_gap_s", cfg.postprocess.merge_gap_s);
    }
    if (j.contains("states")) {
        const auto& s = j["states"];
        expect_keys(s, "states",
                    {"noise_block_s", "noise_k_sd", "sleep_band_lo_hz", "sleep_band_hi_hz", "sleep_fir_seconds",
                     "sleep_merge_gap_s"});
        cfg.states.noise_block_s = get_num(s, "states", "noise_block_s", cfg.states.noise_block_s);
        cfg.states.noise_k_sd = get_num(s, "states", "noise_k_sd", cfg.states.noise_k_sd);
        cfg.states.sleep.band_lo_hz = get_num(s, "states", "sleep_band_lo_hz", cfg.states.sleep.band_lo_hz);
        cfg.states.sleep.band_hi_hz = get_num(s, "states", "sleep_band_hi_hz", cfg.states.sleep.band_hi_hz);
        cfg.states.sleep.fir_seconds = get_num(s, "states", "sleep_fir_seconds", cfg.states.sleep.fir_seconds);
        cfg.states.sleep.merge_gap_s = get_num(s, "states", "sleep_merge_gap_s", cfg.states.sleep.merge_gap_s);
    }
    if (j.contains("synth")) cfg.synth = synth_from_json(j["synth"], "synth");
    cfg.propagate_seed();
    cfg.validate();
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("IoError", "cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail("InvalidConfig", std::string("config parse error: ") + e.what());
    }
    return pipeline_config_from_json(j);
}

nlohmann::json augment_config_to_json(const AugmentConfig& a) {
    return json{{"p_scale", a.p_scale},       {"scale_min", a.scale_min},
                {"scale_max", a.scale_max},   {"p_noise", a.p_noise},
                {"noise_level_max", a.noise_level_max}, {"p_invert", a.p_invert}};
}

nlohmann::json train_config_to_json(const TrainConfig& t) {
    return json{{"lr_max", t.lr_max},
                {"max_epochs", t.max_epochs},
                {"batch_size", t.batch_size},
                {"warmup_steps", t.warmup_steps},
                {"cycle_steps", t.cycle_steps},
                {"lr_min", t.lr_min},
                {"gamma", t.gamma},
                {"patience_epochs", t.patience_epochs},
                {"val_fraction", t.val_fraction},
                {"adam_beta1", t.adam_beta1},
                {"adam_beta2", t.adam_beta2},
                {"adam_eps", t.adam_eps},
                {"train_fraction", t.train_fraction},
                {"augment", augment_config_to_json(t.augment)}};
}

nlohmann::json synth_config_to_json(const SynthConfig& s) {
    return json{{"duration_s", s.duration_s},
                {"rate_hz", s.rate_hz},
                {"swd_rate_per_hour", s.swd_rate_per_hour},
                {"swd_duration_mean_s", s.swd_duration_mean_s},
                {"swd_duration_sd_s", s.swd_duration_sd_s},
                {"swd_duration_floor_s", s.swd_duration_floor_s},
                {"swd_peak_hz_mean", s.swd_peak_hz_mean},
                {"swd_peak_hz_sd", s.swd_peak_hz_sd},
                {"swd_amplitude_ratio", s.swd_amplitude_ratio},
                {"sleep_fraction", s.sleep_fraction},
                {"noise_events_per_hour", s.noise_events_per_hour},
                {"subject_id", s.subject_id}};
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["seed"] = cfg.seed;
    j["epoch_seconds"] = cfg.epoch_seconds;
    j["resample"] = json{{"target_rate_hz", cfg.target_rate_hz}, {"kernel_half_width", cfg.resample_half_width}};
    j["model"] = unet_config_to_json(cfg.model);
    j["train"] = train_config_to_json(cfg.train);
    j["postprocess"] = json{{"threshold", cfg.postprocess.threshold},
                            {"min_duration_s", cfg.postprocess.min_duration_s},
                            {"merge_gap_s", cfg.postprocess.merge_gap_s}};
    j["states"] = json{{"noise_block_s", cfg.states.noise_block_s},
                       {"noise_k_sd", cfg.states.noise_k_sd},
                       {"sleep_band_lo_hz", cfg.states.sleep.band_lo_hz},
                       {"sleep_band_hi_hz", cfg.states.sleep.band_hi_hz},
                       {"sleep_fir_seconds", cfg.states.sleep.fir_seconds},
                       {"sleep_merge_gap_s", cfg.states.sleep.merge_gap_s}};
    j["synth"] = synth_config_to_json(cfg.synth);
    return j;
}

}  // namespace swd
