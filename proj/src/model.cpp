#include "swd/model.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace swd {

namespace detail {

std::vector<BlockSpec> block_layout(const UNetConfig& cfg) {
    std::vector<BlockSpec> layout;
    int in_ch = 1;
    for (int i = 0; i < cfg.depth; ++i) {
        const int out_ch = cfg.base_channels << i;
        layout.push_back({"enc" + std::to_string(i), in_ch, out_ch});
        in_ch = out_ch;
    }
    layout.push_back({"bottleneck", in_ch, cfg.base_channels << cfg.depth});
    int above_ch = cfg.base_channels << cfg.depth;
    for (int i = cfg.depth - 1; i >= 0; --i) {
        const int skip_ch = cfg.base_channels << i;
        layout.push_back({"dec" + std::to_string(i), above_ch + skip_ch, skip_ch});
        above_ch = skip_ch;
    }
    return layout;
}

}  // namespace detail

BinaryMask predict_mask(const Eigen::ArrayXf& probs, double sample_rate_hz, double threshold) {
    BinaryMask mask;
    mask.sample_rate_hz = sample_rate_hz;
    mask.values.resize(static_cast<std::size_t>(probs.size()));
    for (Eigen::Index i = 0; i < probs.size(); ++i)
        mask.values[static_cast<std::size_t>(i)] = probs[i] >= static_cast<float>(threshold) ? 1 : 0;
    return mask;
}

nlohmann::json unet_config_to_json(const UNetConfig& cfg) {
    return nlohmann::json{{"depth", cfg.depth},
                          {"base_channels", cfg.base_channels},
                          {"kernel_size", cfg.kernel_size},
                          {"convs_per_block", cfg.convs_per_block},
                          {"batchnorm", cfg.batchnorm},
                          {"input_length", cfg.input_length}};
}

UNetConfig unet_config_from_json(const nlohmann::json& j) {
    UNetConfig cfg;
    cfg.depth = j.value("depth", cfg.depth);
    cfg.base_channels = j.value("base_channels", cfg.base_channels);
    cfg.kernel_size = j.value("kernel_size", cfg.kernel_size);
    cfg.convs_per_block = j.value("convs_per_block", cfg.convs_per_block);
    cfg.batchnorm = j.value("batchnorm", cfg.batchnorm);
    cfg.input_length = j.value("input_length", cfg.input_length);
    cfg.validate();
    return cfg;
}

void save_checkpoint(const std::string& dir, const ModelParams<float>& params, const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    const std::string blob_path = dir + "/params.f32";
    std::ofstream blob(blob_path, std::ios::binary);
    if (!blob) fail("IoError", "cannot write '" + blob_path + "'");

    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["config"] = unet_config_to_json(params.config);
    manifest["params_file"] = "params.f32";
    nlohmann::json entries = nlohmann::json::array();
    Eigen::Index offset = 0;
    for (const auto& e : params.entries) {
        blob.write(reinterpret_cast<const char*>(e.data.data()),
                   static_cast<std::streamsize>(e.data.size() * sizeof(float)));
        entries.push_back({{"name", e.name},
                           {"shape", {e.shape.b, e.shape.c, e.shape.l}},
                           {"trainable", e.trainable},
                           {"offset", offset},
                           {"count", e.data.size()}});
        offset += e.data.size();
    }
    manifest["entries"] = entries;
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();

    std::ofstream mf(dir + "/manifest.json");
    if (!mf) fail("IoError", "cannot write '" + dir + "/manifest.json'");
    mf << manifest.dump(2) << "\n";
}

ModelParams<float> load_checkpoint(const std::string& dir, nlohmann::json* manifest_out) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) fail("IoError", "cannot open '" + dir + "/manifest.json'");
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const std::exception& e) {
        fail("MalformedHeader", std::string("manifest: ") + e.what());
    }
    const UNetConfig cfg = unet_config_from_json(manifest.at("config"));

    // rebuild the canonical layout and verify the manifest matches it
    Rng dummy(0);
    ModelParams<float> params = init_params<float>(cfg, dummy);
    const auto& entries = manifest.at("entries");
    if (entries.size() != params.entries.size())
        fail("MalformedHeader", "checkpoint entry list does not match the configured architecture");
    for (std::size_t i = 0; i < params.entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.at("name").get<std::string>() != params.entries[i].name)
            fail("MalformedHeader", "checkpoint entry order mismatch at '" + params.entries[i].name + "'");
        if (e.at("count").get<Eigen::Index>() != params.entries[i].data.size())
            fail("MalformedHeader", "checkpoint entry size mismatch at '" + params.entries[i].name + "'");
    }

    const std::string blob_path = dir + "/" + manifest.value("params_file", std::string("params.f32"));
    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) fail("IoError", "cannot open '" + blob_path + "'");
    for (auto& e : params.entries) {
        blob.read(reinterpret_cast<char*>(e.data.data()),
                  static_cast<std::streamsize>(e.data.size() * sizeof(float)));
        if (!blob) fail("MalformedHeader", "checkpoint blob shorter than the manifest promises");
        if (!e.data.allFinite()) fail("MalformedSample", "non-finite parameter in '" + e.name + "'");
    }
    if (manifest_out) *manifest_out = manifest;
    return params;
}

}  // namespace swd
