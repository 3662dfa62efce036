// Command-line front end: synthesis, preprocessing, training, prediction,
// scoring, state classification, ablation sweeps and trace rendering.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "swd/config.hpp"
#include "swd/metrics.hpp"
#include "swd/model.hpp"
#include "swd/preprocess.hpp"
#include "swd/signal.hpp"
#include "swd/states.hpp"
#include "swd/synth.hpp"
#include "swd/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) swd::fail("IoError", "cannot write '" + path + "'");
    out << text;
}

// ---- corpus handling -------------------------------------------------------

struct CorpusSubject {
    std::string stem;
    std::string signal_path;
    std::string labels_path;
};

std::vector<CorpusSubject> list_corpus(const std::string& dir) {
    if (!fs::is_directory(dir)) swd::fail("IoError", "'" + dir + "' is not a directory");
    std::vector<CorpusSubject> subjects;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".f32") continue;
        CorpusSubject s;
        s.stem = entry.path().stem().string();
        s.signal_path = entry.path().string();
        s.labels_path = (entry.path().parent_path() / (s.stem + ".swd.csv")).string();
        if (!fs::exists(s.labels_path))
            swd::fail("IoError", "missing labels file '" + s.labels_path + "'");
        subjects.push_back(std::move(s));
    }
    if (subjects.empty()) swd::fail("EmptyDataset", "no .f32 recordings in '" + dir + "'");
    std::sort(subjects.begin(), subjects.end(),
              [](const CorpusSubject& a, const CorpusSubject& b) { return a.stem < b.stem; });
    return subjects;
}

// scale -> resample -> epochize, with targets rasterized on the output grid
std::vector<swd::EpochPair> preprocess_subject(const swd::Recording& rec, const swd::EventSet& labels,
                                               const swd::PipelineConfig& cfg) {
    swd::Recording scaled = swd::minmax_scale(rec);
    if (scaled.sample_rate_hz != cfg.target_rate_hz)
        scaled = swd::resample_to(scaled, cfg.target_rate_hz, cfg.resample_half_width);
    const swd::BinaryMask mask =
        swd::events_to_mask(labels.filtered("SWD"), scaled.samples.size(), scaled.sample_rate_hz);
    return swd::epochize(scaled, mask, cfg.epoch_seconds);
}

std::vector<swd::SubjectSegments> load_corpus(const std::string& dir, const swd::PipelineConfig& cfg) {
    std::vector<swd::SubjectSegments> out;
    for (const auto& subject : list_corpus(dir)) {
        swd::Recording rec = swd::load_signal(subject.signal_path);
        if (rec.subject_id.empty()) rec.subject_id = subject.stem;
        swd::EventSet labels = swd::load_labels(subject.labels_path);
        out.push_back({rec.subject_id, preprocess_subject(rec, labels, cfg)});
    }
    return out;
}

// ---- prediction pipeline ---------------------------------------------------

Eigen::ArrayXf probs_for_recording(swd::ModelParams<float>& params, const swd::Recording& rec,
                                   const swd::PipelineConfig& cfg) {
    swd::Recording scaled = swd::minmax_scale(rec);
    if (scaled.sample_rate_hz != cfg.target_rate_hz)
        scaled = swd::resample_to(scaled, cfg.target_rate_hz, cfg.resample_half_width);
    const auto n = scaled.samples.size();
    const int length = params.config.input_length;
    if (n < length) swd::fail("InputTooShort", "recording shorter than one model window");

    // non-overlapping windows; the final partial window is zero-padded and
    // its padded region discarded
    const auto n_windows = (n + length - 1) / length;
    std::vector<swd::EpochPair> windows(static_cast<std::size_t>(n_windows));
    for (Eigen::Index w = 0; w < n_windows; ++w) {
        Eigen::ArrayXf sig = Eigen::ArrayXf::Zero(length);
        const Eigen::Index lo = w * length;
        const Eigen::Index len = std::min<Eigen::Index>(length, n - lo);
        sig.head(len) = scaled.samples.segment(lo, len).cast<float>();
        windows[static_cast<std::size_t>(w)].signal = std::move(sig);
    }
    Eigen::ArrayXf all = swd::predict_probs(params, windows);
    return all.head(n);
}

swd::EventSet predict_events(swd::ModelParams<float>& params, const swd::Recording& rec,
                             const swd::PipelineConfig& cfg) {
    const Eigen::ArrayXf probs = probs_for_recording(params, rec, cfg);
    const swd::BinaryMask mask = swd::predict_mask(probs, cfg.target_rate_hz, cfg.postprocess.threshold);
    swd::EventSet events =
        swd::mask_to_events(mask, cfg.postprocess.min_duration_s, cfg.postprocess.merge_gap_s);
    return events;
}

// ---- report JSON -----------------------------------------------------------

json pointwise_to_json(const swd::PointwiseScore& s) {
    return json{{"tp", s.tp},       {"fp", s.fp},         {"fn", s.fn},
                {"tn", s.tn},       {"precision", s.precision}, {"recall", s.recall},
                {"f1", s.f1}};
}

json eventwise_to_json(const swd::EventScore& s) {
    return json{{"tp_pred", s.tp_pred},   {"fp_pred", s.fp_pred}, {"tp_truth", s.tp_truth},
                {"fn_truth", s.fn_truth}, {"precision", s.precision}, {"recall", s.recall},
                {"f1", s.f1}};
}

json summary_to_json(const swd::SummaryStat& s) {
    json j;
    j["n"] = s.n;
    if (s.mean) j["mean"] = *s.mean;
    if (s.sd) j["sd"] = *s.sd;
    return j;
}

json features_to_json(const swd::Recording& rec, const swd::EventSet& events) {
    const swd::EventFeatures f = swd::event_features(rec, events);
    std::vector<double> freqs;
    for (const auto& pf : f.peak_frequency_hz)
        if (pf) freqs.push_back(*pf);
    json j;
    j["n_events"] = events.size();
    j["rate_per_hour"] = f.rate_per_hour;
    j["duration_s"] = summary_to_json(swd::summarize(f.duration_s));
    j["peak_frequency_hz"] = summary_to_json(swd::summarize(freqs));
    return j;
}

json run_result_to_json(const swd::RunResult& result) {
    json j;
    j["schema_version"] = 1;
    j["train_loss"] = result.train_loss;
    j["val_loss"] = result.val_loss;
    j["best_epoch"] = result.best_epoch;
    j["best_val_loss"] = result.best_val_loss;
    j["total_steps"] = result.total_steps;
    j["wall_clock_s"] = result.wall_clock_s;
    json scores = json::array();
    for (const auto& s : result.test_scores)
        scores.push_back({{"subject_id", s.subject_id}, {"pointwise", pointwise_to_json(s.pointwise)}});
    j["test_scores"] = scores;
    return j;
}

// ---- SVG rendering ---------------------------------------------------------

std::string render_svg(const swd::Recording& rec, const std::vector<std::string>& label_paths,
                       double start_s, double window_s) {
    const double rate = rec.sample_rate_hz;
    const auto n = rec.samples.size();
    const double duration = rec.duration_s();
    start_s = std::clamp(start_s, 0.0, duration);
    const double end_s = std::min(duration, start_s + window_s);
    if (end_s <= start_s) swd::fail("InvalidInterval", "render window is empty");
    const auto lo = static_cast<Eigen::Index>(start_s * rate);
    const auto hi = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(end_s * rate)), n);

    const int width = 1000, trace_h = 240, band_h = 18, margin = 40;
    const int height = trace_h + 2 * margin + band_h * static_cast<int>(label_paths.size());
    const double vmin = rec.samples.segment(lo, hi - lo).minCoeff();
    const double vmax = rec.samples.segment(lo, hi - lo).maxCoeff();
    const double vspan = vmax > vmin ? vmax - vmin : 1.0;

    auto x_of = [&](double t) { return margin + (t - start_s) / (end_s - start_s) * (width - 2 * margin); };
    auto y_of = [&](double v) { return margin + (vmax - v) / vspan * trace_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
           std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
           std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    // min/max envelope per pixel column
    svg += "<path fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"0.8\" d=\"";
    const int cols = width - 2 * margin;
    for (int c = 0; c < cols; ++c) {
        const auto a = lo + static_cast<Eigen::Index>(static_cast<double>(c) / cols * static_cast<double>(hi - lo));
        auto b = lo + static_cast<Eigen::Index>(static_cast<double>(c + 1) / cols * static_cast<double>(hi - lo));
        b = std::max(b, a + 1);
        const double mn = rec.samples.segment(a, b - a).minCoeff();
        const double mx = rec.samples.segment(a, b - a).maxCoeff();
        svg += "M" + fmt(margin + c + 0.5, "%.1f") + " " + fmt(y_of(mx), "%.2f") + "L" +
               fmt(margin + c + 0.5, "%.1f") + " " + fmt(y_of(mn), "%.2f");
    }
    svg += "\"/>\n";

    // time axis ticks every 10 s
    svg += "<g font-family=\"monospace\" font-size=\"10\" fill=\"#333333\">\n";
    for (double t = std::ceil(start_s / 10.0) * 10.0; t <= end_s; t += 10.0) {
        svg += "<line x1=\"" + fmt(x_of(t), "%.2f") + "\" y1=\"" + std::to_string(margin + trace_h) +
               "\" x2=\"" + fmt(x_of(t), "%.2f") + "\" y2=\"" + std::to_string(margin + trace_h + 4) +
               "\" stroke=\"#333333\"/>\n";
        svg += "<text x=\"" + fmt(x_of(t), "%.2f") + "\" y=\"" + std::to_string(margin + trace_h + 14) +
               "\" text-anchor=\"middle\">" + fmt(t, "%.0f") + "s</text>\n";
    }
    svg += "</g>\n";

    const char* palette[] = {"#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    for (std::size_t i = 0; i < label_paths.size(); ++i) {
        const swd::EventSet events = swd::load_labels(label_paths[i]);
        const int band_y = margin + trace_h + 20 + band_h * static_cast<int>(i);
        const std::string color = palette[i % 4];
        for (const auto& iv : events.intervals()) {
            const double a = std::max(iv.start_s, start_s);
            const double b = std::min(iv.end_s, end_s);
            if (b <= a) continue;
            svg += "<rect x=\"" + fmt(x_of(a), "%.2f") + "\" y=\"" + std::to_string(band_y) + "\" width=\"" +
                   fmt(x_of(b) - x_of(a), "%.2f") + "\" height=\"" + std::to_string(band_h - 6) +
                   "\" fill=\"" + color + "\" fill-opacity=\"0.7\"/>\n";
        }
        const std::string stem = fs::path(label_paths[i]).stem().string();
        svg += "<text x=\"" + std::to_string(margin) + "\" y=\"" + std::to_string(band_y + band_h - 8) +
               "\" font-family=\"monospace\" font-size=\"10\" fill=\"" + color + "\">" + stem + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

// ---- commands --------------------------------------------------------------

swd::PipelineConfig resolve_config(const std::string& config_path, std::optional<uint64_t> seed) {
    swd::PipelineConfig cfg =
        config_path.empty() ? swd::default_pipeline_config() : swd::load_pipeline_config(config_path);
    if (seed) {
        cfg.seed = *seed;
        cfg.propagate_seed();
    }
    cfg.validate();
    return cfg;
}

void cmd_synth(const swd::PipelineConfig& cfg, const std::string& out_dir, int n_subjects,
               const std::string& prefix) {
    if (n_subjects < 1) swd::fail("InvalidConfig", "--subjects must be >= 1");
    fs::create_directories(out_dir);
    for (int i = 0; i < n_subjects; ++i) {
        swd::SynthConfig sc = cfg.synth;
        char name[32];
        std::snprintf(name, sizeof(name), "%s%02d", prefix.c_str(), i);
        sc.subject_id = name;
        sc.seed = cfg.seed + static_cast<uint64_t>(i);
        const swd::SynthOutput out = swd::generate(sc);
        const std::string base = out_dir + "/" + name;
        swd::save_signal(out.recording, base + ".f32");
        swd::save_labels(out.swd, base + ".swd.csv");
        swd::save_labels(out.sleep, base + ".sleep.csv");
        swd::save_labels(out.noise, base + ".noise.csv");
        std::cout << name << ": " << out.swd.size() << " SWD, " << out.sleep.size() << " sleep, "
                  << out.noise.size() << " noise events\n";
    }
}

void cmd_train(const swd::PipelineConfig& cfg, const std::string& data_dir,
               const std::string& test_dir, const std::string& out_dir) {
    swd::SegmentedDataset dataset;
    dataset.train = load_corpus(data_dir, cfg);
    if (!test_dir.empty()) dataset.test = load_corpus(test_dir, cfg);

    const swd::RunResult result = swd::train(dataset, cfg.train, cfg.model);

    json extra;
    extra["step"] = result.total_steps;
    extra["metrics"] = {{"best_epoch", result.best_epoch}, {"best_val_loss", result.best_val_loss}};
    extra["pipeline"] = {{"target_rate_hz", cfg.target_rate_hz},
                         {"epoch_seconds", cfg.epoch_seconds},
                         {"threshold", cfg.postprocess.threshold},
                         {"min_duration_s", cfg.postprocess.min_duration_s},
                         {"merge_gap_s", cfg.postprocess.merge_gap_s}};
    swd::save_checkpoint(out_dir, result.params, extra);
    write_text(out_dir + "/result.json", run_result_to_json(result).dump(2) + "\n");
    std::cout << "best epoch " << result.best_epoch + 1 << ", val dice loss "
              << fmt(result.best_val_loss, "%.6f") << ", " << result.total_steps << " steps\n";
}

// postprocess/rate settings ride along in the checkpoint manifest; an explicit
// --config wins
swd::PipelineConfig config_for_checkpoint(const std::string& ckpt_dir, const std::string& config_path,
                                          std::optional<uint64_t> seed, swd::ModelParams<float>& params) {
    json manifest;
    params = swd::load_checkpoint(ckpt_dir, &manifest);
    swd::PipelineConfig cfg;
    if (!config_path.empty()) {
        cfg = swd::load_pipeline_config(config_path);
    } else {
        cfg = swd::default_pipeline_config();
        if (manifest.contains("pipeline")) {
            const auto& p = manifest["pipeline"];
            cfg.target_rate_hz = p.value("target_rate_hz", cfg.target_rate_hz);
            cfg.epoch_seconds = p.value("epoch_seconds", cfg.epoch_seconds);
            cfg.postprocess.threshold = p.value("threshold", cfg.postprocess.threshold);
            cfg.postprocess.min_duration_s = p.value("min_duration_s", cfg.postprocess.min_duration_s);
            cfg.postprocess.merge_gap_s = p.value("merge_gap_s", cfg.postprocess.merge_gap_s);
        }
    }
    if (seed) {
        cfg.seed = *seed;
        cfg.propagate_seed();
    }
    cfg.model = params.config;
    return cfg;
}

void cmd_predict(const std::string& ckpt_dir, const std::string& in_path, const std::string& out_path,
                 const std::string& config_path, std::optional<uint64_t> seed) {
    swd::ModelParams<float> params;
    const swd::PipelineConfig cfg = config_for_checkpoint(ckpt_dir, config_path, seed, params);
    const swd::Recording rec = swd::load_signal(in_path);
    const swd::EventSet events = predict_events(params, rec, cfg);
    swd::save_labels(events, out_path);
    std::cout << events.size() << " events -> " << out_path << "\n";
}

void cmd_eval(const std::string& pred_path, const std::string& truth_path, const std::string& signal_path,
              const std::string& out_path) {
    const swd::Recording rec = swd::load_signal(signal_path);
    const swd::EventSet pred = swd::load_labels(pred_path);
    const swd::EventSet truth_all = swd::load_labels(truth_path);
    const swd::EventSet truth_swd = truth_all.filtered("SWD");
    const swd::EventSet& truth = truth_swd.empty() ? truth_all : truth_swd;

    const auto n = rec.samples.size();
    const swd::BinaryMask pred_mask = swd::events_to_mask(pred, n, rec.sample_rate_hz);
    const swd::BinaryMask truth_mask = swd::events_to_mask(truth, n, rec.sample_rate_hz);

    json report;
    report["schema_version"] = 1;
    report["subject_id"] = rec.subject_id;
    report["pointwise"] = pointwise_to_json(swd::pointwise_metrics(pred_mask, truth_mask));
    report["eventwise"] = eventwise_to_json(swd::eventwise_metrics(pred, truth));
    report["pred"] = features_to_json(rec, pred);
    report["truth"] = features_to_json(rec, truth);
    write_text(out_path, report.dump(2) + "\n");
    std::cout << "pointwise F1 " << fmt(report["pointwise"]["f1"].get<double>(), "%.4f")
              << ", eventwise F1 " << fmt(report["eventwise"]["f1"].get<double>(), "%.4f") << "\n";
}

void cmd_states(const swd::PipelineConfig& cfg, const std::string& in_path, const std::string& out_path) {
    const swd::Recording rec = swd::load_signal(in_path);
    const swd::StateEpochs noise = swd::detect_noise(rec, cfg.states.noise_block_s, cfg.states.noise_k_sd);
    const swd::StateEpochs sleep = swd::detect_sleep(rec, cfg.states.sleep);
    std::vector<swd::Interval> all;
    for (const auto& iv : noise.intervals.intervals()) all.push_back(iv);
    for (const auto& iv : sleep.intervals.intervals()) all.push_back(iv);
    swd::save_labels(swd::EventSet(all, rec.duration_s()), out_path);
    std::cout << noise.intervals.size() << " noise epochs, " << sleep.intervals.size() << " sleep epochs";
    if (!sleep.bimodal) std::cout << " (" << sleep.diagnostic << ")";
    std::cout << "\n";
}

void cmd_sweep(const swd::PipelineConfig& cfg, const std::string& axis_name, const std::string& data_dir,
               const std::string& test_dir, const std::string& out_path) {
    swd::SweepAxis axis;
    if (axis_name == "augment") axis = swd::SweepAxis::augmentations;
    else if (axis_name == "fraction") axis = swd::SweepAxis::train_fraction;
    else if (axis_name == "pscale") axis = swd::SweepAxis::p_scale;
    else swd::fail("InvalidConfig", "--axis must be one of augment|fraction|pscale");

    swd::SegmentedDataset dataset;
    dataset.train = load_corpus(data_dir, cfg);
    dataset.test = load_corpus(test_dir, cfg);
    const swd::SweepTable table = swd::sweep(dataset, cfg.train, cfg.model, axis);

    std::string csv = "label,n_segments,precision,recall,f1\n";
    json rows = json::array();
    for (const auto& r : table.rows) {
        csv += r.label + "," + std::to_string(r.n_segments) + "," + fmt(r.precision, "%.6f") + "," +
               fmt(r.recall, "%.6f") + "," + fmt(r.f1, "%.6f") + "\n";
        rows.push_back({{"label", r.label},
                        {"n_segments", r.n_segments},
                        {"precision", r.precision},
                        {"recall", r.recall},
                        {"f1", r.f1}});
    }
    write_text(out_path, csv);
    json j;
    j["schema_version"] = 1;
    j["axis"] = axis_name;
    j["rows"] = rows;
    write_text(out_path + ".json", j.dump(2) + "\n");
    std::cout << table.rows.size() << " rows -> " << out_path << "\n";
}

void cmd_render(const std::string& in_path, const std::string& labels_csv, double start_s,
                double window_s, const std::string& out_path) {
    const swd::Recording rec = swd::load_signal(in_path);
    std::vector<std::string> label_paths;
    std::string rest = labels_csv;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        label_paths.push_back(rest.substr(0, comma));
        rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    }
    write_text(out_path, render_svg(rec, label_paths, start_s, window_s));
    std::cout << "rendered " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spike-wave discharge detection pipeline"};
    app.require_subcommand(1);

    std::string config_path, data_dir, test_dir, out_path, in_path, ckpt_dir;
    std::string pred_path, truth_path, signal_path, labels_csv, axis, prefix = "s";
    int n_subjects = 1;
    double rate = 100.0, start_s = 0.0, window_s = 60.0;
    int half_width = 32;
    std::optional<uint64_t> seed;

    auto add_seed = [&](CLI::App* cmd) { cmd->add_option("--seed", seed, "override the config seed"); };

    auto* c_synth = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
    c_synth->add_option("--config", config_path);
    c_synth->add_option("--out", out_path)->required();
    c_synth->add_option("--subjects", n_subjects, "number of subjects (default 1)");
    c_synth->add_option("--prefix", prefix, "subject file prefix (default 's')");
    add_seed(c_synth);

    auto* c_resample = app.add_subcommand("resample", "resample a recording to a new rate");
    c_resample->add_option("--in", in_path)->required();
    c_resample->add_option("--rate", rate)->required();
    c_resample->add_option("--half-width", half_width);
    c_resample->add_option("--out", out_path)->required();

    auto* c_train = app.add_subcommand("train", "train on a labeled corpus");
    c_train->add_option("--config", config_path);
    c_train->add_option("--data", data_dir)->required();
    c_train->add_option("--test-data", test_dir);
    c_train->add_option("--out", ckpt_dir)->required();
    add_seed(c_train);

    auto* c_predict = app.add_subcommand("predict", "detect events with a trained checkpoint");
    c_predict->add_option("--ckpt", ckpt_dir)->required();
    c_predict->add_option("--in", in_path)->required();
    c_predict->add_option("--out", out_path)->required();
    c_predict->add_option("--config", config_path);
    add_seed(c_predict);

    auto* c_eval = app.add_subcommand("eval", "score predictions against reference labels");
    c_eval->add_option("--pred", pred_path)->required();
    c_eval->add_option("--truth", truth_path)->required();
    c_eval->add_option("--signal", signal_path)->required();
    c_eval->add_option("--out", out_path)->required();

    auto* c_states = app.add_subcommand("states", "detect noise and sleep epochs");
    c_states->add_option("--config", config_path);
    c_states->add_option("--in", in_path)->required();
    c_states->add_option("--out", out_path)->required();

    auto* c_sweep = app.add_subcommand("sweep", "ablation sweep over a config axis");
    c_sweep->add_option("--axis", axis)->required();
    c_sweep->add_option("--config", config_path);
    c_sweep->add_option("--data", data_dir)->required();
    c_sweep->add_option("--test-data", test_dir)->required();
    c_sweep->add_option("--out", out_path)->required();
    add_seed(c_sweep);

    auto* c_render = app.add_subcommand("render", "render a trace window with label bands to SVG");
    c_render->add_option("--in", in_path)->required();
    c_render->add_option("--labels", labels_csv);
    c_render->add_option("--start", start_s);
    c_render->add_option("--window", window_s);
    c_render->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_synth) {
            cmd_synth(resolve_config(config_path, seed), out_path, n_subjects, prefix);
        } else if (*c_resample) {
            const swd::Recording rec = swd::load_signal(in_path);
            swd::save_signal(swd::resample_to(rec, rate, half_width), out_path);
            std::cout << "resampled to " << rate << " Hz -> " << out_path << "\n";
        } else if (*c_train) {
            cmd_train(resolve_config(config_path, seed), data_dir, test_dir, ckpt_dir);
        } else if (*c_predict) {
            cmd_predict(ckpt_dir, in_path, out_path, config_path, seed);
        } else if (*c_eval) {
            cmd_eval(pred_path, truth_path, signal_path, out_path);
        } else if (*c_states) {
            cmd_states(resolve_config(config_path, seed), in_path, out_path);
        } else if (*c_sweep) {
            cmd_sweep(resolve_config(config_path, seed), axis, data_dir, test_dir, out_path);
        } else if (*c_render) {
            cmd_render(in_path, labels_csv, start_s, window_s, out_path);
        }
    } catch (const swd::Error& e) {
        std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
