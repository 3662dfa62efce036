#include "swd/signal.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace swd {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const char* what) {
    const std::string t = trim(text);
    if (t.empty()) fail("MalformedSample", std::string("empty ") + what);
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) fail("MalformedSample", std::string("non-numeric ") + what + ": '" + t + "'");
    if (!std::isfinite(v)) fail("MalformedSample", std::string(what) + " is not finite: '" + t + "'");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

EventSet::EventSet(std::vector<Interval> intervals, double total_duration_s)
    : total_duration_s_(total_duration_s) {
    for (const auto& iv : intervals) {
        if (!(iv.start_s < iv.end_s)) {
            fail("InvalidInterval", "interval start must be < end (got [" +
                                        format_double(iv.start_s) + ", " + format_double(iv.end_s) + "))");
        }
        if (iv.start_s < 0.0) fail("InvalidInterval", "interval start must be >= 0");
        if (total_duration_s_ > 0.0 && iv.end_s > total_duration_s_ + 1e-9) {
            fail("InvalidInterval", "interval end " + format_double(iv.end_s) +
                                        " exceeds recording duration " + format_double(total_duration_s_));
        }
    }
    std::stable_sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
        if (a.start_s != b.start_s) return a.start_s < b.start_s;
        if (a.end_s != b.end_s) return a.end_s < b.end_s;
        return a.label < b.label;
    });
    // merge same-label intervals that overlap or abut
    for (auto& iv : intervals) {
        bool merged = false;
        for (auto it = intervals_.rbegin(); it != intervals_.rend(); ++it) {
            if (it->label != iv.label) continue;
            if (iv.start_s <= it->end_s) {
                it->end_s = std::max(it->end_s, iv.end_s);
                merged = true;
            }
            break;  // same-label predecessors are sorted; only the last one can absorb
        }
        if (!merged) intervals_.push_back(iv);
    }
    std::stable_sort(intervals_.begin(), intervals_.end(), [](const Interval& a, const Interval& b) {
        if (a.start_s != b.start_s) return a.start_s < b.start_s;
        if (a.end_s != b.end_s) return a.end_s < b.end_s;
        return a.label < b.label;
    });
}

void EventSet::set_total_duration_s(double t) {
    for (const auto& iv : intervals_) {
        if (iv.end_s > t + 1e-9) fail("InvalidInterval", "recording duration shorter than existing intervals");
    }
    total_duration_s_ = t;
}

EventSet EventSet::filtered(const std::string& label) const {
    std::vector<Interval> out;
    for (const auto& iv : intervals_)
        if (iv.label == label) out.push_back(iv);
    return EventSet(std::move(out), total_duration_s_);
}

SignalFormat signal_format_for_path(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".csv") return SignalFormat::csv;
    if (ext == ".f32") return SignalFormat::f32;
    fail("UnknownFormat", "cannot infer signal format from extension of '" + path + "' (expected .csv or .f32)");
}

std::string sidecar_path(const std::string& f32_path) {
    auto dot = f32_path.find_last_of('.');
    auto slash = f32_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return f32_path + ".json";
    return f32_path.substr(0, dot) + ".json";
}

namespace {

Recording load_signal_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("IoError", "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) fail("MalformedHeader", "empty signal file '" + path + "'");
    line = trim(line);
    const std::string prefix = "sample_rate_hz=";
    if (line.rfind(prefix, 0) != 0) fail("MalformedHeader", "expected 'sample_rate_hz=<float>' header in '" + path + "'");
    double rate = parse_double(line.substr(prefix.size()), "sample rate");
    if (rate <= 0.0) fail("InvalidRate", "sample rate must be positive, got " + format_double(rate));

    std::vector<double> samples;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        samples.push_back(parse_double(t, "sample"));
    }
    if (samples.empty()) fail("MalformedSample", "signal file '" + path + "' contains no samples");

    Recording rec;
    rec.samples = Eigen::Map<const Eigen::ArrayXd>(samples.data(), static_cast<Eigen::Index>(samples.size()));
    rec.sample_rate_hz = rate;
    return rec;
}

Recording load_signal_f32(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("IoError", "cannot open '" + path + "'");
    in.seekg(0, std::ios::end);
    std::streamoff bytes = in.tellg();
    in.seekg(0, std::ios::beg);
    if (bytes <= 0 || bytes % 4 != 0) fail("MalformedHeader", "'" + path + "' is not a sequence of 32-bit floats");
    Eigen::Index n = static_cast<Eigen::Index>(bytes / 4);
    std::vector<float> raw(static_cast<std::size_t>(n));
    in.read(reinterpret_cast<char*>(raw.data()), bytes);
    if (!in) fail("IoError", "short read on '" + path + "'");

    std::ifstream side(sidecar_path(path));
    if (!side) fail("IoError", "missing sidecar '" + sidecar_path(path) + "'");
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const std::exception& e) {
        fail("MalformedHeader", "sidecar '" + sidecar_path(path) + "': " + e.what());
    }
    if (!meta.contains("sample_rate_hz") || !meta["sample_rate_hz"].is_number())
        fail("MalformedHeader", "sidecar missing numeric 'sample_rate_hz'");
    double rate = meta["sample_rate_hz"].get<double>();
    if (rate <= 0.0) fail("InvalidRate", "sample rate must be positive");

    Recording rec;
    rec.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(raw[static_cast<std::size_t>(i)]))
            fail("MalformedSample", "non-finite sample at index " + std::to_string(i));
        rec.samples[i] = static_cast<double>(raw[static_cast<std::size_t>(i)]);
    }
    rec.sample_rate_hz = rate;
    if (meta.contains("subject_id") && meta["subject_id"].is_string())
        rec.subject_id = meta["subject_id"].get<std::string>();
    return rec;
}

}  // namespace

Recording load_signal(const std::string& path, SignalFormat format) {
    return format == SignalFormat::csv ? load_signal_csv(path) : load_signal_f32(path);
}

Recording load_signal(const std::string& path) {
    return load_signal(path, signal_format_for_path(path));
}

void save_signal(const Recording& rec, const std::string& path, SignalFormat format) {
    if (rec.sample_rate_hz <= 0.0) fail("InvalidRate", "sample rate must be positive");
    if (rec.samples.size() == 0) fail("MalformedSample", "refusing to save empty recording");
    if (format == SignalFormat::csv) {
        std::ofstream out(path);
        if (!out) fail("IoError", "cannot write '" + path + "'");
        out << "sample_rate_hz=" << format_double(rec.sample_rate_hz) << "\n";
        for (Eigen::Index i = 0; i < rec.samples.size(); ++i) out << format_double(rec.samples[i]) << "\n";
    } else {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail("IoError", "cannot write '" + path + "'");
        std::vector<float> raw(static_cast<std::size_t>(rec.samples.size()));
        for (Eigen::Index i = 0; i < rec.samples.size(); ++i)
            raw[static_cast<std::size_t>(i)] = static_cast<float>(rec.samples[i]);
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size() * sizeof(float)));
        nlohmann::json meta;
        meta["sample_rate_hz"] = rec.sample_rate_hz;
        meta["subject_id"] = rec.subject_id;
        std::ofstream side(sidecar_path(path));
        if (!side) fail("IoError", "cannot write sidecar '" + sidecar_path(path) + "'");
        side << meta.dump(2) << "\n";
    }
}

void save_signal(const Recording& rec, const std::string& path) {
    save_signal(rec, path, signal_format_for_path(path));
}

EventSet load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("IoError", "cannot open '" + path + "'");
    std::string line;
    std::vector<Interval> intervals;
    bool saw_header = false;
    double max_end = 0.0;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (!saw_header) {
            if (t != "start_s,end_s,label") fail("MalformedHeader", "expected 'start_s,end_s,label' header in '" + path + "'");
            saw_header = true;
            continue;
        }
        auto c1 = t.find(',');
        auto c2 = t.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            fail("MalformedSample", "expected 'start_s,end_s,label' row, got '" + t + "'");
        Interval iv;
        iv.start_s = parse_double(t.substr(0, c1), "start_s");
        iv.end_s = parse_double(t.substr(c1 + 1, c2 - c1 - 1), "end_s");
        iv.label = trim(t.substr(c2 + 1));
        if (iv.label.empty()) fail("MalformedSample", "empty label in '" + t + "'");
        intervals.push_back(iv);
        max_end = std::max(max_end, iv.end_s);
    }
    return EventSet(std::move(intervals), max_end);
}

void save_labels(const EventSet& events, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("IoError", "cannot write '" + path + "'");
    out << "start_s,end_s,label\n";
    for (const auto& iv : events.intervals()) {
        if (iv.label.find(',') != std::string::npos || iv.label.find('\n') != std::string::npos)
            fail("InvalidInterval", "label may not contain ',' or newline: '" + iv.label + "'");
        out << format_double(iv.start_s) << "," << format_double(iv.end_s) << "," << iv.label << "\n";
    }
}

BinaryMask events_to_mask(const EventSet& events, Eigen::Index n_samples, double sample_rate_hz) {
    if (sample_rate_hz <= 0.0) fail("InvalidRate", "sample rate must be positive");
    BinaryMask mask;
    mask.sample_rate_hz = sample_rate_hz;
    mask.values.assign(static_cast<std::size_t>(n_samples), 0);
    for (const auto& iv : events.intervals()) {
        auto lo = static_cast<Eigen::Index>(std::ceil(iv.start_s * sample_rate_hz - 1e-9));
        auto hi = static_cast<Eigen::Index>(std::ceil(iv.end_s * sample_rate_hz - 1e-9));
        lo = std::max<Eigen::Index>(lo, 0);
        hi = std::min<Eigen::Index>(hi, n_samples);
        for (Eigen::Index i = lo; i < hi; ++i) mask.values[static_cast<std::size_t>(i)] = 1;
    }
    return mask;
}

}  // namespace swd
