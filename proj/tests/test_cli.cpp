#include <doctest.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "swd/signal.hpp"

using testutil::run_cli;
using testutil::TempDir;
using nlohmann::json;

namespace {

const char* kTinyConfig = R"({
  "seed": 5,
  "epoch_seconds": 2.56,
  "resample": {"target_rate_hz": 100.0},
  "model": {"depth": 2, "base_channels": 4, "kernel_size": 5, "input_length": 256},
  "train": {"max_epochs": 2, "batch_size": 8, "warmup_steps": 10, "cycle_steps": 50, "patience_epochs": 5},
  "synth": {"duration_s": 180.0, "swd_rate_per_hour": 120.0, "sleep_fraction": 0.0,
            "noise_events_per_hour": 0.0}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("full chain: synth, train, predict, eval, render") {
    TempDir dir("chain");
    testutil::write_file(dir.file("cfg.json"), kTinyConfig);

    auto synth = run_cli("synth --config " + dir.file("cfg.json") + " --out " + dir.file("data") +
                         " --subjects 2");
    REQUIRE(synth.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("data/s00.f32")));
    CHECK(std::filesystem::exists(dir.file("data/s00.json")));
    CHECK(std::filesystem::exists(dir.file("data/s01.swd.csv")));

    auto holdout = run_cli("synth --config " + dir.file("cfg.json") + " --out " + dir.file("test") +
                           " --subjects 1 --prefix t --seed 99");
    REQUIRE(holdout.exit_code == 0);

    auto train = run_cli("train --config " + dir.file("cfg.json") + " --data " + dir.file("data") +
                         " --out " + dir.file("ckpt"));
    REQUIRE(train.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("ckpt/manifest.json")));
    CHECK(std::filesystem::exists(dir.file("ckpt/params.f32")));
    CHECK(std::filesystem::exists(dir.file("ckpt/result.json")));

    auto predict = run_cli("predict --ckpt " + dir.file("ckpt") + " --in " + dir.file("test/t00.f32") +
                           " --out " + dir.file("pred.csv"));
    REQUIRE(predict.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("pred.csv")));

    auto eval = run_cli("eval --pred " + dir.file("pred.csv") + " --truth " + dir.file("test/t00.swd.csv") +
                        " --signal " + dir.file("test/t00.f32") + " --out " + dir.file("report.json"));
    REQUIRE(eval.exit_code == 0);
    const json report = json::parse(testutil::read_file(dir.file("report.json")));
    CHECK(report["schema_version"] == 1);
    CHECK(report["pointwise"].contains("f1"));
    CHECK(report["eventwise"].contains("f1"));

    auto render = run_cli("render --in " + dir.file("test/t00.f32") + " --labels " + dir.file("pred.csv") +
                          "," + dir.file("test/t00.swd.csv") + " --window 60 --out " + dir.file("trace.svg"));
    REQUIRE(render.exit_code == 0);
    const std::string svg = testutil::read_file(dir.file("trace.svg"));
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("http://") == svg.find("http://www.w3.org/2000/svg"));  // no external fetches

    // byte determinism of predict and render
    auto predict2 = run_cli("predict --ckpt " + dir.file("ckpt") + " --in " + dir.file("test/t00.f32") +
                            " --out " + dir.file("pred2.csv"));
    REQUIRE(predict2.exit_code == 0);
    CHECK(testutil::read_file(dir.file("pred.csv")) == testutil::read_file(dir.file("pred2.csv")));
    auto render2 = run_cli("render --in " + dir.file("test/t00.f32") + " --labels " + dir.file("pred.csv") +
                           "," + dir.file("test/t00.swd.csv") + " --window 60 --out " + dir.file("trace2.svg"));
    REQUIRE(render2.exit_code == 0);
    CHECK(testutil::read_file(dir.file("trace.svg")) == testutil::read_file(dir.file("trace2.svg")));
}

TEST_CASE("eval of identical label files scores 1.0 everywhere") {
    TempDir dir("evalid");
    testutil::write_file(dir.file("sig.csv"), [] {
        std::string s = "sample_rate_hz=100\n";
        for (int i = 0; i < 3000; ++i) s += "0.25\n";
        return s;
    }());
    testutil::write_file(dir.file("truth.csv"), "start_s,end_s,label\n2,5,SWD\n10,14,SWD\n");
    auto eval = run_cli("eval --pred " + dir.file("truth.csv") + " --truth " + dir.file("truth.csv") +
                        " --signal " + dir.file("sig.csv") + " --out " + dir.file("r.json"));
    REQUIRE(eval.exit_code == 0);
    const json report = json::parse(testutil::read_file(dir.file("r.json")));
    CHECK(report["pointwise"]["f1"] == 1.0);
    CHECK(report["eventwise"]["f1"] == 1.0);
    CHECK(report["eventwise"]["precision"] == 1.0);
}

TEST_CASE("predict on a too-short recording fails with machine-readable JSON") {
    TempDir dir("short");
    testutil::write_file(dir.file("cfg.json"), kTinyConfig);
    auto synth = run_cli("synth --config " + dir.file("cfg.json") + " --out " + dir.file("data"));
    REQUIRE(synth.exit_code == 0);
    auto train = run_cli("train --config " + dir.file("cfg.json") + " --data " + dir.file("data") +
                         " --out " + dir.file("ckpt"));
    REQUIRE(train.exit_code == 0);

    std::string sig = "sample_rate_hz=100\n";
    for (int i = 0; i < 100; ++i) sig += "0.5\n";
    testutil::write_file(dir.file("tiny.csv"), sig);
    auto predict = run_cli("predict --ckpt " + dir.file("ckpt") + " --in " + dir.file("tiny.csv") +
                           " --out " + dir.file("p.csv"));
    CHECK(predict.exit_code != 0);
    const json err = json::parse(predict.err);
    CHECK(err["error"] == "InputTooShort");
}

TEST_CASE("invalid configs are rejected before running") {
    TempDir dir("cfg");
    testutil::write_file(dir.file("bad.json"), R"({"seed": 1, "unknown_section": {}})");
    auto r = run_cli("synth --config " + dir.file("bad.json") + " --out " + dir.file("x"));
    CHECK(r.exit_code != 0);
    const json err = json::parse(r.err);
    CHECK(err["error"] == "InvalidConfig");

    testutil::write_file(dir.file("bad2.json"), R"({"model": {"kernel_size": 4}})");
    auto r2 = run_cli("synth --config " + dir.file("bad2.json") + " --out " + dir.file("x"));
    CHECK(r2.exit_code != 0);
}

TEST_CASE("resample command converts rates") {
    TempDir dir("rs");
    std::string sig = "sample_rate_hz=1000\n";
    for (int i = 0; i < 10000; ++i) sig += "1.0\n";
    testutil::write_file(dir.file("in.csv"), sig);
    auto r = run_cli("resample --in " + dir.file("in.csv") + " --rate 100 --out " + dir.file("out.csv"));
    REQUIRE(r.exit_code == 0);
    const swd::Recording rec = swd::load_signal(dir.file("out.csv"));
    CHECK(rec.sample_rate_hz == 100.0);
    CHECK(rec.samples.size() == 1000);
    CHECK(std::abs(rec.samples[500] - 1.0) < 1e-6);
}

TEST_CASE("states command writes noise and sleep labels") {
    TempDir dir("st");
    // synth with sleep on so the detector has something to find
    testutil::write_file(dir.file("cfg.json"), R"({
      "seed": 3,
      "synth": {"duration_s": 600.0, "sleep_fraction": 0.3, "noise_events_per_hour": 12.0}
    })");
    auto synth = run_cli("synth --config " + dir.file("cfg.json") + " --out " + dir.file("data"));
    REQUIRE(synth.exit_code == 0);
    auto states = run_cli("states --in " + dir.file("data/s00.f32") + " --out " + dir.file("states.csv"));
    REQUIRE(states.exit_code == 0);
    const swd::EventSet events = swd::load_labels(dir.file("states.csv"));
    bool has_sleep = false;
    for (const auto& iv : events.intervals())
        if (iv.label == "sleep") has_sleep = true;
    CHECK(has_sleep);
}

}  // TEST_SUITE
