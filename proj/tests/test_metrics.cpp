#include <doctest.h>

#include "helpers.hpp"
#include "swd/metrics.hpp"

using namespace swd;

namespace {

BinaryMask mask_of(std::vector<uint8_t> values, double rate = 100.0) {
    BinaryMask m;
    m.values = std::move(values);
    m.sample_rate_hz = rate;
    return m;
}

EventSet random_canonical_set(Rng& rng, int max_intervals, double span_s) {
    std::vector<Interval> ivs;
    const int n = static_cast<int>(rng.below(static_cast<uint64_t>(max_intervals) + 1));
    double cursor = rng.uniform(0.0, 2.0);
    for (int i = 0; i < n && cursor < span_s; ++i) {
        const double len = rng.uniform(0.05, 4.0);
        ivs.push_back({cursor, cursor + len, "SWD"});
        cursor += len + rng.uniform(0.01, 3.0);
    }
    return EventSet(std::move(ivs), span_s + 10.0);
}

Recording sine_recording(double freq_hz, double duration_s, double rate) {
    Recording rec;
    rec.sample_rate_hz = rate;
    const auto n = static_cast<Eigen::Index>(std::llround(duration_s * rate));
    rec.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        rec.samples[i] = std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / rate);
    return rec;
}

}  // namespace

TEST_SUITE("events_metrics") {

TEST_CASE("mask_to_events follows the run-length definition") {
    const EventSet events = mask_to_events(mask_of({0, 1, 1, 0, 1, 0}), 0.0, 0.0);
    REQUIRE(events.size() == 2);
    CHECK(events.intervals()[0].start_s == doctest::Approx(0.01));
    CHECK(events.intervals()[0].end_s == doctest::Approx(0.03));
    CHECK(events.intervals()[1].start_s == doctest::Approx(0.04));
    CHECK(events.intervals()[1].end_s == doctest::Approx(0.05));
}

TEST_CASE("gaps shorter than merge_gap_s are bridged") {
    // two runs 0.1 s apart, merge gap 0.2 s
    std::vector<uint8_t> v(100, 0);
    for (int i = 10; i < 20; ++i) v[static_cast<std::size_t>(i)] = 1;
    for (int i = 30; i < 40; ++i) v[static_cast<std::size_t>(i)] = 1;
    const EventSet events = mask_to_events(mask_of(v), 0.0, 0.2);
    REQUIRE(events.size() == 1);
    CHECK(events.intervals()[0].start_s == doctest::Approx(0.10));
    CHECK(events.intervals()[0].end_s == doctest::Approx(0.40));
}

TEST_CASE("events shorter than min_duration_s are discarded") {
    std::vector<uint8_t> v(100, 0);
    for (int i = 10; i < 40; ++i) v[static_cast<std::size_t>(i)] = 1;  // 0.3 s
    CHECK(mask_to_events(mask_of(v), 0.5, 0.0).empty());
}

TEST_CASE("merge-then-filter leaves a fixed point") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<uint8_t> v(2000, 0);
        for (int r = 0; r < 20; ++r) {
            const auto start = static_cast<std::size_t>(rng.below(1900));
            const auto len = 1 + rng.below(120);
            for (std::size_t i = start; i < std::min<std::size_t>(start + len, v.size()); ++i) v[i] = 1;
        }
        const EventSet events = mask_to_events(mask_of(v), 0.5, 0.2);
        for (std::size_t i = 0; i < events.size(); ++i) {
            CHECK(events.intervals()[i].duration_s() >= 0.5 - 1e-9);
            if (i > 0)
                CHECK(events.intervals()[i].start_s - events.intervals()[i - 1].end_s >= 0.2 - 1e-9);
        }
    }
}

TEST_CASE("pointwise metrics count the confusion table") {
    const PointwiseScore perfect = pointwise_metrics(mask_of({1, 1, 0, 0}), mask_of({1, 1, 0, 0}));
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const PointwiseScore s = pointwise_metrics(mask_of({1, 1, 0, 0}), mask_of({1, 0, 1, 0}));
    CHECK(s.tp == 1);
    CHECK(s.fp == 1);
    CHECK(s.fn == 1);
    CHECK(s.tn == 1);
    CHECK(s.precision == 0.5);
    CHECK(s.recall == 0.5);
    CHECK(s.f1 == 0.5);

    const PointwiseScore empty = pointwise_metrics(mask_of({0, 0, 0}), mask_of({1, 1, 0}));
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);
}

TEST_CASE("pointwise f1 is invariant under a shared permutation") {
    Rng rng(15);
    std::vector<uint8_t> p(200), t(200);
    for (std::size_t i = 0; i < 200; ++i) {
        p[i] = rng.uniform() < 0.3 ? 1 : 0;
        t[i] = rng.uniform() < 0.3 ? 1 : 0;
    }
    const PointwiseScore before = pointwise_metrics(mask_of(p), mask_of(t));
    // Fisher-Yates with the same draws on both
    std::vector<std::size_t> order(200);
    for (std::size_t i = 0; i < 200; ++i) order[i] = i;
    for (std::size_t i = 200; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<uint8_t> p2(200), t2(200);
    for (std::size_t i = 0; i < 200; ++i) {
        p2[i] = p[order[i]];
        t2[i] = t[order[i]];
    }
    const PointwiseScore after = pointwise_metrics(mask_of(p2), mask_of(t2));
    CHECK(before.f1 == after.f1);
    CHECK(before.tp == after.tp);
}

TEST_CASE("eventwise any-overlap matching on the worked examples") {
    const EventSet pred({{0, 2, "SWD"}, {10, 12, "SWD"}}, 30.0);
    const EventSet truth({{1, 3, "SWD"}, {20, 22, "SWD"}}, 30.0);
    const EventScore s = eventwise_metrics(pred, truth);
    CHECK(s.tp_pred == 1);
    CHECK(s.fp_pred == 1);
    CHECK(s.fn_truth == 1);
    CHECK(s.precision == 0.5);
    CHECK(s.recall == 0.5);
    CHECK(s.f1 == 0.5);

    const EventScore same = eventwise_metrics(pred, pred);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);

    // one long prediction spanning three truth events: the metric's known leniency
    const EventSet wide({{0, 100, "SWD"}}, 200.0);
    const EventSet three({{5, 10, "SWD"}, {20, 30, "SWD"}, {50, 60, "SWD"}}, 200.0);
    const EventScore lenient = eventwise_metrics(wide, three);
    CHECK(lenient.precision == 1.0);
    CHECK(lenient.recall == 1.0);
}

TEST_CASE("eventwise matching agrees with the brute-force oracle") {
    Rng rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        const EventSet pred = random_canonical_set(rng, 50, 120.0);
        const EventSet truth = random_canonical_set(rng, 50, 120.0);
        const EventScore fast = eventwise_metrics(pred, truth);
        const testutil::BruteEventScore slow =
            testutil::brute_force_eventwise(pred.intervals(), truth.intervals());
        CHECK(fast.tp_pred == slow.tp_pred);
        CHECK(fast.fp_pred == slow.fp_pred);
        CHECK(fast.tp_truth == slow.tp_truth);
        CHECK(fast.fn_truth == slow.fn_truth);
    }
}

TEST_CASE("peak frequency recovers pure tones") {
    const Recording six = sine_recording(6.0, 10.0, 100.0);
    CHECK(std::abs(peak_frequency(six, 2.0, 7.0) - 6.0) <= 0.5);

    const Recording three = sine_recording(3.0, 10.0, 100.0);
    CHECK(std::abs(peak_frequency(three, 2.0, 7.0) - 3.0) <= 0.5);
}

TEST_CASE("peak frequency of white noise stays inside the band clamp") {
    Rng rng(77);
    Recording rec;
    rec.sample_rate_hz = 100.0;
    rec.samples.resize(1000);
    for (Eigen::Index i = 0; i < rec.samples.size(); ++i) rec.samples[i] = rng.normal();
    const double f = peak_frequency(rec, 0.0, 10.0);
    CHECK(f >= 1.0);
    CHECK(f <= 20.0);
}

TEST_CASE("too-short intervals are rejected") {
    const Recording rec = sine_recording(6.0, 10.0, 100.0);
    CHECK_THROWS_AS(peak_frequency(rec, 1.0, 1.5), Error);
}

TEST_CASE("event_stats reports rate and sample-deviation summaries") {
    std::vector<Interval> ivs;
    for (int i = 0; i < 10; ++i) ivs.push_back({i * 300.0, i * 300.0 + 5.0, "SWD"});
    const EventStats s = event_stats(EventSet(ivs, 3600.0), 3600.0);
    CHECK(s.rate_per_hour == doctest::Approx(10.0));

    const EventStats two = event_stats(EventSet({{0, 2, "SWD"}, {10, 14, "SWD"}}, 100.0), 100.0);
    CHECK(*two.duration.mean == doctest::Approx(3.0));
    CHECK(*two.duration.sd == doctest::Approx(std::sqrt(2.0)));

    const EventStats none = event_stats(EventSet(), 3600.0);
    CHECK(none.rate_per_hour == 0.0);
    CHECK(!none.duration.mean.has_value());
    CHECK(!none.duration.sd.has_value());
}

}  // TEST_SUITE
