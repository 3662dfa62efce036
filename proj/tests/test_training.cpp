#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "swd/preprocess.hpp"
#include "swd/synth.hpp"
#include "swd/training.hpp"

using namespace swd;

namespace {

// small corpus of short windows cut from a synthetic recording
SubjectSegments small_subject(uint64_t seed, double duration_s, int epoch_len, const char* name) {
    SynthConfig sc;
    sc.duration_s = duration_s;
    sc.rate_hz = 100.0;
    sc.swd_rate_per_hour = 120.0;  // dense events so most windows see both classes
    sc.sleep_fraction = 0.0;
    sc.noise_events_per_hour = 0.0;
    sc.seed = seed;
    sc.subject_id = name;
    const SynthOutput out = generate(sc);
    const Recording scaled = minmax_scale(out.recording);
    const BinaryMask mask = events_to_mask(out.swd, scaled.samples.size(), scaled.sample_rate_hz);
    return {name, epochize(scaled, mask, epoch_len / 100.0)};
}

UNetConfig small_model(int input_length) {
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 4;
    cfg.kernel_size = 5;
    cfg.input_length = input_length;
    return cfg;
}

TrainConfig small_train_config() {
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.max_epochs = 2;
    cfg.warmup_steps = 10;
    cfg.cycle_steps = 50;
    cfg.seed = 1;
    return cfg;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("schedule anchors are exact") {
    TrainConfig cfg;  // warmup 500, cycle 1000, lr 1e-3 / 1e-5, gamma 0.9
    CHECK(lr_at(0, cfg) == 0.0);
    CHECK(std::abs(lr_at(250, cfg) - 5e-4) <= 1e-12);
    CHECK(std::abs(lr_at(500, cfg) - 1e-3) <= 1e-12);
    // last step of the first cycle reaches the floor exactly
    CHECK(std::abs(lr_at(500 + 999, cfg) - 1e-5) <= 1e-12);
    // the next step restarts at the gamma-decayed peak
    CHECK(std::abs(lr_at(1500, cfg) - 9e-4) <= 1e-12);
    CHECK(std::abs(lr_at(2500, cfg) - 8.1e-4) <= 1e-12);
}

TEST_CASE("schedule is continuous at the warmup junction and floored") {
    TrainConfig cfg;
    CHECK(lr_at(499, cfg) == doctest::Approx(1e-3 * 499.0 / 500.0).epsilon(1e-12));
    CHECK(lr_at(500, cfg) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(lr_at(501, cfg) <= 1e-3);
    for (int64_t step = 0; step < 5000; step += 7) CHECK(lr_at(step, cfg) >= 0.0);
    for (int64_t step = 501; step < 5000; step += 7) CHECK(lr_at(step, cfg) >= cfg.lr_min - 1e-18);
}

TEST_CASE("adam first step matches the hand-derived recurrence") {
    TrainConfig cfg;
    ModelParams<double> params;
    params.entries.push_back({"w", ad::Shape{1, 1, 1}, ad::ArrayX<double>::Zero(1), true});
    std::vector<ad::ArrayX<double>> grads(1);
    grads[0] = ad::ArrayX<double>::Constant(1, 0.5);
    AdamState<double> state;
    adam_step(params, grads, state, 1e-3, cfg);

    // by hand: m = 0.1*0.5 jointly bias-corrected back to 0.5; v likewise to 0.25
    const double m_hat = (1.0 - 0.9) * 0.5 / (1.0 - 0.9);
    const double v_hat = (1.0 - 0.999) * 0.25 / (1.0 - 0.999);
    const double expected = -1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8);
    CHECK(std::abs(params.entries[0].data[0] - expected) <= 1e-12);
    CHECK(std::abs(params.entries[0].data[0] - (-1e-3)) <= 1e-6);
}

TEST_CASE("zero gradients leave parameters unchanged") {
    TrainConfig cfg;
    ModelParams<double> params;
    params.entries.push_back({"w", ad::Shape{2, 1, 1}, ad::ArrayX<double>::Constant(2, 3.25), true});
    std::vector<ad::ArrayX<double>> grads(1);
    grads[0] = ad::ArrayX<double>::Zero(2);
    AdamState<double> state;
    for (int i = 0; i < 5; ++i) adam_step(params, grads, state, 1e-3, cfg);
    CHECK(params.entries[0].data[0] == 3.25);
    CHECK(params.entries[0].data[1] == 3.25);
}

TEST_CASE("equal gradients produce equal updates") {
    TrainConfig cfg;
    ModelParams<double> params;
    params.entries.push_back({"w", ad::Shape{2, 1, 1}, ad::ArrayX<double>::Zero(2), true});
    std::vector<ad::ArrayX<double>> grads(1);
    grads[0] = ad::ArrayX<double>::Constant(2, -0.7);
    AdamState<double> state;
    adam_step(params, grads, state, 1e-3, cfg);
    CHECK(params.entries[0].data[0] == params.entries[0].data[1]);
}

TEST_CASE("non-finite gradients are a hard error") {
    TrainConfig cfg;
    ModelParams<double> params;
    params.entries.push_back({"w", ad::Shape{1, 1, 1}, ad::ArrayX<double>::Zero(1), true});
    std::vector<ad::ArrayX<double>> grads(1);
    grads[0] = ad::ArrayX<double>::Constant(1, std::numeric_limits<double>::quiet_NaN());
    AdamState<double> state;
    try {
        adam_step(params, grads, state, 1e-3, cfg);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == "NonFiniteGradient");
    }
}

TEST_CASE("fraction subset sizes match the corpus arithmetic") {
    CHECK(fraction_subset_size(173160, 0.05) == 8658);
    CHECK(fraction_subset_size(173160, 0.10) == 17316);
    CHECK(fraction_subset_size(173160, 0.90) == 155844);
    CHECK(fraction_subset_size(10, 1.0) == 10);
}

TEST_CASE("splits are disjoint, covering, reproducible and nested across fractions") {
    TrainConfig cfg;
    cfg.seed = 42;
    cfg.val_fraction = 0.05;

    cfg.train_fraction = 1.0;
    const SplitPlan full = plan_split(1000, cfg);
    CHECK(full.train_idx.size() + full.val_idx.size() == 1000);
    std::set<int64_t> seen(full.train_idx.begin(), full.train_idx.end());
    for (int64_t v : full.val_idx) CHECK(seen.insert(v).second);
    CHECK(seen.size() == 1000);

    const SplitPlan again = plan_split(1000, cfg);
    CHECK(again.train_idx == full.train_idx);
    CHECK(again.val_idx == full.val_idx);

    auto selected_of = [&](double frac) {
        TrainConfig c = cfg;
        c.train_fraction = frac;
        const SplitPlan p = plan_split(1000, c);
        std::set<int64_t> s(p.train_idx.begin(), p.train_idx.end());
        s.insert(p.val_idx.begin(), p.val_idx.end());
        CHECK(static_cast<int64_t>(s.size()) == p.selected);
        return s;
    };
    const auto s25 = selected_of(0.25);
    const auto s50 = selected_of(0.50);
    const auto s90 = selected_of(0.90);
    CHECK(s25.size() == 250);
    for (int64_t v : s25) CHECK(s50.count(v) == 1);
    for (int64_t v : s50) CHECK(s90.count(v) == 1);
}

TEST_CASE("early stopping follows the patience rule") {
    // strictly improving: never stops over 50 epochs
    EarlyStopping improving(10);
    for (int epoch = 1; epoch <= 50; ++epoch) {
        improving.update(1.0 / epoch, epoch);
        CHECK(!improving.should_stop());
    }

    // constant from epoch 3: stops after epoch 13 with best at 3
    EarlyStopping flat(10);
    int stopped_at = -1;
    for (int epoch = 1; epoch <= 50; ++epoch) {
        const double val = epoch <= 3 ? 1.0 / epoch : 1.0 / 3.0;
        flat.update(val, epoch);
        if (flat.should_stop()) {
            stopped_at = epoch;
            break;
        }
    }
    CHECK(stopped_at == 13);
    CHECK(flat.best_epoch() == 3);
}

TEST_CASE("training is deterministic given config and seed") {
    const int L = 256;
    SegmentedDataset data;
    data.train.push_back(small_subject(100, 180.0, L, "a"));
    data.test.push_back(small_subject(200, 60.0, L, "t"));
    const TrainConfig cfg = small_train_config();
    const UNetConfig mcfg = small_model(L);

    const RunResult r1 = train(data, cfg, mcfg);
    const RunResult r2 = train(data, cfg, mcfg);
    REQUIRE(r1.train_loss.size() == r2.train_loss.size());
    for (std::size_t i = 0; i < r1.train_loss.size(); ++i) {
        CHECK(r1.train_loss[i] == r2.train_loss[i]);
        CHECK(r1.val_loss[i] == r2.val_loss[i]);
    }
    CHECK(r1.best_epoch == r2.best_epoch);
    REQUIRE(r1.params.entries.size() == r2.params.entries.size());
    for (std::size_t i = 0; i < r1.params.entries.size(); ++i)
        for (Eigen::Index j = 0; j < r1.params.entries[i].data.size(); ++j)
            CHECK(r1.params.entries[i].data[j] == r2.params.entries[i].data[j]);
    REQUIRE(r1.test_scores.size() == 1);
    CHECK(r1.test_scores[0].pointwise.f1 == r2.test_scores[0].pointwise.f1);
}

TEST_CASE("a single batch can be overfit to near-zero dice loss") {
    const int L = 256;
    const SubjectSegments subject = small_subject(300, 120.0, L, "o");
    // pick the first batch with positives in every segment
    std::vector<const EpochPair*> batch;
    for (const auto& seg : subject.segments) {
        if (seg.target.sum() > 8.0f) batch.push_back(&seg);
        if (batch.size() == 4) break;
    }
    REQUIRE(batch.size() == 4);

    const UNetConfig mcfg = small_model(L);
    Rng init(0);
    auto params = init_params<float>(mcfg, init);
    TrainConfig cfg;
    AdamState<float> adam;
    ad::Tape<float> tape;

    Eigen::ArrayXf x(4 * L), g(4 * L);
    for (int b = 0; b < 4; ++b) {
        x.segment(b * L, L) = batch[static_cast<std::size_t>(b)]->signal;
        g.segment(b * L, L) = batch[static_cast<std::size_t>(b)]->target;
    }

    std::vector<double> losses;
    for (int step = 0; step < 300; ++step) {
        tape.clear();
        auto xv = ad::leaf(tape, ad::Shape{4, 1, L}, x);
        BoundParams<float> bound;
        auto probs = unet_forward(tape, params, xv, ad::Mode::train, &bound);
        auto loss = ad::dice_loss(probs, g);
        tape.backward(loss.id);
        std::vector<Eigen::ArrayXf> grads(params.entries.size());
        for (std::size_t i = 0; i < params.entries.size(); ++i)
            if (bound.vars[i].id >= 0 && tape.has_grad(bound.vars[i].id))
                grads[i] = tape.grad(bound.vars[i].id);
        adam_step(params, grads, adam, 1e-3, cfg);
        losses.push_back(static_cast<double>(loss.value()[0]));
        if (losses.back() <= 0.05) break;
    }
    CHECK(losses.back() <= 0.05);

    // the loss also decreases monotonically over the first 20 steps
    REQUIRE(losses.size() >= 21);
    for (int i = 0; i < 20; ++i) CHECK(losses[static_cast<std::size_t>(i) + 1] < losses[static_cast<std::size_t>(i)]);
}

TEST_CASE("repeated runs aggregate per-run metrics") {
    const int L = 256;
    SegmentedDataset data;
    data.train.push_back(small_subject(400, 150.0, L, "a"));
    data.test.push_back(small_subject(500, 60.0, L, "t"));
    TrainConfig cfg = small_train_config();
    cfg.max_epochs = 1;
    const UNetConfig mcfg = small_model(L);

    const RepeatedResult one = run_repeated(data, cfg, mcfg, 1);
    CHECK(one.runs.size() == 1);
    CHECK(*one.f1.sd == 0.0);

    const RepeatedResult rep = run_repeated(data, cfg, mcfg, 2);
    REQUIRE(rep.runs.size() == 2);
    // run 0 must match a direct training with the same seed, verbatim
    const RunResult direct = train(data, cfg, mcfg);
    CHECK(rep.runs[0].test_scores[0].pointwise.f1 == direct.test_scores[0].pointwise.f1);
    CHECK(rep.f1.n == 2);
    CHECK(rep.precision.mean.has_value());
}

TEST_CASE("sweep tables have the documented shapes") {
    const int L = 256;
    SegmentedDataset data;
    data.train.push_back(small_subject(600, 600.0, L, "a"));
    data.test.push_back(small_subject(700, 60.0, L, "t"));
    TrainConfig cfg = small_train_config();
    cfg.max_epochs = 1;
    cfg.batch_size = 2;
    const UNetConfig mcfg = small_model(L);

    const SweepTable aug = sweep(data, cfg, mcfg, SweepAxis::augmentations);
    REQUIRE(aug.rows.size() == 5);
    CHECK(aug.rows[0].label == "none");
    CHECK(aug.rows[1].label == "noise");
    CHECK(aug.rows[2].label == "invert");
    CHECK(aug.rows[3].label == "scaling");
    CHECK(aug.rows[4].label == "all");

    const SweepTable frac = sweep(data, cfg, mcfg, SweepAxis::train_fraction);
    REQUIRE(frac.rows.size() == 6);
    CHECK(frac.rows[0].label == "5%");
    CHECK(frac.rows[5].label == "90%");
    const auto n_total = static_cast<int64_t>(data.train[0].segments.size());
    CHECK(frac.rows[0].n_segments == fraction_subset_size(n_total, 0.05));

    const SweepTable ps = sweep(data, cfg, mcfg, SweepAxis::p_scale);
    REQUIRE(ps.rows.size() == 5);
    CHECK(ps.rows[0].label == "0.1");
    CHECK(ps.rows[4].label == "0.5");
}

TEST_CASE("empty datasets are rejected") {
    SegmentedDataset data;
    CHECK_THROWS_AS(train(data, small_train_config(), small_model(256)), Error);
    data.train.push_back({"empty", {}});
    CHECK_THROWS_AS(train(data, small_train_config(), small_model(256)), Error);
}

}  // TEST_SUITE
