#include "swd/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace swd {

namespace {

// stream tags for deriving independent rng streams from the run seed
constexpr uint64_t kStreamSplit = 0x53504c4954ULL;
constexpr uint64_t kStreamInit = 0x494e4954ULL;
constexpr uint64_t kStreamShuffle = 0x53485546ULL;
constexpr uint64_t kStreamAugment = 0x41554741ULL;

template <typename T>
void seeded_shuffle(std::vector<T>& v, Rng rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

struct FlatSegments {
    std::vector<const EpochPair*> segments;
};

FlatSegments flatten(const std::vector<SubjectSegments>& subjects) {
    FlatSegments flat;
    for (const auto& s : subjects)
        for (const auto& seg : s.segments) flat.segments.push_back(&seg);
    return flat;
}

// Eval-mode Dice over a list of segment indices, accumulated globally.
double evaluate_dice(ModelParams<float>& params, const std::vector<const EpochPair*>& segs,
                     const std::vector<int64_t>& indices, int batch_size) {
    const int length = params.config.input_length;
    DiceAccumulator acc;
    ad::Tape<float> tape;
    for (std::size_t off = 0; off < indices.size(); off += static_cast<std::size_t>(batch_size)) {
        const int bsz = static_cast<int>(std::min<std::size_t>(indices.size() - off,
                                                               static_cast<std::size_t>(batch_size)));
        Eigen::ArrayXf x(static_cast<Eigen::Index>(bsz) * length);
        Eigen::ArrayXf g(static_cast<Eigen::Index>(bsz) * length);
        for (int b = 0; b < bsz; ++b) {
            const EpochPair* seg = segs[static_cast<std::size_t>(indices[off + static_cast<std::size_t>(b)])];
            x.segment(b * length, length) = seg->signal;
            g.segment(b * length, length) = seg->target;
        }
        tape.clear();
        auto xv = ad::leaf(tape, ad::Shape{bsz, 1, length}, x);
        auto probs = unet_forward(tape, params, xv, ad::Mode::eval);
        acc.add(probs.value(), g);
    }
    return acc.loss();
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct AggregateScore {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

AggregateScore aggregate(const std::vector<SubjectScore>& scores) {
    AggregateScore a;
    if (scores.empty()) return a;
    for (const auto& s : scores) {
        a.precision += s.pointwise.precision;
        a.recall += s.pointwise.recall;
        a.f1 += s.pointwise.f1;
    }
    const auto n = static_cast<double>(scores.size());
    a.precision /= n;
    a.recall /= n;
    a.f1 /= n;
    return a;
}

}  // namespace

double lr_at(int64_t step, const TrainConfig& cfg) {
    if (step < 0) fail("InvalidConfig", "lr_at: step must be >= 0");
    if (step <= cfg.warmup_steps)
        return cfg.lr_max * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    const int64_t offset = step - cfg.warmup_steps;
    const int64_t cycle = offset / cfg.cycle_steps;
    const int64_t t = offset % cfg.cycle_steps;
    const double peak = cfg.lr_max * std::pow(cfg.gamma, static_cast<double>(cycle));
    // phase runs over [0, pi] across the cycle's steps, so the last step of
    // each cycle lands exactly on lr_min
    const double phase = M_PI * static_cast<double>(t) / static_cast<double>(cfg.cycle_steps - 1);
    const double lr = cfg.lr_min + (peak - cfg.lr_min) * (1.0 + std::cos(phase)) / 2.0;
    return std::max(lr, cfg.lr_min);
}

int64_t fraction_subset_size(int64_t n_total, double fraction) {
    const int64_t k = std::llround(fraction * static_cast<double>(n_total));
    return std::clamp<int64_t>(k, 1, n_total);
}

SplitPlan plan_split(int64_t n_total, const TrainConfig& cfg) {
    if (n_total < 2) fail("EmptyDataset", "need at least two segments to split");
    std::vector<int64_t> perm(static_cast<std::size_t>(n_total));
    std::iota(perm.begin(), perm.end(), 0);
    seeded_shuffle(perm, Rng::derive(cfg.seed, kStreamSplit));

    SplitPlan plan;
    plan.selected = fraction_subset_size(n_total, cfg.train_fraction);
    auto n_val = static_cast<int64_t>(std::llround(cfg.val_fraction * static_cast<double>(plan.selected)));
    n_val = std::clamp<int64_t>(n_val, 1, std::max<int64_t>(plan.selected - 1, 1));
    if (plan.selected - n_val < 1) fail("EmptyDataset", "no training segments left after the validation split");
    plan.train_idx.assign(perm.begin(), perm.begin() + (plan.selected - n_val));
    plan.val_idx.assign(perm.begin() + (plan.selected - n_val), perm.begin() + plan.selected);
    return plan;
}

Eigen::ArrayXf predict_probs(ModelParams<float>& params, const std::vector<EpochPair>& segments,
                             int batch_size) {
    const int length = params.config.input_length;
    Eigen::ArrayXf out(static_cast<Eigen::Index>(segments.size()) * length);
    ad::Tape<float> tape;
    for (std::size_t off = 0; off < segments.size(); off += static_cast<std::size_t>(batch_size)) {
        const int bsz = static_cast<int>(std::min<std::size_t>(segments.size() - off,
                                                               static_cast<std::size_t>(batch_size)));
        Eigen::ArrayXf x(static_cast<Eigen::Index>(bsz) * length);
        for (int b = 0; b < bsz; ++b) {
            if (segments[off + static_cast<std::size_t>(b)].signal.size() != length)
                fail("ShapeMismatch", "segment length does not match the model input length");
            x.segment(b * length, length) = segments[off + static_cast<std::size_t>(b)].signal;
        }
        tape.clear();
        auto xv = ad::leaf(tape, ad::Shape{bsz, 1, length}, x);
        auto probs = unet_forward(tape, params, xv, ad::Mode::eval);
        out.segment(static_cast<Eigen::Index>(off) * length, static_cast<Eigen::Index>(bsz) * length) =
            probs.value();
    }
    return out;
}

RunResult train(const SegmentedDataset& data, const TrainConfig& cfg, const UNetConfig& model_cfg) {
    cfg.validate();
    model_cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    if (data.train.empty()) fail("EmptyDataset", "training needs at least one subject");
    FlatSegments flat = flatten(data.train);
    const auto n_total = static_cast<int64_t>(flat.segments.size());
    if (n_total == 0) fail("EmptyDataset", "training subjects contain no segments");
    const int length = model_cfg.input_length;
    for (const auto* seg : flat.segments) {
        if (seg->signal.size() != length || seg->target.size() != length)
            fail("ShapeMismatch", "segment length does not match the model input length");
    }

    const SplitPlan plan = plan_split(n_total, cfg);
    const std::vector<int64_t>& train_idx = plan.train_idx;
    const std::vector<int64_t>& val_idx = plan.val_idx;
    if (static_cast<int64_t>(train_idx.size()) < cfg.batch_size)
        fail("EmptyDataset", "fewer training segments than one batch");

    Rng init_rng = Rng::derive(cfg.seed, kStreamInit);
    ModelParams<float> params = init_params<float>(model_cfg, init_rng);

    RunResult result;
    AdamState<float> adam;
    ad::Tape<float> tape;
    EarlyStopping stopper(cfg.patience_epochs);
    int64_t global_step = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::vector<int64_t> order = train_idx;
        seeded_shuffle(order, Rng::derive(cfg.seed, kStreamShuffle, static_cast<uint64_t>(epoch)));

        double loss_sum = 0.0;
        int64_t n_batches = 0;
        for (std::size_t off = 0; off + static_cast<std::size_t>(cfg.batch_size) <= order.size();
             off += static_cast<std::size_t>(cfg.batch_size)) {
            const int bsz = cfg.batch_size;
            Eigen::ArrayXf x(static_cast<Eigen::Index>(bsz) * length);
            Eigen::ArrayXf g(static_cast<Eigen::Index>(bsz) * length);
            for (int b = 0; b < bsz; ++b) {
                const int64_t idx = order[off + static_cast<std::size_t>(b)];
                const EpochPair* seg = flat.segments[static_cast<std::size_t>(idx)];
                Rng ex_rng = Rng::derive(cfg.seed, kStreamAugment,
                                         static_cast<uint64_t>(epoch), static_cast<uint64_t>(idx));
                x.segment(b * length, length) = apply_pipeline<float>(seg->signal, cfg.augment, ex_rng);
                g.segment(b * length, length) = seg->target;
            }

            tape.clear();
            auto xv = ad::leaf(tape, ad::Shape{bsz, 1, length}, x);
            BoundParams<float> bound;
            auto probs = unet_forward(tape, params, xv, ad::Mode::train, &bound);
            auto loss = ad::dice_loss(probs, g);
            tape.backward(loss.id);

            std::vector<Eigen::ArrayXf> grads(params.entries.size());
            for (std::size_t i = 0; i < params.entries.size(); ++i) {
                const auto& var = bound.vars[i];
                if (var.id >= 0 && tape.has_grad(var.id)) grads[i] = tape.grad(var.id);
            }
            ++global_step;
            adam_step(params, grads, adam, lr_at(global_step, cfg), cfg);
            loss_sum += static_cast<double>(loss.value()[0]);
            ++n_batches;
        }
        result.train_loss.push_back(n_batches > 0 ? loss_sum / static_cast<double>(n_batches) : 0.0);

        const double vloss = evaluate_dice(params, flat.segments, val_idx, cfg.batch_size);
        result.val_loss.push_back(vloss);
        if (stopper.update(vloss, epoch)) {
            result.best_epoch = epoch;
            result.params = params;
        }
        if (stopper.should_stop()) break;
    }
    result.best_val_loss = stopper.best();
    result.total_steps = global_step;

    for (const auto& subject : data.test) {
        Eigen::ArrayXf probs = predict_probs(result.params, subject.segments, cfg.batch_size);
        Eigen::ArrayXf truth(probs.size());
        for (std::size_t s = 0; s < subject.segments.size(); ++s)
            truth.segment(static_cast<Eigen::Index>(s) * length, length) = subject.segments[s].target;
        const BinaryMask pred_mask = predict_mask(probs, 0.0, 0.5);
        BinaryMask truth_mask;
        truth_mask.sample_rate_hz = 0.0;
        truth_mask.values.resize(static_cast<std::size_t>(truth.size()));
        for (Eigen::Index i = 0; i < truth.size(); ++i)
            truth_mask.values[static_cast<std::size_t>(i)] = truth[i] >= 0.5f ? 1 : 0;
        result.test_scores.push_back({subject.subject_id, pointwise_metrics(pred_mask, truth_mask)});
    }

    result.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

RepeatedResult run_repeated(const SegmentedDataset& data, const TrainConfig& cfg,
                            const UNetConfig& model_cfg, int n) {
    if (n < 1) fail("InvalidConfig", "run_repeated needs n >= 1");
    RepeatedResult rep;
    std::vector<double> ps, rs, f1s;
    for (int i = 0; i < n; ++i) {
        TrainConfig c = cfg;
        c.seed = cfg.seed + static_cast<uint64_t>(i);
        RunResult run = train(data, c, model_cfg);
        const AggregateScore a = aggregate(run.test_scores);
        ps.push_back(a.precision);
        rs.push_back(a.recall);
        f1s.push_back(a.f1);
        rep.runs.push_back(std::move(run));
    }
    rep.precision = summarize(ps);
    rep.recall = summarize(rs);
    rep.f1 = summarize(f1s);
    // n == 1 still reports a spread of zero
    if (n == 1) {
        rep.precision.sd = 0.0;
        rep.recall.sd = 0.0;
        rep.f1.sd = 0.0;
    }
    return rep;
}

SweepTable sweep(const SegmentedDataset& data, const TrainConfig& cfg, const UNetConfig& model_cfg,
                 SweepAxis axis) {
    if (data.test.empty()) fail("EmptyDataset", "sweep needs held-out test subjects");
    const auto n_total = static_cast<int64_t>(flatten(data.train).segments.size());

    SweepTable table;
    table.axis = axis;
    auto run_row = [&](const std::string& label, const TrainConfig& c) {
        RunResult run = train(data, c, model_cfg);
        const AggregateScore a = aggregate(run.test_scores);
        table.rows.push_back({label, fraction_subset_size(n_total, c.train_fraction),
                              a.precision, a.recall, a.f1});
    };

    switch (axis) {
        case SweepAxis::augmentations: {
            auto with = [&](bool scale, bool noise, bool invert) {
                TrainConfig c = cfg;
                if (!scale) c.augment.p_scale = 0.0;
                if (!noise) c.augment.p_noise = 0.0;
                if (!invert) c.augment.p_invert = 0.0;
                return c;
            };
            run_row("none", with(false, false, false));
            run_row("noise", with(false, true, false));
            run_row("invert", with(false, false, true));
            run_row("scaling", with(true, false, false));
            run_row("all", with(true, true, true));
            break;
        }
        case SweepAxis::train_fraction: {
            for (double f : {0.05, 0.10, 0.25, 0.50, 0.75, 0.90}) {
                TrainConfig c = cfg;
                c.train_fraction = f;
                char label[16];
                std::snprintf(label, sizeof(label), "%g%%", f * 100.0);
                run_row(label, c);
            }
            break;
        }
        case SweepAxis::p_scale: {
            for (double p : {0.1, 0.2, 0.3, 0.4, 0.5}) {
                TrainConfig c = cfg;
                c.augment.p_scale = p;
                char label[16];
                std::snprintf(label, sizeof(label), "%.1f", p);
                run_row(label, c);
            }
            break;
        }
    }
    return table;
}

}  // namespace swd
