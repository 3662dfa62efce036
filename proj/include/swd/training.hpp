#pragma once

#include <limits>
#include <string>
#include <vector>

#include "swd/augment.hpp"
#include "swd/metrics.hpp"
#include "swd/model.hpp"
#include "swd/preprocess.hpp"

namespace swd {

/// Optimizer, schedule, split and augmentation settings for one training run.
struct TrainConfig {
    double lr_max = 1e-3;
    int max_epochs = 50;
    int batch_size = 32;
    int warmup_steps = 500;
    int cycle_steps = 1000;
    double lr_min = 1e-5;
    double gamma = 0.9;
    int patience_epochs = 10;
    double val_fraction = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0;
    AugmentConfig augment;
    double train_fraction = 1.0;

    void validate() const {
        if (lr_max <= 0.0 || lr_min <= 0.0 || lr_min > lr_max)
            fail("InvalidConfig", "learning rates must satisfy 0 < lr_min <= lr_max");
        if (max_epochs < 1 || batch_size < 1 || patience_epochs < 1)
            fail("InvalidConfig", "max_epochs, batch_size and patience must be >= 1");
        if (warmup_steps < 1 || cycle_steps < 2) fail("InvalidConfig", "warmup_steps >= 1 and cycle_steps >= 2");
        if (gamma <= 0.0 || gamma > 1.0) fail("InvalidConfig", "gamma must lie in (0, 1]");
        if (val_fraction <= 0.0 || val_fraction >= 1.0) fail("InvalidConfig", "val_fraction must lie in (0, 1)");
        if (train_fraction <= 0.0 || train_fraction > 1.0) fail("InvalidConfig", "train_fraction must lie in (0, 1]");
        augment.validate();
    }
};

/// Linear warmup to lr_max over warmup_steps, then cosine cycles of
/// cycle_steps whose peak decays by gamma per cycle. Each cycle's last step
/// reaches lr_min exactly; the next step restarts at the decayed peak.
double lr_at(int64_t step, const TrainConfig& cfg);

template <typename Scalar>
struct AdamState {
    std::vector<ad::ArrayX<Scalar>> m;
    std::vector<ad::ArrayX<Scalar>> v;
    int64_t step = 0;
};

/// Bias-corrected Adam update over the trainable entries; `grads` is aligned
/// with params.entries (empty arrays where no gradient applies). Non-finite
/// gradients are a hard error.
template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const std::vector<ad::ArrayX<Scalar>>& grads,
               AdamState<Scalar>& state, double lr, const TrainConfig& cfg) {
    if (grads.size() != params.entries.size())
        fail("ShapeMismatch", "adam_step: gradient list does not match parameter entries");
    if (state.m.empty()) {
        state.m.resize(params.entries.size());
        state.v.resize(params.entries.size());
        for (std::size_t i = 0; i < params.entries.size(); ++i) {
            if (!params.entries[i].trainable) continue;
            state.m[i] = ad::ArrayX<Scalar>::Zero(params.entries[i].data.size());
            state.v[i] = ad::ArrayX<Scalar>::Zero(params.entries[i].data.size());
        }
    }
    state.step += 1;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    ad::ArrayX<Scalar> zeros;
    for (std::size_t i = 0; i < params.entries.size(); ++i) {
        auto& e = params.entries[i];
        if (!e.trainable) continue;
        const ad::ArrayX<Scalar>* gp = &grads[i];
        if (gp->size() == 0) {
            zeros = ad::ArrayX<Scalar>::Zero(e.data.size());
            gp = &zeros;
        }
        const ad::ArrayX<Scalar>& g = *gp;
        if (g.size() != e.data.size()) fail("ShapeMismatch", "adam_step: gradient shape mismatch at '" + e.name + "'");
        if (!g.allFinite()) fail("NonFiniteGradient", "non-finite gradient in '" + e.name + "'");
        auto& m = state.m[i];
        auto& v = state.v[i];
        m = static_cast<Scalar>(b1) * m + static_cast<Scalar>(1.0 - b1) * g;
        v = static_cast<Scalar>(b2) * v + static_cast<Scalar>(1.0 - b2) * g.square();
        for (Eigen::Index j = 0; j < e.data.size(); ++j) {
            const double mhat = static_cast<double>(m[j]) / bc1;
            const double vhat = static_cast<double>(v[j]) / bc2;
            e.data[j] -= static_cast<Scalar>(lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
        }
    }
}

struct SubjectSegments {
    std::string subject_id;
    std::vector<EpochPair> segments;
};

struct SegmentedDataset {
    std::vector<SubjectSegments> train;
    std::vector<SubjectSegments> test;
};

struct SubjectScore {
    std::string subject_id;
    PointwiseScore pointwise;
};

struct RunResult {
    std::vector<double> train_loss;  // mean batch Dice loss per epoch
    std::vector<double> val_loss;    // whole-validation Dice loss per epoch
    int best_epoch = -1;             // 0-based index into the histories
    double best_val_loss = 0.0;
    int64_t total_steps = 0;
    ModelParams<float> params;  // checkpoint of the best-validation epoch
    std::vector<SubjectScore> test_scores;
    double wall_clock_s = 0.0;
};

/// Selected-subset size for a training fraction: round(fraction * n_total).
int64_t fraction_subset_size(int64_t n_total, double fraction);

/// Seeded segment split: one permutation per seed; the fraction subset is a
/// prefix of it (so fractions nest) and the validation tail is carved from
/// the subset.
struct SplitPlan {
    std::vector<int64_t> train_idx;
    std::vector<int64_t> val_idx;
    int64_t selected = 0;
};

SplitPlan plan_split(int64_t n_total, const TrainConfig& cfg);

/// Early stopping on the validation loss; any strict decrease counts as an
/// improvement.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Records one epoch's validation loss; true when it improved on the best.
    bool update(double val_loss, int epoch) {
        if (val_loss < best_) {
            best_ = val_loss;
            best_epoch_ = epoch;
            since_improve_ = 0;
            return true;
        }
        ++since_improve_;
        return false;
    }

    bool should_stop() const { return since_improve_ >= patience_; }
    double best() const { return best_; }
    int best_epoch() const { return best_epoch_; }

private:
    int patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int best_epoch_ = -1;
    int since_improve_ = 0;
};

/// Trains on a seeded 95/5 segment-level split of the (optionally
/// fraction-subsampled) training segments, with augmentation on training
/// batches only and early stopping on the validation Dice loss.
RunResult train(const SegmentedDataset& data, const TrainConfig& cfg, const UNetConfig& model_cfg);

/// Concatenated eval-mode probabilities for the segments, in order.
Eigen::ArrayXf predict_probs(ModelParams<float>& params, const std::vector<EpochPair>& segments,
                             int batch_size = 32);

struct RepeatedResult {
    std::vector<RunResult> runs;
    SummaryStat precision;
    SummaryStat recall;
    SummaryStat f1;
};

/// n runs with seeds seed+0..n-1; summarizes the per-run mean test metrics.
RepeatedResult run_repeated(const SegmentedDataset& data, const TrainConfig& cfg,
                            const UNetConfig& model_cfg, int n = 3);

enum class SweepAxis { augmentations, train_fraction, p_scale };

struct SweepRow {
    std::string label;
    int64_t n_segments = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct SweepTable {
    SweepAxis axis;
    std::vector<SweepRow> rows;
};

/// One training per grid point. Axes: augmentation operator subsets
/// {none, noise, invert, scaling, all}; training fractions
/// {5, 10, 25, 50, 75, 90}%; scaling probabilities {0.1 .. 0.5}.
SweepTable sweep(const SegmentedDataset& data, const TrainConfig& cfg, const UNetConfig& model_cfg,
                 SweepAxis axis);

}  // namespace swd
