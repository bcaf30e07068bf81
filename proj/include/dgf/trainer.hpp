#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dgf/dataset.hpp"
#include "dgf/feature_graph.hpp"
#include "dgf/gcn.hpp"
#include "dgf/loss.hpp"
#include "dgf/matrix.hpp"

namespace dgf {

enum class OptimizerKind { Adam, Sgd };

/// Training protocol knobs. The defaults are the published protocol:
/// lr 0.005, 50 epochs, dropout 0.1, weight decay 5e-4, KNN k = 8,
/// top 60 features, 5 folds.
struct TrainConfig {
    double learning_rate = 0.005;
    int epochs = 50;
    double dropout = 0.1;
    double weight_decay = 5e-4;
    std::size_t knn_k = 8;
    double lambda1 = 0.01;  // previous-step energy blending
    double lambda2 = 1.0;   // graph-loss weight
    double alpha = 0.5;     // Fisher vs mutual-information mix
    std::size_t top_k_features = 60;
    int mi_bins = 10;
    std::size_t hidden_dim = 16;
    std::uint64_t seed = 42;
    bool rebuild_graph_every_epoch = true;
    int freeze_graph_after = -1;  // fix the KNN topology after this epoch; -1 = never
    int folds = 5;
    OptimizerKind optimizer = OptimizerKind::Adam;
    CeReduction ce_reduction = CeReduction::Mean;
    bool rescale_scores = true;
    bool normalized_mi = false;
    int positive_class = 1;  // index into class_names used for SEN/SPE/AUC
    int threads = 1;         // folds and grid cells run in parallel when > 1

    FeatureScoringOptions scoring_options() const {
        return {alpha, mi_bins, rescale_scores, normalized_mi};
    }
};

/// Confusion counts and derived rates. sen/spe/auc are absent (not 0) when
/// their denominator is empty, e.g. a mask without positives.
struct Metrics {
    long tp = 0, tn = 0, fp = 0, fn = 0;
    double acc = 0.0;
    std::optional<double> sen, spe, auc;
};

struct EpochStats {
    int epoch = 0;
    double l_ce = 0.0;
    double l_graph = 0.0;
    double total = 0.0;
    double train_acc = 0.0;
    double ema_acc = 0.0;
    double theta = 0.0;  // kernel parameter used during the epoch
};

/// Everything one trained fold leaves behind.
struct FoldResult {
    GcnModel model;
    std::vector<EpochStats> history;
    std::vector<std::size_t> selected_features;  // columns of the original X, ranked
    Standardizer scaler;
    Matrix probs;  // inference-mode class probabilities for every node
};

/// Trains one transductive fold: features are scored and selected on
/// training rows only, the subject graph spans all rows, and the loss is
/// masked to the training rows. test_mask may be empty (full-data training);
/// when present it must be disjoint from train_mask. Throws DivergenceError
/// if the loss goes non-finite.
FoldResult train_fold(const Dataset& ds, const std::vector<std::uint8_t>& train_mask,
                      const std::vector<std::uint8_t>& test_mask, const TrainConfig& cfg,
                      std::uint64_t fold_seed);

/// Argmax predictions on the masked rows against the labels, with the given
/// class treated as positive. AUC is the trapezoidal area under the ROC of
/// the positive-class probability (ties get half credit).
Metrics evaluate(const Matrix& probs, const std::vector<int>& labels,
                 const std::vector<std::uint8_t>& mask, int positive_class);

/// Stratified fold assignment: indices of each class are shuffled with a
/// stream derived from the seed and dealt round-robin, with per-class
/// starting offsets chained so fold sizes differ by at most one. Every class
/// must have at least `folds` members.
std::vector<int> stratified_folds(const std::vector<int>& y, int folds, std::uint64_t seed);

struct CvFold {
    Metrics metrics;
    std::vector<EpochStats> history;
    std::vector<std::size_t> selected_features;
    Standardizer scaler;
};

struct CvSummary {
    double acc_mean = 0.0, acc_std = 0.0;
    std::optional<double> sen_mean, sen_std;
    std::optional<double> spe_mean, spe_std;
    std::optional<double> auc_mean, auc_std;
};

struct CvResult {
    std::vector<CvFold> folds;
    CvSummary summary;
};

CvResult cross_validate(const Dataset& ds, const TrainConfig& cfg);

struct GridCell {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double mean_acc = 0.0;
    double std_acc = 0.0;
};

struct GridResult {
    std::vector<GridCell> cells;  // lambda1-major order
    std::size_t best_index = 0;   // max mean accuracy; ties -> smaller lambda2, then lambda1
};

GridResult grid_search(const Dataset& ds, const TrainConfig& base,
                       const std::vector<double>& lambda1_grid,
                       const std::vector<double>& lambda2_grid);

std::vector<double> default_lambda1_grid();  // 1e-1 .. 1e-6
std::vector<double> default_lambda2_grid();  // 0.2, 0.4, 0.6, 0.8, 1.0

/// Comma-separated renderings shared by the CLI and the test suites, with
/// numerics at 17 significant digits so identical runs produce identical
/// bytes. Undefined metric cells render as NA.
std::string format_history_csv(const std::vector<EpochStats>& history);
std::string format_metrics_csv(const CvResult& cv);
std::string format_grid_csv(const GridResult& grid);

}  // namespace dgf
