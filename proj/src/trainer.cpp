#include "dgf/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "dgf/dynamic_graph.hpp"
#include "dgf/errors.hpp"
#include "dgf/rng.hpp"

namespace dgf {

namespace {

constexpr int kGcnLayers = 2;  // both layers share the one subject graph

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string opt_g17(const std::optional<double>& v) { return v ? g17(*v) : "NA"; }

/// Adam (or plain gradient descent) over W1, W2 and tau. Weight decay is
/// added to the weight-matrix gradients; tau is not decayed.
class Optimizer {
public:
    Optimizer(const GcnModel& model, const TrainConfig& cfg)
        : cfg_(cfg),
          m1_(model.W1.rows(), model.W1.cols()),
          v1_(model.W1.rows(), model.W1.cols()),
          m2_(model.W2.rows(), model.W2.cols()),
          v2_(model.W2.rows(), model.W2.cols()) {}

    void step(GcnModel& model, const GcnGradients& grads, double dtau) {
        ++t_;
        if (cfg_.optimizer == OptimizerKind::Sgd) {
            sgd(model.W1, grads.dW1, cfg_.weight_decay);
            sgd(model.W2, grads.dW2, cfg_.weight_decay);
            model.tau -= cfg_.learning_rate * dtau;
            return;
        }
        adam(model.W1, grads.dW1, m1_, v1_, cfg_.weight_decay);
        adam(model.W2, grads.dW2, m2_, v2_, cfg_.weight_decay);
        adam_scalar(model.tau, dtau, m_tau_, v_tau_);
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    void sgd(Matrix& w, const Matrix& g, double wd) {
        for (std::size_t i = 0; i < w.values().size(); ++i) {
            w.values()[i] -= cfg_.learning_rate * (g.values()[i] + wd * w.values()[i]);
        }
    }

    void adam(Matrix& w, const Matrix& g, Matrix& m, Matrix& v, double wd) {
        const double c1 = 1.0 - std::pow(kBeta1, t_);
        const double c2 = 1.0 - std::pow(kBeta2, t_);
        for (std::size_t i = 0; i < w.values().size(); ++i) {
            const double grad = g.values()[i] + wd * w.values()[i];
            m.values()[i] = kBeta1 * m.values()[i] + (1.0 - kBeta1) * grad;
            v.values()[i] = kBeta2 * v.values()[i] + (1.0 - kBeta2) * grad * grad;
            const double mhat = m.values()[i] / c1;
            const double vhat = v.values()[i] / c2;
            w.values()[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + kEps);
        }
    }

    void adam_scalar(double& w, double grad, double& m, double& v) {
        const double c1 = 1.0 - std::pow(kBeta1, t_);
        const double c2 = 1.0 - std::pow(kBeta2, t_);
        m = kBeta1 * m + (1.0 - kBeta1) * grad;
        v = kBeta2 * v + (1.0 - kBeta2) * grad * grad;
        w -= cfg_.learning_rate * (m / c1) / (std::sqrt(v / c2) + kEps);
    }

    const TrainConfig cfg_;
    int t_ = 0;
    Matrix m1_, v1_, m2_, v2_;
    double m_tau_ = 0.0, v_tau_ = 0.0;
};

/// Runs fn(0..n-1) on up to `threads` workers. Results must be written to
/// per-index slots; the first exception wins and is rethrown after join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(threads, static_cast<int>(n));
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

Matrix select_columns(const Matrix& X, const std::vector<std::size_t>& cols) {
    Matrix out(X.rows(), cols.size());
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = X(i, cols[j]);
    return out;
}

Matrix select_rows(const Matrix& X, const std::vector<std::uint8_t>& mask) {
    std::size_t count = 0;
    for (std::uint8_t m : mask) count += m ? 1 : 0;
    Matrix out(count, X.cols());
    std::size_t r = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        if (!mask[i]) continue;
        for (std::size_t j = 0; j < X.cols(); ++j) out(r, j) = X(i, j);
        ++r;
    }
    return out;
}

void mean_std(const std::vector<double>& v, double& mean, double& std_out) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    std_out = std::sqrt(sq / static_cast<double>(v.size()));
}

void summarize(const std::vector<std::optional<double>>& vals, std::optional<double>& mean,
               std::optional<double>& stddev) {
    std::vector<double> defined;
    for (const auto& v : vals)
        if (v) defined.push_back(*v);
    if (defined.empty()) {
        mean.reset();
        stddev.reset();
        return;
    }
    double m = 0.0, s = 0.0;
    mean_std(defined, m, s);
    mean = m;
    stddev = s;
}

}  // namespace

FoldResult train_fold(const Dataset& ds, const std::vector<std::uint8_t>& train_mask,
                      const std::vector<std::uint8_t>& test_mask, const TrainConfig& cfg,
                      std::uint64_t fold_seed) {
    const std::size_t n = ds.size();
    if (train_mask.size() != n || (!test_mask.empty() && test_mask.size() != n)) {
        throw std::invalid_argument("train_fold: mask size mismatch");
    }
    if (!test_mask.empty()) {
        for (std::size_t i = 0; i < n; ++i)
            if (train_mask[i] && test_mask[i]) {
                throw std::invalid_argument("train_fold: masks overlap at row " + std::to_string(i));
            }
    }
    bool has0 = false, has1 = false;
    std::vector<int> y_train;
    for (std::size_t i = 0; i < n; ++i) {
        if (!train_mask[i]) continue;
        (ds.y[i] == 0 ? has0 : has1) = true;
        y_train.push_back(ds.y[i]);
    }
    if (!has0 || !has1) {
        throw std::invalid_argument("train_fold: training mask must cover both classes");
    }
    if (cfg.epochs < 1) throw std::invalid_argument("train_fold: epochs must be >= 1");
    if (cfg.knn_k >= n) {
        throw std::invalid_argument("train_fold: knn_k must be smaller than the node count");
    }

    FoldResult out;

    // Standardization and feature scoring see training rows only.
    out.scaler = fit_standardizer(ds.X, train_mask);
    const Matrix Xs = out.scaler.apply(ds.X);
    const Matrix X_train = select_rows(Xs, train_mask);
    const FeatureGraphState full_state = build_feature_graph(X_train, y_train, cfg.scoring_options());
    out.selected_features = select_top_k(full_state.c_tilde, cfg.top_k_features);

    const Matrix X_sel = select_columns(Xs, out.selected_features);
    std::vector<double> s_sel(out.selected_features.size());
    for (std::size_t i = 0; i < s_sel.size(); ++i) s_sel[i] = full_state.s[out.selected_features[i]];
    const Matrix C = energy_matrix_rank_one(s_sel).C;

    Matrix c_prev;
    bool has_prev = false;
    Matrix H = fuse_features(X_sel, C, nullptr, cfg.lambda1);

    Rng winit(Rng::derive(fold_seed, 1));
    Rng dropout_rng(Rng::derive(fold_seed, 2));
    GcnModel model = init_model(X_sel.cols(), cfg.hidden_dim, ds.class_names.size(), cfg.dropout,
                                median_heuristic_theta(H), winit);
    Optimizer optimizer(model, cfg);
    RewardState rewards;
    SubjectGraph graph;
    Matrix a_hat;

    out.history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double theta = model.theta();
        if (epoch > 0) {
            H = fuse_features(X_sel, C, has_prev ? &c_prev : nullptr, cfg.lambda1);
        }
        const bool rebuild =
            epoch == 0 || (cfg.rebuild_graph_every_epoch &&
                           (cfg.freeze_graph_after < 0 || epoch <= cfg.freeze_graph_after));
        if (rebuild) {
            graph = build_subject_graph(H, theta, cfg.knn_k);
            a_hat = normalize_adjacency(graph.A_prime);
        } else {
            refresh_edge_weights(graph.edges, theta);
        }

        const ForwardTrace trace = gcn_forward(a_hat, H, model, true, &dropout_rng);
        const CrossEntropyResult ce = cross_entropy(trace.probs, ds.y, train_mask, cfg.ce_reduction);
        const std::vector<int> preds = argmax_rows(trace.probs);
        rewards = compute_rewards(preds, ds.y, train_mask, std::move(rewards));

        std::size_t n_train = 0, n_correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!train_mask[i]) continue;
            ++n_train;
            if (preds[i] == ds.y[i]) ++n_correct;
        }
        const double train_acc = static_cast<double>(n_correct) / static_cast<double>(n_train);

        const double l_graph = graph_loss(graph.edges, rewards.delta, kGcnLayers);
        const double total = total_loss(ce.loss, l_graph, cfg.lambda2);
        if (!std::isfinite(total)) {
            throw DivergenceError("train_fold: non-finite loss at epoch " + std::to_string(epoch),
                                  epoch);
        }

        const GcnGradients grads = gcn_backward(trace, ce.grad_logits, model);
        const double dtau =
            cfg.lambda2 * theta_tau_gradient(graph.edges, rewards.delta, theta, kGcnLayers);
        optimizer.step(model, grads, dtau);

        out.history.push_back(
            {epoch, ce.loss, l_graph, total, train_acc, rewards.running_accuracy, theta});
        c_prev = C;
        has_prev = true;
    }

    out.probs = gcn_forward(a_hat, H, model, false, nullptr).probs;
    out.model = std::move(model);
    return out;
}

Metrics evaluate(const Matrix& probs, const std::vector<int>& labels,
                 const std::vector<std::uint8_t>& mask, int positive_class) {
    if (labels.size() != probs.rows() || mask.size() != probs.rows()) {
        throw std::invalid_argument("evaluate: size mismatch");
    }
    if (positive_class < 0 || static_cast<std::size_t>(positive_class) >= probs.cols()) {
        throw std::invalid_argument("evaluate: positive_class out of range");
    }
    std::size_t masked = 0;
    for (std::uint8_t m : mask) masked += m ? 1 : 0;
    if (masked == 0) throw std::invalid_argument("evaluate: empty mask");

    const std::vector<int> preds = argmax_rows(probs);
    Metrics mt;
    std::vector<std::pair<double, int>> scored;  // (positive score, is_positive)
    scored.reserve(masked);
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        if (!mask[i]) continue;
        const bool actual_pos = labels[i] == positive_class;
        const bool pred_pos = preds[i] == positive_class;
        if (actual_pos && pred_pos) ++mt.tp;
        if (actual_pos && !pred_pos) ++mt.fn;
        if (!actual_pos && pred_pos) ++mt.fp;
        if (!actual_pos && !pred_pos) ++mt.tn;
        scored.emplace_back(probs(i, static_cast<std::size_t>(positive_class)), actual_pos ? 1 : 0);
    }
    mt.acc = static_cast<double>(mt.tp + mt.tn) / static_cast<double>(masked);
    if (mt.tp + mt.fn > 0) mt.sen = static_cast<double>(mt.tp) / static_cast<double>(mt.tp + mt.fn);
    if (mt.tn + mt.fp > 0) mt.spe = static_cast<double>(mt.tn) / static_cast<double>(mt.tn + mt.fp);

    const long n_pos = mt.tp + mt.fn;
    const long n_neg = mt.tn + mt.fp;
    if (n_pos > 0 && n_neg > 0) {
        // Trapezoidal ROC over descending score thresholds; tied scores move
        // as one block, which yields the half-credit convention.
        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        double area = 0.0;
        long tp = 0, fp = 0, prev_tp = 0, prev_fp = 0;
        std::size_t i = 0;
        while (i < scored.size()) {
            const double score = scored[i].first;
            while (i < scored.size() && scored[i].first == score) {
                (scored[i].second ? tp : fp) += 1;
                ++i;
            }
            area += static_cast<double>(fp - prev_fp) * static_cast<double>(tp + prev_tp) / 2.0;
            prev_tp = tp;
            prev_fp = fp;
        }
        mt.auc = area / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    }
    return mt;
}

std::vector<int> stratified_folds(const std::vector<int>& y, int folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("stratified_folds: need at least 2 folds");
    if (y.size() < static_cast<std::size_t>(folds)) {
        throw std::invalid_argument("stratified_folds: fewer samples than folds");
    }
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) {
            throw std::invalid_argument("stratified_folds: labels must be 0 or 1");
        }
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    for (std::size_t g = 0; g < by_class.size(); ++g) {
        if (by_class[g].size() < static_cast<std::size_t>(folds)) {
            throw std::invalid_argument("stratified_folds: class " + std::to_string(g) + " has " +
                                        std::to_string(by_class[g].size()) +
                                        " samples, fewer than the fold count");
        }
    }

    Rng rng(Rng::derive(seed, 7));
    std::vector<int> fold_of(y.size(), 0);
    // Chained starting offsets keep the fold sizes within one of each other:
    // each class hands its remainder of oversized folds to a fresh range.
    int offset = 0;
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t t = 0; t < members.size(); ++t) {
            fold_of[members[t]] = static_cast<int>((offset + t) % static_cast<std::size_t>(folds));
        }
        offset = (offset + static_cast<int>(members.size() % static_cast<std::size_t>(folds))) % folds;
    }
    return fold_of;
}

CvResult cross_validate(const Dataset& ds, const TrainConfig& cfg) {
    const std::vector<int> fold_of = stratified_folds(ds.y, cfg.folds, cfg.seed);
    CvResult result;
    result.folds.resize(static_cast<std::size_t>(cfg.folds));

    parallel_for(static_cast<std::size_t>(cfg.folds), cfg.threads, [&](std::size_t f) {
        std::vector<std::uint8_t> train_mask(ds.size(), 0), test_mask(ds.size(), 0);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (fold_of[i] == static_cast<int>(f)) {
                test_mask[i] = 1;
            } else {
                train_mask[i] = 1;
            }
        }
        FoldResult fr = train_fold(ds, train_mask, test_mask, cfg, Rng::derive(cfg.seed, 1000 + f));
        CvFold& slot = result.folds[f];
        slot.metrics = evaluate(fr.probs, ds.y, test_mask, cfg.positive_class);
        slot.history = std::move(fr.history);
        slot.selected_features = std::move(fr.selected_features);
        slot.scaler = std::move(fr.scaler);
    });

    std::vector<double> accs;
    std::vector<std::optional<double>> sens, spes, aucs;
    for (const CvFold& f : result.folds) {
        accs.push_back(f.metrics.acc);
        sens.push_back(f.metrics.sen);
        spes.push_back(f.metrics.spe);
        aucs.push_back(f.metrics.auc);
    }
    mean_std(accs, result.summary.acc_mean, result.summary.acc_std);
    summarize(sens, result.summary.sen_mean, result.summary.sen_std);
    summarize(spes, result.summary.spe_mean, result.summary.spe_std);
    summarize(aucs, result.summary.auc_mean, result.summary.auc_std);
    return result;
}

GridResult grid_search(const Dataset& ds, const TrainConfig& base,
                       const std::vector<double>& lambda1_grid,
                       const std::vector<double>& lambda2_grid) {
    if (lambda1_grid.empty() || lambda2_grid.empty()) {
        throw std::invalid_argument("grid_search: grids must be non-empty");
    }
    GridResult result;
    result.cells.resize(lambda1_grid.size() * lambda2_grid.size());

    // Cells are independent cross-validations; parallelize across cells and
    // keep folds sequential inside each one.
    TrainConfig cell_cfg = base;
    cell_cfg.threads = 1;
    parallel_for(result.cells.size(), base.threads, [&](std::size_t idx) {
        TrainConfig cfg = cell_cfg;
        cfg.lambda1 = lambda1_grid[idx / lambda2_grid.size()];
        cfg.lambda2 = lambda2_grid[idx % lambda2_grid.size()];
        const CvResult cv = cross_validate(ds, cfg);
        result.cells[idx] = {cfg.lambda1, cfg.lambda2, cv.summary.acc_mean, cv.summary.acc_std};
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.cells.size(); ++i) {
        const GridCell& a = result.cells[i];
        const GridCell& b = result.cells[best];
        const bool better = a.mean_acc > b.mean_acc ||
                            (a.mean_acc == b.mean_acc &&
                             (a.lambda2 < b.lambda2 ||
                              (a.lambda2 == b.lambda2 && a.lambda1 < b.lambda1)));
        if (better) best = i;
    }
    result.best_index = best;
    return result;
}

std::vector<double> default_lambda1_grid() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

std::vector<double> default_lambda2_grid() { return {0.2, 0.4, 0.6, 0.8, 1.0}; }

std::string format_history_csv(const std::vector<EpochStats>& history) {
    std::string out = "epoch,l_ce,l_graph,total,train_acc,ema_acc,theta\n";
    for (const EpochStats& e : history) {
        out += std::to_string(e.epoch);
        out += ',';
        out += g17(e.l_ce);
        out += ',';
        out += g17(e.l_graph);
        out += ',';
        out += g17(e.total);
        out += ',';
        out += g17(e.train_acc);
        out += ',';
        out += g17(e.ema_acc);
        out += ',';
        out += g17(e.theta);
        out += '\n';
    }
    return out;
}

namespace {

void append_metrics_row(std::string& out, const std::string& tag, const Metrics& m) {
    out += tag + ',' + std::to_string(m.tp) + ',' + std::to_string(m.tn) + ',' +
           std::to_string(m.fp) + ',' + std::to_string(m.fn) + ',' + g17(m.acc) + ',' +
           opt_g17(m.sen) + ',' + opt_g17(m.spe) + ',' + opt_g17(m.auc) + '\n';
}

}  // namespace

std::string format_metrics_csv(const CvResult& cv) {
    std::string out = "fold,tp,tn,fp,fn,acc,sen,spe,auc\n";
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        append_metrics_row(out, std::to_string(f), cv.folds[f].metrics);
    }
    const CvSummary& s = cv.summary;
    out += "mean,,,,," + g17(s.acc_mean) + ',' + opt_g17(s.sen_mean) + ',' + opt_g17(s.spe_mean) +
           ',' + opt_g17(s.auc_mean) + '\n';
    out += "std,,,,," + g17(s.acc_std) + ',' + opt_g17(s.sen_std) + ',' + opt_g17(s.spe_std) + ',' +
           opt_g17(s.auc_std) + '\n';
    return out;
}

std::string format_grid_csv(const GridResult& grid) {
    std::string out = "lambda1,lambda2,mean_acc,std_acc\n";
    for (const GridCell& c : grid.cells) {
        out += g17(c.lambda1);
        out += ',';
        out += g17(c.lambda2);
        out += ',';
        out += g17(c.mean_acc);
        out += ',';
        out += g17(c.std_acc);
        out += '\n';
    }
    return out;
}

}  // namespace dgf
