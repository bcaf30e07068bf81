#pragma once

#include <cstddef>
#include <vector>

#include "dgf/matrix.hpp"

namespace dgf {

struct FeatureScoringOptions {
    double alpha = 0.5;          // weight of the Fisher factor in the combination
    int mi_bins = 10;            // equal-width bins for mutual information
    bool rescale_scores = true;  // min-max rescale both factors to [0,1] first
    bool normalized_mi = false;  // divide MI by the joint entropy
};

/// Per-feature Fisher criterion |u1 - u2|^2 / (var1 + var2 + 1e-12) with
/// population (1/n) variances. Labels must contain exactly two classes,
/// each with at least one sample.
std::vector<double> fisher_scores(const Matrix& X, const std::vector<int>& y);

/// Per-feature mutual information (natural log) between labels and the
/// feature discretized by equal-width binning over its observed range.
/// Constant features occupy a single bin and score 0. Cells with zero joint
/// probability contribute 0. With normalized = true the value is divided by
/// the joint entropy.
std::vector<double> mutual_information_scores(const Matrix& X, const std::vector<int>& y,
                                              int bins, bool normalized = false);

/// Min-max rescale to [0,1]. A constant vector maps to all ones when its
/// value is positive and all zeros otherwise (no spread means no ranking
/// information either way).
std::vector<double> min_max_rescale(const std::vector<double>& v);

/// s_i = alpha * w_i + (1 - alpha) * m_i, optionally min-max rescaling both
/// inputs first. alpha must lie in [0,1].
std::vector<double> combine_scores(const std::vector<double>& w, const std::vector<double>& m,
                                   double alpha, bool rescale = true);

/// Rank-one feature adjacency S = s s^T.
Matrix feature_adjacency(const std::vector<double>& s);

struct EnergyResult {
    double r = 0.0;  // damping 0.9 / rho(S)
    Matrix C;        // (I - rS)^{-1} - I
};

/// General path: rho by power iteration, then a dense solve of
/// (I - rS) Z = I and C = Z - I. Rejects rho(S) == 0 (no informative
/// feature). rS has spectral radius 0.9 < 1, so I - rS is never singular.
EnergyResult energy_matrix(const Matrix& S);

/// Rank-one fast path for S = s s^T: C = r s s^T / (1 - r |s|^2)
/// = 9 s s^T / |s|^2. Must agree with the general path to 1e-8 relative.
EnergyResult energy_matrix_rank_one(const std::vector<double>& s);

/// Truncated series sum_{k=1..terms} (rS)^k. Converges to C at rate 0.9^k;
/// used as an independent route for checking the closed forms.
Matrix energy_matrix_series(const Matrix& S, double r, int terms);

/// Relevance scores c~ = C e (row sums).
std::vector<double> relevance_scores(const Matrix& C);

/// Indices of the k largest scores, descending, ties broken by lower index.
std::vector<std::size_t> select_top_k(const std::vector<double>& c_tilde, std::size_t k);

/// Everything the feature-graph stage produces, kept together so the
/// trainer and the CLI can report it.
struct FeatureGraphState {
    std::vector<double> w;        // Fisher scores (raw)
    std::vector<double> m;        // mutual-information scores (raw)
    double alpha = 0.5;
    std::vector<double> s;        // combined scores
    Matrix S;                     // s s^T
    double rho = 0.0;             // spectral radius of S (power iteration)
    double r = 0.0;               // 0.9 / rho
    Matrix C;                     // energy matrix
    std::vector<double> c_tilde;  // relevance scores C e
};

FeatureGraphState build_feature_graph(const Matrix& X, const std::vector<int>& y,
                                      const FeatureScoringOptions& opts);

}  // namespace dgf
