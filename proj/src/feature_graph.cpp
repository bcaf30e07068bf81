#include "dgf/feature_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dgf {

namespace {

constexpr double kVarianceGuard = 1e-12;

void require_two_classes(const std::vector<int>& y, std::size_t& n0, std::size_t& n1) {
    n0 = n1 = 0;
    for (int label : y) {
        if (label == 0) {
            ++n0;
        } else if (label == 1) {
            ++n1;
        } else {
            throw std::invalid_argument("feature scoring: labels must be 0 or 1, got " +
                                        std::to_string(label));
        }
    }
    if (n0 == 0 || n1 == 0) {
        throw std::invalid_argument("feature scoring: both classes must be present");
    }
}

}  // namespace

std::vector<double> fisher_scores(const Matrix& X, const std::vector<int>& y) {
    if (X.rows() != y.size()) {
        throw std::invalid_argument("fisher_scores: row/label count mismatch");
    }
    if (X.rows() == 0) throw std::invalid_argument("fisher_scores: empty dataset");
    std::size_t n0 = 0, n1 = 0;
    require_two_classes(y, n0, n1);

    const std::size_t d = X.cols();
    std::vector<double> scores(d, 0.0);
    for (std::size_t f = 0; f < d; ++f) {
        double sum0 = 0.0, sum1 = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) {
            (y[i] == 0 ? sum0 : sum1) += X(i, f);
        }
        const double mean0 = sum0 / static_cast<double>(n0);
        const double mean1 = sum1 / static_cast<double>(n1);
        double var0 = 0.0, var1 = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) {
            if (y[i] == 0) {
                const double dv = X(i, f) - mean0;
                var0 += dv * dv;
            } else {
                const double dv = X(i, f) - mean1;
                var1 += dv * dv;
            }
        }
        var0 /= static_cast<double>(n0);
        var1 /= static_cast<double>(n1);
        const double gap = mean0 - mean1;
        scores[f] = gap * gap / (var0 + var1 + kVarianceGuard);
    }
    return scores;
}

std::vector<double> mutual_information_scores(const Matrix& X, const std::vector<int>& y,
                                              int bins, bool normalized) {
    if (X.rows() != y.size()) {
        throw std::invalid_argument("mutual_information_scores: row/label count mismatch");
    }
    if (X.rows() == 0) throw std::invalid_argument("mutual_information_scores: empty dataset");
    if (bins < 2) throw std::invalid_argument("mutual_information_scores: bins must be >= 2");
    std::size_t n0 = 0, n1 = 0;
    require_two_classes(y, n0, n1);

    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> scores(d, 0.0);
    std::vector<std::size_t> joint(static_cast<std::size_t>(bins) * 2);

    for (std::size_t f = 0; f < d; ++f) {
        double lo = X(0, f), hi = X(0, f);
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, X(i, f));
            hi = std::max(hi, X(i, f));
        }
        const double width = hi - lo;

        std::fill(joint.begin(), joint.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            int b = 0;
            if (width > 0.0) {
                b = static_cast<int>((X(i, f) - lo) / width * bins);
                b = std::clamp(b, 0, bins - 1);
            }
            ++joint[static_cast<std::size_t>(b) * 2 + static_cast<std::size_t>(y[i])];
        }

        const double py[2] = {static_cast<double>(n0) * inv_n, static_cast<double>(n1) * inv_n};
        double mi = 0.0;
        double joint_entropy = 0.0;
        for (int b = 0; b < bins; ++b) {
            const std::size_t row0 = joint[static_cast<std::size_t>(b) * 2];
            const std::size_t row1 = joint[static_cast<std::size_t>(b) * 2 + 1];
            const double pz = static_cast<double>(row0 + row1) * inv_n;
            if (pz == 0.0) continue;
            for (int cls = 0; cls < 2; ++cls) {
                const std::size_t cnt = cls == 0 ? row0 : row1;
                if (cnt == 0) continue;
                const double pzy = static_cast<double>(cnt) * inv_n;
                mi += pzy * std::log(pzy / (pz * py[cls]));
                joint_entropy -= pzy * std::log(pzy);
            }
        }
        if (mi < 0.0) mi = 0.0;  // tiny negative round-off on independent features
        scores[f] = (normalized && joint_entropy > 0.0) ? mi / joint_entropy : mi;
    }
    return scores;
}

std::vector<double> min_max_rescale(const std::vector<double>& v) {
    if (v.empty()) return {};
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(v.size());
    if (hi > lo) {
        const double inv = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) * inv;
    } else {
        std::fill(out.begin(), out.end(), hi > 0.0 ? 1.0 : 0.0);
    }
    return out;
}

std::vector<double> combine_scores(const std::vector<double>& w, const std::vector<double>& m,
                                   double alpha, bool rescale) {
    if (w.size() != m.size()) {
        throw std::invalid_argument("combine_scores: factor length mismatch");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("combine_scores: alpha must lie in [0,1], got " +
                                    std::to_string(alpha));
    }
    const std::vector<double>& wr = rescale ? min_max_rescale(w) : w;
    const std::vector<double>& mr = rescale ? min_max_rescale(m) : m;
    std::vector<double> s(w.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = wr[i] * alpha + mr[i] * (1.0 - alpha);
    return s;
}

Matrix feature_adjacency(const std::vector<double>& s) {
    const std::size_t d = s.size();
    Matrix S(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) S(i, j) = s[i] * s[j];
    return S;
}

EnergyResult energy_matrix(const Matrix& S) {
    if (S.rows() != S.cols()) {
        throw std::invalid_argument("energy_matrix: S must be square");
    }
    const SpectralResult rho = spectral_radius(S);
    if (!rho.converged) {
        throw std::runtime_error("energy_matrix: power iteration did not converge, last estimate " +
                                 std::to_string(rho.value));
    }
    if (rho.value <= 0.0) {
        throw std::invalid_argument(
            "energy_matrix: rho(S) is 0 -- every feature score is zero, so no feature is "
            "informative; check the inputs or the scoring options");
    }
    const double r = 0.9 / rho.value;
    const std::size_t d = S.rows();
    Matrix lhs = Matrix::identity(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) lhs(i, j) -= r * S(i, j);
    Matrix z = solve_linear(std::move(lhs), Matrix::identity(d));
    for (std::size_t i = 0; i < d; ++i) z(i, i) -= 1.0;
    return {r, std::move(z)};
}

EnergyResult energy_matrix_rank_one(const std::vector<double>& s) {
    double norm_sq = 0.0;
    for (double v : s) norm_sq += v * v;
    if (norm_sq <= 0.0) {
        throw std::invalid_argument(
            "energy_matrix: rho(S) is 0 -- every feature score is zero, so no feature is "
            "informative; check the inputs or the scoring options");
    }
    // (I - rS)^{-1} - I for S = s s^T collapses to r s s^T / (1 - r|s|^2),
    // and with r = 0.9/|s|^2 that is 9 s s^T / |s|^2.
    const double r = 0.9 / norm_sq;
    const double coef = 9.0 / norm_sq;
    const std::size_t d = s.size();
    Matrix C(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) C(i, j) = coef * s[i] * s[j];
    return {r, std::move(C)};
}

Matrix energy_matrix_series(const Matrix& S, double r, int terms) {
    if (S.rows() != S.cols()) {
        throw std::invalid_argument("energy_matrix_series: S must be square");
    }
    const Matrix step = scale(S, r);
    Matrix term = step;
    Matrix acc = step;
    for (int k = 2; k <= terms; ++k) {
        term = matmul(term, step);
        acc = add(acc, term);
    }
    return acc;
}

std::vector<double> relevance_scores(const Matrix& C) {
    if (C.rows() != C.cols()) {
        throw std::invalid_argument("relevance_scores: C must be square");
    }
    return row_sums(C);
}

std::vector<std::size_t> select_top_k(const std::vector<double>& c_tilde, std::size_t k) {
    if (k < 1 || k > c_tilde.size()) {
        throw std::invalid_argument("select_top_k: k = " + std::to_string(k) +
                                    " out of range [1, " + std::to_string(c_tilde.size()) + "]");
    }
    std::vector<std::size_t> order(c_tilde.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (c_tilde[a] != c_tilde[b]) return c_tilde[a] > c_tilde[b];
        return a < b;
    });
    order.resize(k);
    return order;
}

FeatureGraphState build_feature_graph(const Matrix& X, const std::vector<int>& y,
                                      const FeatureScoringOptions& opts) {
    FeatureGraphState state;
    state.alpha = opts.alpha;
    state.w = fisher_scores(X, y);
    state.m = mutual_information_scores(X, y, opts.mi_bins, opts.normalized_mi);
    state.s = combine_scores(state.w, state.m, opts.alpha, opts.rescale_scores);
    state.S = feature_adjacency(state.s);

    const SpectralResult rho = spectral_radius(state.S);
    if (!rho.converged) {
        throw std::runtime_error("build_feature_graph: spectral radius did not converge");
    }
    if (rho.value <= 0.0) {
        throw std::invalid_argument(
            "build_feature_graph: all combined feature scores are zero -- no feature is "
            "informative; check the inputs or the scoring options");
    }
    state.rho = rho.value;
    state.r = 0.9 / rho.value;

    // S is rank one by construction, so the closed form is exact and cheap.
    state.C = energy_matrix_rank_one(state.s).C;
    state.c_tilde = relevance_scores(state.C);
    return state;
}

}  // namespace dgf
