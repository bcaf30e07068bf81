#include "dgf/dynamic_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dgf {

Matrix fuse_features(const Matrix& X, const Matrix& C, const Matrix* C_prev, double lambda1) {
    if (X.cols() != C.rows() || C.rows() != C.cols()) {
        throw std::invalid_argument("fuse_features: X is " + std::to_string(X.rows()) + "x" +
                                    std::to_string(X.cols()) + " but C is " +
                                    std::to_string(C.rows()) + "x" + std::to_string(C.cols()));
    }
    if (lambda1 < 0.0) {
        throw std::invalid_argument("fuse_features: lambda1 must be >= 0");
    }
    if (C_prev == nullptr || lambda1 == 0.0) {
        return matmul(X, C);
    }
    if (!C_prev->same_shape(C)) {
        throw std::invalid_argument("fuse_features: C_prev shape differs from C");
    }
    Matrix blended = C;
    for (std::size_t i = 0; i < blended.values().size(); ++i) {
        blended.values()[i] += lambda1 * C_prev->values()[i];
    }
    return matmul(X, blended);
}

Matrix affinity_from_distances(const Matrix& dist_sq, double theta) {
    if (theta <= 0.0) {
        throw std::invalid_argument("affinity: theta must be positive, got " +
                                    std::to_string(theta));
    }
    if (dist_sq.rows() != dist_sq.cols()) {
        throw std::invalid_argument("affinity: distance matrix must be square");
    }
    Matrix A(dist_sq.rows(), dist_sq.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        A(i, i) = 1.0;
        for (std::size_t j = i + 1; j < A.cols(); ++j) {
            const double a = std::exp(-theta * dist_sq(i, j));
            A(i, j) = a;
            A(j, i) = a;
        }
    }
    return A;
}

Matrix pairwise_affinity(const Matrix& H, double theta) {
    return affinity_from_distances(pairwise_sq_euclidean(H), theta);
}

std::pair<Matrix, std::vector<GraphEdge>> knn_sparsify(const Matrix& A, std::size_t k) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("knn_sparsify: adjacency must be square");
    }
    const std::size_t n = A.rows();
    if (k < 1 || k >= n) {
        throw std::invalid_argument("knn_sparsify: k = " + std::to_string(k) +
                                    " must satisfy 1 <= k < N = " + std::to_string(n));
    }

    Matrix a_prime(n, n, 0.0);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));  // self excluded
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (A(i, a) != A(i, b)) return A(i, a) > A(i, b);
            return a < b;
        });
        for (std::size_t t = 0; t < k; ++t) {
            const std::size_t j = order[t];
            a_prime(i, j) = 1.0;
            a_prime(j, i) = 1.0;  // union symmetrization
        }
    }

    std::vector<GraphEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (a_prime(i, j) != 0.0) {
                edges.push_back({i, j, A(i, j), 0.0});
            }
        }
    }
    return {std::move(a_prime), std::move(edges)};
}

SubjectGraph build_subject_graph(const Matrix& H, double theta, std::size_t k) {
    SubjectGraph g;
    g.theta = theta;
    g.k = k;
    const Matrix dist_sq = pairwise_sq_euclidean(H);
    g.A = affinity_from_distances(dist_sq, theta);
    auto [a_prime, edges] = knn_sparsify(g.A, k);
    g.A_prime = std::move(a_prime);
    g.edges = std::move(edges);
    for (GraphEdge& e : g.edges) e.dist_sq = dist_sq(e.i, e.j);
    return g;
}

void refresh_edge_weights(std::vector<GraphEdge>& edges, double theta) {
    if (theta <= 0.0) {
        throw std::invalid_argument("refresh_edge_weights: theta must be positive");
    }
    for (GraphEdge& e : edges) e.weight = std::exp(-theta * e.dist_sq);
}

double median_heuristic_theta(const Matrix& H) {
    const Matrix dist_sq = pairwise_sq_euclidean(H);
    std::vector<double> pairs;
    pairs.reserve(H.rows() * (H.rows() - 1) / 2);
    for (std::size_t i = 0; i < H.rows(); ++i)
        for (std::size_t j = i + 1; j < H.rows(); ++j) pairs.push_back(dist_sq(i, j));
    if (pairs.empty()) return 1.0;
    std::sort(pairs.begin(), pairs.end());
    const std::size_t mid = pairs.size() / 2;
    const double median =
        pairs.size() % 2 == 1 ? pairs[mid] : 0.5 * (pairs[mid - 1] + pairs[mid]);
    return median > 0.0 ? 1.0 / median : 1.0;
}

}  // namespace dgf
