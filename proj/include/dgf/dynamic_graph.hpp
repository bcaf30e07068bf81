#pragma once

#include <cstddef>
#include <vector>

#include "dgf/matrix.hpp"

namespace dgf {

/// One retained undirected subject-graph edge (i < j) with its Gaussian
/// affinity weight and the squared distance it was derived from. dist_sq is
/// kept so edge weights can be refreshed when the kernel parameter moves
/// without rebuilding the topology.
struct GraphEdge {
    std::size_t i = 0;
    std::size_t j = 0;
    double weight = 0.0;
    double dist_sq = 0.0;
};

/// H = X (C + lambda1 * C_prev), or H = X C when C_prev is null or
/// lambda1 contributes nothing. Blending the previous step's energy matrix
/// into the current weighting keeps the fused representation close to the
/// previous step's.
Matrix fuse_features(const Matrix& X, const Matrix& C, const Matrix* C_prev, double lambda1);

/// exp(-theta * dist_sq) applied elementwise; diagonal forced to exactly 1.
Matrix affinity_from_distances(const Matrix& dist_sq, double theta);

/// Gaussian affinity a_ij = exp(-theta * |h_i - h_j|^2) over the rows of H.
/// Symmetric with unit diagonal. theta must be positive (during training it
/// is parameterized as exp(tau), so positivity is structural there).
Matrix pairwise_affinity(const Matrix& H, double theta);

/// Keeps each node's k highest-affinity neighbors (self excluded, ties
/// broken by lower index) and symmetrizes by union: A'(i,j) = 1 if either
/// direction selected the other. Returns the binary adjacency plus the
/// retained upper-triangle edges carrying the affinity weights (dist_sq is
/// left 0; build_subject_graph fills it).
std::pair<Matrix, std::vector<GraphEdge>> knn_sparsify(const Matrix& A, std::size_t k);

struct SubjectGraph {
    Matrix A;                      // weighted affinities
    Matrix A_prime;                // binary KNN-union adjacency, zero diagonal
    std::vector<GraphEdge> edges;  // retained i<j pairs
    double theta = 1.0;
    std::size_t k = 0;
};

/// Full construction: pairwise squared distances over the rows of H, the
/// Gaussian affinity at theta, and the KNN-union sparsification.
SubjectGraph build_subject_graph(const Matrix& H, double theta, std::size_t k);

/// Recomputes edge weights exp(-theta * dist_sq) in place on a frozen
/// topology.
void refresh_edge_weights(std::vector<GraphEdge>& edges, double theta);

/// Median of the off-diagonal pairwise squared distances of H's rows;
/// 1/median is the usual starting bandwidth for the Gaussian kernel.
/// Falls back to 1.0 when the median is not positive (duplicate-heavy data).
double median_heuristic_theta(const Matrix& H);

}  // namespace dgf
