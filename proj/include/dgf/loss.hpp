#pragma once

#include <cstdint>
#include <vector>

#include "dgf/dynamic_graph.hpp"
#include "dgf/matrix.hpp"

namespace dgf {

enum class CeReduction { Mean, Sum };

struct CrossEntropyResult {
    double loss = 0.0;
    Matrix grad_logits;  // (probs - onehot) on masked rows, zero elsewhere
};

/// Masked cross-entropy -ln(prob of the true class), mean- (default) or
/// sum-reduced over the mask. The probability inside the log is floored at
/// 1e-12. The returned gradient is taken at the logits, through the softmax.
CrossEntropyResult cross_entropy(const Matrix& probs, const std::vector<int>& labels,
                                 const std::vector<std::uint8_t>& mask,
                                 CeReduction reduction = CeReduction::Mean);

/// Reward bookkeeping: a_i = 1 iff node i is predicted correctly, E_a is an
/// exponential moving average (momentum 0.9) of the masked accuracy,
/// initialized to the first observed accuracy, and delta_i = E_a - a_i on
/// masked nodes (0 elsewhere). delta is negative exactly on correctly
/// classified nodes whenever 0 < E_a < 1.
struct RewardState {
    double running_accuracy = 0.0;
    double momentum = 0.9;
    bool initialized = false;
    std::vector<double> delta;
};

RewardState compute_rewards(const std::vector<int>& predictions, const std::vector<int>& labels,
                            const std::vector<std::uint8_t>& mask, RewardState state);

/// Sum over both directed slots of every retained edge of
/// delta(source) * ln(weight), repeated for each of the num_layers layers
/// that share the graph. Weights are floored at 1e-12 inside the log.
double graph_loss(const std::vector<GraphEdge>& edges, const std::vector<double>& delta,
                  int num_layers);

/// l_ce + lambda2 * l_graph.
double total_loss(double l_ce, double l_graph, double lambda2);

/// Row-wise argmax (tie broken by lower column).
std::vector<int> argmax_rows(const Matrix& probs);

}  // namespace dgf
