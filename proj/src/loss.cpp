#include "dgf/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace dgf {

namespace {
constexpr double kLogFloor = 1e-12;
}

CrossEntropyResult cross_entropy(const Matrix& probs, const std::vector<int>& labels,
                                 const std::vector<std::uint8_t>& mask, CeReduction reduction) {
    const std::size_t n = probs.rows();
    if (labels.size() != n || mask.size() != n) {
        throw std::invalid_argument("cross_entropy: labels/mask size mismatch");
    }
    std::size_t masked = 0;
    for (std::uint8_t m : mask) masked += m ? 1 : 0;
    if (masked == 0) throw std::invalid_argument("cross_entropy: empty mask");

    const double scale = reduction == CeReduction::Mean ? 1.0 / static_cast<double>(masked) : 1.0;
    CrossEntropyResult res;
    res.grad_logits = Matrix(n, probs.cols(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        const int label = labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= probs.cols()) {
            throw std::invalid_argument("cross_entropy: label out of range");
        }
        acc += -std::log(std::max(probs(i, static_cast<std::size_t>(label)), kLogFloor));
        for (std::size_t j = 0; j < probs.cols(); ++j) {
            res.grad_logits(i, j) = probs(i, j) * scale;
        }
        res.grad_logits(i, static_cast<std::size_t>(label)) -= scale;
    }
    res.loss = acc * scale;
    return res;
}

RewardState compute_rewards(const std::vector<int>& predictions, const std::vector<int>& labels,
                            const std::vector<std::uint8_t>& mask, RewardState state) {
    const std::size_t n = predictions.size();
    if (labels.size() != n || mask.size() != n) {
        throw std::invalid_argument("compute_rewards: size mismatch");
    }
    std::size_t masked = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        ++masked;
        if (predictions[i] == labels[i]) ++correct;
    }
    if (masked == 0) throw std::invalid_argument("compute_rewards: empty mask");

    const double acc = static_cast<double>(correct) / static_cast<double>(masked);
    if (state.initialized) {
        state.running_accuracy =
            state.momentum * state.running_accuracy + (1.0 - state.momentum) * acc;
    } else {
        state.running_accuracy = acc;
        state.initialized = true;
    }

    state.delta.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        const double a_i = predictions[i] == labels[i] ? 1.0 : 0.0;
        state.delta[i] = state.running_accuracy - a_i;
    }
    return state;
}

double graph_loss(const std::vector<GraphEdge>& edges, const std::vector<double>& delta,
                  int num_layers) {
    if (num_layers < 1) throw std::invalid_argument("graph_loss: num_layers must be >= 1");
    double acc = 0.0;
    for (const GraphEdge& e : edges) {
        const double log_w = std::log(std::max(e.weight, kLogFloor));
        acc += (delta[e.i] + delta[e.j]) * log_w;  // slots (i,j) and (j,i)
    }
    return static_cast<double>(num_layers) * acc;
}

double total_loss(double l_ce, double l_graph, double lambda2) {
    if (lambda2 < 0.0) throw std::invalid_argument("total_loss: lambda2 must be >= 0");
    return l_ce + lambda2 * l_graph;
}

std::vector<int> argmax_rows(const Matrix& probs) {
    std::vector<int> out(probs.rows(), 0);
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs.cols(); ++j) {
            if (probs(i, j) > probs(i, best)) best = j;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

}  // namespace dgf
