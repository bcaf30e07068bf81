#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dgf/dynamic_graph.hpp"
#include "dgf/matrix.hpp"
#include "dgf/rng.hpp"

namespace dgf {

/// Two-layer graph convolution model. The graph kernel parameter is stored
/// as tau with theta = exp(tau), which keeps theta positive without
/// constraints on the optimizer.
struct GcnModel {
    Matrix W1;  // input_dim x hidden_dim
    Matrix W2;  // hidden_dim x class_count
    double tau = 0.0;
    double dropout_rate = 0.1;

    std::size_t input_dim() const { return W1.rows(); }
    std::size_t hidden_dim() const { return W1.cols(); }
    std::size_t class_count() const { return W2.cols(); }
    double theta() const;
};

/// Glorot-uniform initialization (+-sqrt(6/(fan_in+fan_out))), filled in
/// row-major order from the given stream.
GcnModel init_model(std::size_t input_dim, std::size_t hidden_dim, std::size_t class_count,
                    double dropout_rate, double theta0, Rng& rng);

/// A_hat = D^{-1/2} (A' + I) D^{-1/2} with D the degree matrix of A' + I.
/// Input must be symmetric with zero diagonal; isolated nodes come out with
/// A_hat(i,i) = 1.
Matrix normalize_adjacency(const Matrix& A_prime);

/// Everything the backward pass needs from one forward evaluation.
struct ForwardTrace {
    Matrix A_hat;
    Matrix H0;
    Matrix Z1_pre;        // A_hat H0 W1
    Matrix H1;            // dropout(relu(Z1_pre))
    Matrix logits;        // A_hat H1 W2
    Matrix probs;         // row softmax of logits
    Matrix dropout_mask;  // binary keep mask (all ones outside training)
    bool training = false;
};

/// Row-wise softmax with per-row max subtraction.
Matrix row_softmax(const Matrix& logits);

/// Forward pass. With training = true, inverted dropout (scale 1/(1-p))
/// is applied after the first ReLU using the given stream; dropout_rng may
/// be null when training is false or the rate is 0.
ForwardTrace gcn_forward(const Matrix& A_hat, const Matrix& H0, const GcnModel& model,
                         bool training, Rng* dropout_rng);

struct GcnGradients {
    Matrix dW1;
    Matrix dW2;
};

/// Reverse-mode gradients of the loss with respect to W1 and W2, given the
/// loss gradient at the logits. The trace must come from a training-mode
/// forward pass on the same model.
GcnGradients gcn_backward(const ForwardTrace& trace, const Matrix& grad_logits,
                          const GcnModel& model);

/// d(graph loss)/d(tau) with the KNN topology held constant: with
/// log a_ij = -theta * dist_sq, each directed slot (i,j) contributes
/// delta_i * (-dist_sq), summed over both directions, times the layer count,
/// chained through d(theta)/d(tau) = theta.
double theta_tau_gradient(const std::vector<GraphEdge>& edges, const std::vector<double>& delta,
                          double theta, int num_layers);

/// Text checkpoint with named arrays at 17 significant digits; save/load
/// round-trips are bit-exact.
void save_checkpoint(const GcnModel& model, const std::string& path);
GcnModel load_checkpoint(const std::string& path);
std::string format_checkpoint(const GcnModel& model);
GcnModel parse_checkpoint(const std::string& text);

}  // namespace dgf
