#include "dgf/gcn.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dgf/errors.hpp"

namespace dgf {

namespace {

void append_g17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

double parse_double(const std::string& tok, const char* what) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw DataError(std::string("checkpoint: bad numeric for ") + what + ": '" + tok + "'");
    }
    return v;
}

}  // namespace

double GcnModel::theta() const { return std::exp(tau); }

GcnModel init_model(std::size_t input_dim, std::size_t hidden_dim, std::size_t class_count,
                    double dropout_rate, double theta0, Rng& rng) {
    if (input_dim == 0 || hidden_dim == 0 || class_count == 0) {
        throw std::invalid_argument("init_model: dimensions must be positive");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw std::invalid_argument("init_model: dropout rate must lie in [0,1)");
    }
    if (theta0 <= 0.0) {
        throw std::invalid_argument("init_model: theta0 must be positive");
    }
    GcnModel m;
    m.dropout_rate = dropout_rate;
    m.tau = std::log(theta0);
    m.W1 = Matrix(input_dim, hidden_dim);
    m.W2 = Matrix(hidden_dim, class_count);
    const double b1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
    for (double& v : m.W1.values()) v = rng.uniform(-b1, b1);
    const double b2 = std::sqrt(6.0 / static_cast<double>(hidden_dim + class_count));
    for (double& v : m.W2.values()) v = rng.uniform(-b2, b2);
    return m;
}

Matrix normalize_adjacency(const Matrix& A_prime) {
    if (A_prime.rows() != A_prime.cols()) {
        throw std::invalid_argument("normalize_adjacency: adjacency must be square");
    }
    const std::size_t n = A_prime.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (A_prime(i, j) != A_prime(j, i)) {
                throw std::invalid_argument("normalize_adjacency: adjacency must be symmetric");
            }

    // inverse sqrt degrees of A' + I
    std::vector<double> inv_sqrt_deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 1.0;  // self loop
        for (std::size_t j = 0; j < n; ++j) deg += A_prime(i, j);
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    Matrix a_hat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double tilde = A_prime(i, j) + (i == j ? 1.0 : 0.0);
            a_hat(i, j) = inv_sqrt_deg[i] * tilde * inv_sqrt_deg[j];
        }
    }
    return a_hat;
}

Matrix row_softmax(const Matrix& logits) {
    Matrix probs(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        double row_max = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols(); ++j) row_max = std::max(row_max, logits(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            const double e = std::exp(logits(i, j) - row_max);
            probs(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) probs(i, j) /= denom;
    }
    return probs;
}

ForwardTrace gcn_forward(const Matrix& A_hat, const Matrix& H0, const GcnModel& model,
                         bool training, Rng* dropout_rng) {
    if (A_hat.rows() != A_hat.cols() || A_hat.rows() != H0.rows()) {
        throw std::invalid_argument("gcn_forward: A_hat/H0 row mismatch");
    }
    if (H0.cols() != model.W1.rows()) {
        throw std::invalid_argument("gcn_forward: H0 has " + std::to_string(H0.cols()) +
                                    " columns but W1 expects " + std::to_string(model.W1.rows()));
    }
    const double p = model.dropout_rate;
    if (training && p > 0.0 && dropout_rng == nullptr) {
        throw std::invalid_argument("gcn_forward: dropout needs an rng in training mode");
    }

    ForwardTrace t;
    t.A_hat = A_hat;
    t.H0 = H0;
    t.training = training;
    t.Z1_pre = matmul(matmul(A_hat, H0), model.W1);
    t.H1 = relu(t.Z1_pre);

    t.dropout_mask = Matrix(t.H1.rows(), t.H1.cols(), 1.0);
    if (training && p > 0.0) {
        const double inv_keep = 1.0 / (1.0 - p);
        for (std::size_t i = 0; i < t.H1.rows(); ++i) {
            for (std::size_t j = 0; j < t.H1.cols(); ++j) {
                if (dropout_rng->uniform() < p) {
                    t.dropout_mask(i, j) = 0.0;
                    t.H1(i, j) = 0.0;
                } else {
                    t.H1(i, j) *= inv_keep;
                }
            }
        }
    }

    t.logits = matmul(matmul(A_hat, t.H1), model.W2);
    t.probs = row_softmax(t.logits);
    return t;
}

GcnGradients gcn_backward(const ForwardTrace& trace, const Matrix& grad_logits,
                          const GcnModel& model) {
    if (!trace.training) {
        throw std::invalid_argument("gcn_backward: trace must come from a training-mode forward");
    }
    if (!grad_logits.same_shape(trace.logits)) {
        throw std::invalid_argument("gcn_backward: gradient shape differs from logits");
    }
    if (trace.H0.cols() != model.W1.rows() || trace.H1.cols() != model.W2.rows()) {
        throw std::invalid_argument("gcn_backward: trace does not match model shapes");
    }

    const Matrix a_hat_t = transpose(trace.A_hat);
    GcnGradients g;
    // logits = (A_hat H1) W2
    g.dW2 = matmul(transpose(matmul(trace.A_hat, trace.H1)), grad_logits);
    Matrix d_h1 = matmul(matmul(a_hat_t, grad_logits), transpose(model.W2));

    // back through dropout and ReLU
    const double p = model.dropout_rate;
    const double inv_keep = p > 0.0 ? 1.0 / (1.0 - p) : 1.0;
    const Matrix relu_mask = relu_grad_mask(trace.Z1_pre);
    for (std::size_t i = 0; i < d_h1.values().size(); ++i) {
        d_h1.values()[i] *= trace.dropout_mask.values()[i] * inv_keep * relu_mask.values()[i];
    }

    // Z1_pre = (A_hat H0) W1
    g.dW1 = matmul(transpose(matmul(trace.A_hat, trace.H0)), d_h1);
    return g;
}

double theta_tau_gradient(const std::vector<GraphEdge>& edges, const std::vector<double>& delta,
                          double theta, int num_layers) {
    if (num_layers < 1) throw std::invalid_argument("theta_tau_gradient: num_layers must be >= 1");
    double acc = 0.0;
    for (const GraphEdge& e : edges) {
        acc += (delta[e.i] + delta[e.j]) * (-e.dist_sq);  // both directed slots
    }
    return static_cast<double>(num_layers) * theta * acc;
}

std::string format_checkpoint(const GcnModel& model) {
    std::string out;
    out += "dgfc-checkpoint 1\n";
    out += "input_dim " + std::to_string(model.input_dim()) + "\n";
    out += "hidden_dim " + std::to_string(model.hidden_dim()) + "\n";
    out += "class_count " + std::to_string(model.class_count()) + "\n";
    out += "dropout_rate ";
    append_g17(out, model.dropout_rate);
    out += "\ntau ";
    append_g17(out, model.tau);
    out += "\n";
    for (const auto* w : {&model.W1, &model.W2}) {
        out += (w == &model.W1) ? "W1\n" : "W2\n";
        for (std::size_t i = 0; i < w->rows(); ++i) {
            for (std::size_t j = 0; j < w->cols(); ++j) {
                if (j > 0) out += ' ';
                append_g17(out, (*w)(i, j));
            }
            out += '\n';
        }
    }
    return out;
}

GcnModel parse_checkpoint(const std::string& text) {
    std::istringstream in(text);
    std::string key;
    std::string version;
    in >> key >> version;
    if (key != "dgfc-checkpoint" || version != "1") {
        throw DataError("checkpoint: unrecognized header '" + key + " " + version + "'");
    }
    std::size_t input_dim = 0, hidden_dim = 0, class_count = 0;
    GcnModel m;
    auto expect = [&](const char* name) {
        in >> key;
        if (key != name) throw DataError(std::string("checkpoint: expected '") + name + "', got '" + key + "'");
    };
    expect("input_dim");
    in >> input_dim;
    expect("hidden_dim");
    in >> hidden_dim;
    expect("class_count");
    in >> class_count;
    std::string tok;
    expect("dropout_rate");
    in >> tok;
    m.dropout_rate = parse_double(tok, "dropout_rate");
    expect("tau");
    in >> tok;
    m.tau = parse_double(tok, "tau");
    if (!in || input_dim == 0 || hidden_dim == 0 || class_count == 0) {
        throw DataError("checkpoint: bad dimensions");
    }

    expect("W1");
    m.W1 = Matrix(input_dim, hidden_dim);
    for (double& v : m.W1.values()) {
        in >> tok;
        if (!in) throw DataError("checkpoint: truncated W1 block");
        v = parse_double(tok, "W1");
    }
    expect("W2");
    m.W2 = Matrix(hidden_dim, class_count);
    for (double& v : m.W2.values()) {
        in >> tok;
        if (!in) throw DataError("checkpoint: truncated W2 block");
        v = parse_double(tok, "W2");
    }
    return m;
}

void save_checkpoint(const GcnModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("checkpoint: cannot open '" + path + "' for writing");
    out << format_checkpoint(model);
    if (!out) throw DataError("checkpoint: write to '" + path + "' failed");
}

GcnModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_checkpoint(buf.str());
}

}  // namespace dgf
