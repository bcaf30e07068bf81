#include "dgf/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dgf {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a) + " vs " + shape_str(b));
    }
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw std::invalid_argument("from_rows: ragged rows");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: dimension mismatch " + shape_str(a) +
                                    " * " + shape_str(b));
    }
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Matrix out(n, m, 0.0);
    // i-k-j order: for each output entry the adds still happen in ascending
    // k, identical to the naive triple loop bit-for-bit, but cache friendly.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) {
                out(i, j) += aip * b(p, j);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] += b.values()[i];
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "subtract");
    Matrix out = a;
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] -= b.values()[i];
    return out;
}

Matrix scale(const Matrix& m, double c) {
    Matrix out = m;
    for (double& v : out.values()) v *= c;
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] *= b.values()[i];
    return out;
}

std::vector<double> row_sums(const Matrix& m) {
    std::vector<double> sums(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) sums[i] += m(i, j);
    return sums;
}

bool all_finite(const Matrix& m) {
    for (double v : m.values())
        if (!std::isfinite(v)) return false;
    return true;
}

SpectralResult spectral_radius(const Matrix& m, int max_iters, double tol) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("spectral_radius: non-square input " + shape_str(m));
    }
    const std::size_t n = m.rows();
    if (n == 0) return {0.0, 0, true};

    bool all_zero = true;
    for (double v : m.values()) {
        if (v != 0.0) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) return {0.0, 0, true};

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> u(n, 0.0);
    double lambda_prev = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += m(i, j) * v[j];
            u[i] = acc;
        }
        double lambda = 0.0;
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lambda += v[i] * u[i];
            norm_sq += u[i] * u[i];
        }
        const double norm = std::sqrt(norm_sq);
        if (norm == 0.0) return {0.0, it, true};  // v landed in the null space

        bool fixed_point = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double next = u[i] / norm;
            if (next != v[i]) fixed_point = false;
            v[i] = next;
        }
        if (it > 1 && (std::abs(lambda - lambda_prev) < tol || fixed_point)) {
            return {std::abs(lambda), it, true};
        }
        lambda_prev = lambda;
    }
    return {std::abs(lambda_prev), max_iters, false};
}

Matrix pairwise_sq_euclidean(const Matrix& h) {
    const std::size_t n = h.rows(), d = h.cols();
    std::vector<double> norm_sq(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) norm_sq[i] += h(i, k) * h(i, k);

    Matrix out(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += h(i, k) * h(j, k);
            double dist = norm_sq[i] + norm_sq[j] - 2.0 * dot;
            if (dist < 0.0) dist = 0.0;  // round-off clamp
            out(i, j) = dist;
            out(j, i) = dist;
        }
    }
    return out;
}

Matrix relu(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.values())
        if (v < 0.0) v = 0.0;
    return out;
}

Matrix relu_grad_mask(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.values().size(); ++i)
        out.values()[i] = m.values()[i] > 0.0 ? 1.0 : 0.0;
    return out;
}

Matrix solve_linear(Matrix a, Matrix b) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("solve_linear: matrix not square " + shape_str(a));
    }
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("solve_linear: rhs rows mismatch " + shape_str(a) +
                                    " vs " + shape_str(b));
    }
    const std::size_t n = a.rows(), m = b.cols();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double cand = std::abs(a(r, col));
            if (cand > best) {
                best = cand;
                pivot = r;
            }
        }
        if (best < 1e-300) {
            throw std::invalid_argument("solve_linear: singular pivot at column " +
                                        std::to_string(col));
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(col, j), b(pivot, j));
        }
        const double inv = 1.0 / a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) * inv;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < m; ++j) b(r, j) -= f * b(col, j);
        }
    }
    Matrix x(n, m);
    for (std::size_t ri = n; ri-- > 0;) {
        for (std::size_t j = 0; j < m; ++j) {
            double acc = b(ri, j);
            for (std::size_t k = ri + 1; k < n; ++k) acc -= a(ri, k) * x(k, j);
            x(ri, j) = acc / a(ri, ri);
        }
    }
    return x;
}

}  // namespace dgf
