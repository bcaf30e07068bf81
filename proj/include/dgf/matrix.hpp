#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace dgf {

/// Dense row-major matrix of doubles. All pipeline state (feature tables,
/// adjacency matrices, layer weights) lives in this one type.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return v_.empty(); }

    double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }

    const std::vector<double>& values() const noexcept { return v_; }
    std::vector<double>& values() noexcept { return v_; }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

/// Matrix product. Accumulation order is fixed (row-major, ascending inner
/// index) so repeated runs are bit-reproducible. Throws std::invalid_argument
/// on dimension mismatch, with both shapes in the message.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double c);
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Row sums, i.e. M e with e the all-ones vector.
std::vector<double> row_sums(const Matrix& m);

bool all_finite(const Matrix& m);

struct SpectralResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Largest absolute eigenvalue by power iteration started from the all-ones
/// vector. Intended for square symmetric nonnegative inputs (only squareness
/// is enforced). Converged when successive Rayleigh quotients differ by less
/// than tol, or the iterate reaches an exact fixed point. The all-zero matrix
/// yields 0. On non-convergence the last estimate is returned with
/// converged = false; the caller decides what to do with it.
SpectralResult spectral_radius(const Matrix& m, int max_iters = 1000, double tol = 1e-10);

/// N x N squared Euclidean distances between the rows of h, computed as
/// |hi|^2 + |hj|^2 - 2 hi.hj with negative round-off clamped to 0. The
/// diagonal is exactly zero and the result exactly symmetric.
Matrix pairwise_sq_euclidean(const Matrix& h);

/// Elementwise max(0, x).
Matrix relu(const Matrix& m);

/// 1 where x > 0, else 0. The subgradient at exactly 0 is taken as 0.
Matrix relu_grad_mask(const Matrix& m);

/// Solves A X = B by Gaussian elimination with partial pivoting.
/// Throws std::invalid_argument on shape mismatch or a numerically
/// singular pivot.
Matrix solve_linear(Matrix a, Matrix b);

}  // namespace dgf
