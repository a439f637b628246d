#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "oscbound/polynomial.hpp"

namespace oscbound {

/// Row-major matrix of polynomials sharing one variable count.
class PolyMatrix {
public:
    PolyMatrix(int rows, int cols, std::vector<Polynomial> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (rows_ < 1 || cols_ < 1 || entries_.size() != static_cast<std::size_t>(rows_) * cols_)
            throw std::invalid_argument("polynomial matrix shape mismatch");
        for (const auto& p : entries_)
            if (p.num_vars() != entries_.front().num_vars())
                throw std::invalid_argument("polynomial matrix with mixed variable counts");
    }

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    [[nodiscard]] int num_vars() const { return entries_.front().num_vars(); }
    [[nodiscard]] const Polynomial& at(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * cols_ + j];
    }
    [[nodiscard]] const std::vector<Polynomial>& entries() const { return entries_; }

    [[nodiscard]] int max_total_degree() const {
        int d = 0;
        for (const auto& p : entries_) d = std::max(d, p.total_degree());
        return d;
    }

    /// Entries of the columns arranged in a line, column by column,
    /// top to bottom within each column.
    [[nodiscard]] std::vector<Polynomial> flatten_columns() const {
        std::vector<Polynomial> flat;
        flat.reserve(entries_.size());
        for (int j = 0; j < cols_; ++j)
            for (int i = 0; i < rows_; ++i) flat.push_back(at(i, j));
        return flat;
    }

private:
    int rows_;
    int cols_;
    std::vector<Polynomial> entries_;
};

/// Transposed Jacobian of the column-flattened entries of A: the result B
/// has n rows and rows(A)*cols(A) columns with B[i][s] = d g_s / d x_i.
inline PolyMatrix next_matrix(const PolyMatrix& a) {
    const int n = a.num_vars();
    const std::vector<Polynomial> flat = a.flatten_columns();
    const int cols = static_cast<int>(flat.size());
    std::vector<Polynomial> entries;
    entries.reserve(static_cast<std::size_t>(n) * cols);
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < cols; ++s) entries.push_back(flat[s].partial_derivative(i));
    return PolyMatrix(n, cols, std::move(entries));
}

struct ChainTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The iterated matrices A_0 .. A_k; A_j is the transposed Jacobian of the
/// flattened A_{j-1}, so A_j holds every order-j partial of the seed entries
/// and has shape n x n^{j-1}*r*m for j >= 1.
class DerivativeChain {
public:
    DerivativeChain(const PolyMatrix& seed, int k, std::int64_t max_cols = 10000) {
        if (k < 0) throw std::invalid_argument("chain depth must be nonnegative");
        const std::int64_t n = seed.num_vars();
        const std::int64_t r = seed.rows();
        const std::int64_t m = seed.cols();
        std::int64_t cols = r * m;  // columns of A_1
        for (int j = 1; j <= k; ++j) {
            if (cols > max_cols)
                throw ChainTooLarge("derivative chain exceeds column cap (" +
                                    std::to_string(cols) + " > " + std::to_string(max_cols) + ")");
            cols *= n;
        }
        matrices_.push_back(seed);
        for (int j = 1; j <= k; ++j) matrices_.push_back(next_matrix(matrices_.back()));
    }

    [[nodiscard]] int n() const { return matrices_.front().num_vars(); }
    [[nodiscard]] int seed_rows() const { return matrices_.front().rows(); }
    [[nodiscard]] int seed_cols() const { return matrices_.front().cols(); }
    [[nodiscard]] int depth() const { return static_cast<int>(matrices_.size()) - 1; }
    [[nodiscard]] const PolyMatrix& level(int j) const { return matrices_.at(j); }
    [[nodiscard]] const std::vector<PolyMatrix>& matrices() const { return matrices_; }

private:
    std::vector<PolyMatrix> matrices_;
};

inline DerivativeChain build_chain(const PolyMatrix& seed, int k, std::int64_t max_cols = 10000) {
    return DerivativeChain(seed, k, max_cols);
}

/// Seed for the oscillatory-integral pipeline: the 1 x n row of first
/// partials of the phase, whose next level is the Hessian.
inline PolyMatrix gradient_row(const Polynomial& phase) {
    std::vector<Polynomial> grad = phase.gradient();
    return PolyMatrix(1, phase.num_vars(), std::move(grad));
}

} // namespace oscbound
