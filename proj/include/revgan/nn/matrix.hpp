#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "revgan/error.hpp"

namespace revgan::nn {

using Vec = std::vector<double>;

/// Dense row-major matrix of binary64.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols_) throw ShapeError("ragged row list");
            std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// y = A x, summed in ascending column order.
inline Vec multiply(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols())
        throw ShapeError("matrix-vector: expected length " + std::to_string(a.cols()) + ", got " +
                         std::to_string(x.size()));
    Vec y(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matrix-matrix: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a(r, k) * b(k, c);
            out(r, c) = acc;
        }
    return out;
}

/// max |A B - I|.
inline double identity_residual(const Matrix& a, const Matrix& b) {
    const Matrix p = multiply(a, b);
    double worst = 0.0;
    for (std::size_t r = 0; r < p.rows(); ++r)
        for (std::size_t c = 0; c < p.cols(); ++c)
            worst = std::max(worst, std::abs(p(r, c) - (r == c ? 1.0 : 0.0)));
    return worst;
}

inline constexpr double kPivotThreshold = 1e-12;

struct InverseResult {
    Matrix inverse;
    double residual = 0.0;  ///< max |W W^-1 - I|
};

/// Gauss-Jordan elimination with partial pivoting. Throws SingularMatrix when
/// the best available pivot is below kPivotThreshold in magnitude.
inline InverseResult matrix_inverse(const Matrix& w) {
    if (!w.square())
        throw ShapeError("matrix_inverse: " + std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()) + " is not square");
    const std::size_t n = w.rows();
    Matrix a = w;
    Matrix inv = Matrix::identity(n);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (!(std::abs(a(pivot, col)) >= kPivotThreshold))
            throw SingularMatrix("pivot " + std::to_string(a(pivot, col)) + " in column " +
                                 std::to_string(col) + " below threshold");
        if (pivot != col) {
            std::swap_ranges(a.row(col).begin(), a.row(col).end(), a.row(pivot).begin());
            std::swap_ranges(inv.row(col).begin(), inv.row(col).end(), inv.row(pivot).begin());
        }
        const double p = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= p;
            inv(col, c) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    const double residual = identity_residual(w, inv);
    return {std::move(inv), residual};
}

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace revgan::nn
