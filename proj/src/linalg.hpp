#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Small dense helpers for the OFTRL KKT systems and affine-hull handling.
// Everything here is tiny (tens of rows), so plain Gaussian elimination with
// partial pivoting is enough.

namespace mpcsb::detail {

struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c)
        : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double& at(int r, int c) {
        return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)];
    }
    double at(int r, int c) const {
        return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)];
    }
};

// Solves M x = rhs for square M; destroys local copies.
inline std::vector<double> solve_dense(Matrix m, std::vector<double> rhs) {
    const int n = m.rows;
    if (m.cols != n || static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("solve_dense: shape mismatch");
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m.at(r, col)) > std::abs(m.at(pivot, col))) pivot = r;
        if (std::abs(m.at(pivot, col)) < 1e-300)
            throw std::runtime_error("solve_dense: singular system");
        if (pivot != col) {
            for (int c = col; c < n; ++c) std::swap(m.at(pivot, c), m.at(col, c));
            std::swap(rhs[static_cast<std::size_t>(pivot)], rhs[static_cast<std::size_t>(col)]);
        }
        const double inv = 1.0 / m.at(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = m.at(r, col) * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) m.at(r, c) -= f * m.at(col, c);
            rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c) s -= m.at(r, c) * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(r)] = s / m.at(r, r);
    }
    return x;
}

// Basis of { w : M w = 0 } via row echelon form with relative pivot tolerance.
inline std::vector<std::vector<double>> null_space(Matrix m, double rel_tol) {
    const int rows = m.rows, cols = m.cols;
    double scale = 0.0;
    for (double v : m.a) scale = std::max(scale, std::abs(v));
    const double tol = rel_tol * std::max(scale, 1.0);

    std::vector<int> pivot_col_of_row;
    int row = 0;
    for (int col = 0; col < cols && row < rows; ++col) {
        int pivot = row;
        for (int r = row + 1; r < rows; ++r)
            if (std::abs(m.at(r, col)) > std::abs(m.at(pivot, col))) pivot = r;
        if (std::abs(m.at(pivot, col)) <= tol) continue;
        if (pivot != row)
            for (int c = 0; c < cols; ++c) std::swap(m.at(pivot, c), m.at(row, c));
        const double inv = 1.0 / m.at(row, col);
        for (int c = 0; c < cols; ++c) m.at(row, c) *= inv;
        for (int r = 0; r < rows; ++r) {
            if (r == row) continue;
            const double f = m.at(r, col);
            if (f == 0.0) continue;
            for (int c = 0; c < cols; ++c) m.at(r, c) -= f * m.at(row, c);
        }
        pivot_col_of_row.push_back(col);
        ++row;
    }

    std::vector<char> is_pivot(static_cast<std::size_t>(cols), 0);
    for (int c : pivot_col_of_row) is_pivot[static_cast<std::size_t>(c)] = 1;

    std::vector<std::vector<double>> basis;
    for (int free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[static_cast<std::size_t>(free_col)]) continue;
        std::vector<double> w(static_cast<std::size_t>(cols), 0.0);
        w[static_cast<std::size_t>(free_col)] = 1.0;
        for (std::size_t r = 0; r < pivot_col_of_row.size(); ++r)
            w[static_cast<std::size_t>(pivot_col_of_row[r])] =
                -m.at(static_cast<int>(r), free_col);
        basis.push_back(std::move(w));
    }
    return basis;
}

}  // namespace mpcsb::detail
