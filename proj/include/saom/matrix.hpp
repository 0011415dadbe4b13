#pragma once

#include <cstdint>
#include <vector>

#include "saom/common.hpp"

namespace saom {

/// Square 0/1 matrix with a zero diagonal by convention (adjacency or
/// structural-zero mask). Row-major, value semantics.
class binary_matrix {
  public:
    binary_matrix() = default;
    explicit binary_matrix(int n) : n_(n), cells_(static_cast<std::size_t>(n) * n, 0) {}

    int dim() const { return n_; }

    bool operator()(int i, int j) const { return cells_[index(i, j)] != 0; }
    std::uint8_t value(int i, int j) const { return cells_[index(i, j)]; }
    void set(int i, int j, bool v) { cells_[index(i, j)] = v ? 1 : 0; }

    const std::uint8_t* row(int i) const { return cells_.data() + static_cast<std::size_t>(i) * n_; }

    int out_degree(int i) const {
        const std::uint8_t* r = row(i);
        int d = 0;
        for (int j = 0; j < n_; ++j) d += r[j];
        return d;
    }

    int in_degree(int j) const {
        int d = 0;
        for (int i = 0; i < n_; ++i) d += cells_[index(i, j)];
        return d;
    }

    long tie_count() const {
        long t = 0;
        for (std::uint8_t c : cells_) t += c;
        return t;
    }

    /// Number of cells on which the two matrices differ.
    long hamming_distance(const binary_matrix& other) const {
        if (other.n_ != n_) throw data_error("hamming_distance: dimension mismatch");
        long d = 0;
        for (std::size_t c = 0; c < cells_.size(); ++c) d += cells_[c] != other.cells_[c];
        return d;
    }

    bool operator==(const binary_matrix&) const = default;

  private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    int n_ = 0;
    std::vector<std::uint8_t> cells_;
};

/// Dense rows x cols matrix of doubles, row-major.
class real_matrix {
  public:
    real_matrix() = default;
    real_matrix(int rows, int cols) : rows_(rows), cols_(cols), cells_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double operator()(int i, int j) const { return cells_[index(i, j)]; }
    double& operator()(int i, int j) { return cells_[index(i, j)]; }

    bool operator==(const real_matrix&) const = default;

  private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * cols_ + j; }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> cells_;
};

}  // namespace saom
