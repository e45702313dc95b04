#pragma once

// Compressed-row sparse matrices and a Jacobi-preconditioned conjugate
// gradient solver for symmetric positive definite systems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "serrin/error.hpp"

namespace serrin {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Builds the matrix from (row, col, value) entries; duplicates are summed
  /// in input order after a stable sort, so the result is deterministic.
  static CsrMatrix from_triplets(std::size_t rows, std::vector<Triplet> entries) {
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    CsrMatrix m;
    m.rows_ = rows;
    m.row_start_.assign(rows + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
      const std::size_t r = entries[k].row, c = entries[k].col;
      double sum = 0.0;
      for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k) sum += entries[k].value;
      m.cols_.push_back(c);
      m.values_.push_back(sum);
      ++m.row_start_[r + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_start_[r + 1] += m.row_start_[r];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t nonzeros() const { return values_.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < rows_; ++r) {
      double sum = 0.0;
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) sum += values_[k] * x[cols_[k]];
      y[r] = sum;
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
        if (cols_[k] == r) d[r] = values_[k];
      }
    }
    return d;
  }

 private:
  std::size_t rows_ = 0;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

struct CgOptions {
  double relative_tolerance = 1e-10;
  std::size_t max_iterations = 0;  // 0: 20 * sqrt(n)
};

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

/// Solves A x = b with diagonal preconditioning, starting from the given x.
/// Convergence is measured by ||b - A x|| / ||b||.
inline CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                                   const CgOptions& options = {}) {
  const std::size_t n = a.rows();
  const std::size_t max_iter = options.max_iterations > 0
                                   ? options.max_iterations
                                   : static_cast<std::size_t>(std::ceil(20.0 * std::sqrt(static_cast<double>(n))));
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {};
  }
  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw SolverError("stiffness matrix has a non-positive diagonal entry");
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  a.multiply(x, r);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - r[k];
  double r_norm = std::sqrt(dot(r, r));
  if (r_norm <= options.relative_tolerance * b_norm) return {0, r_norm / b_norm};

  for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
  p = z;
  double rho = dot(r, z);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    a.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw SolverError("conjugate gradient breakdown: matrix is not positive definite");
    const double alpha = rho / pq;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    r_norm = std::sqrt(dot(r, r));
    if (r_norm <= options.relative_tolerance * b_norm) return {it, r_norm / b_norm};
    for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    const double rho_next = dot(r, z);
    const double beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  throw SolverError("conjugate gradient did not reach relative residual " +
                    std::to_string(options.relative_tolerance) + " in " + std::to_string(max_iter) +
                    " iterations (reached " + std::to_string(r_norm / b_norm) + ")");
}

}  // namespace serrin
