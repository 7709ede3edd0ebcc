#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

#include "convbound/errors.hpp"

namespace convbound {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Parameter matrices are exchanged with sets and files in row-major order.
inline Vector flatten_row_major(const Matrix& m) {
  Vector v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(k++) = m(i, j);
  return v;
}

inline Matrix unflatten_row_major(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw DimensionError("cannot reshape vector of length " + std::to_string(v.size()) +
                         " into " + std::to_string(rows) + "x" + std::to_string(cols));
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(k++);
  return m;
}

// Induced 2-norm; for a single row or column it is the Euclidean norm.
inline double induced_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

inline void require_size(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n)
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) +
                         ", got " + std::to_string(v.size()));
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace convbound
