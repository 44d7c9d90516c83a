#pragma once

#include <complex>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace lifshitz {

using RealSparse = Eigen::SparseMatrix<double>;
using ComplexSparse = Eigen::SparseMatrix<std::complex<double>>;

// Direct sparse LU (UMFPACK). Throws NumericalError when the matrix is numerically singular.
template <class Scalar>
class SparseLu {
 public:
  using Matrix = Eigen::SparseMatrix<Scalar>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit SparseLu(const Matrix& a);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  Vector solve(const Vector& rhs) const;
  // ||A x - b|| / ||b||
  double relative_residual(const Vector& x, const Vector& b) const;
  const Matrix& matrix() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

extern template class SparseLu<double>;
extern template class SparseLu<std::complex<double>>;

}  // namespace lifshitz
