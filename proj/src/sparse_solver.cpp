#include "lifshitz/sparse_solver.hpp"

#include <Eigen/UmfPackSupport>

#include "lifshitz/error.hpp"

namespace lifshitz {

template <class Scalar>
struct SparseLu<Scalar>::Impl {
  Matrix a;
  Eigen::UmfPackLU<Matrix> lu;
};

template <class Scalar>
SparseLu<Scalar>::SparseLu(const Matrix& a) : impl_(std::make_unique<Impl>()) {
  impl_->a = a;
  impl_->a.makeCompressed();
  impl_->lu.compute(impl_->a);
  if (impl_->lu.info() != Eigen::Success)
    throw NumericalError("sparse factorization failed: matrix is numerically singular");
}

template <class Scalar>
SparseLu<Scalar>::~SparseLu() = default;
template <class Scalar>
SparseLu<Scalar>::SparseLu(SparseLu&&) noexcept = default;
template <class Scalar>
SparseLu<Scalar>& SparseLu<Scalar>::operator=(SparseLu&&) noexcept = default;

template <class Scalar>
typename SparseLu<Scalar>::Vector SparseLu<Scalar>::solve(const Vector& rhs) const {
  Vector x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite())
    throw NumericalError("sparse solve failed: matrix is numerically singular");
  return x;
}

template <class Scalar>
double SparseLu<Scalar>::relative_residual(const Vector& x, const Vector& b) const {
  double nb = b.norm();
  return (impl_->a * x - b).norm() / (nb > 0 ? nb : 1.0);
}

template <class Scalar>
const typename SparseLu<Scalar>::Matrix& SparseLu<Scalar>::matrix() const {
  return impl_->a;
}

template class SparseLu<double>;
template class SparseLu<std::complex<double>>;

}  // namespace lifshitz
