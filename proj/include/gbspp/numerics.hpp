// Copyright 2026 The gbspp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>

#include "gbspp/errors.hpp"

namespace gbspp {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Eigen-decomposition of a real symmetric matrix, eigenvalues sorted descending.
struct Spectrum {
  RealVector eigenvalues;
  RealMatrix eigenvectors;  // column j pairs with eigenvalues[j]
};

struct TakagiFactors {
  RealVector lambdas;  // non-negative
  ComplexMatrix U;     // unitary, B = U diag(lambdas) U^T
};

/// Largest absolute entry; 0 for empty matrices.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  return a.size() == 0 ? 0.0 : static_cast<double>(a.cwiseAbs().maxCoeff());
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.transpose()) <= tol;
}

/// Throws DomainError unless `a` is square and symmetric to `tol`, then
/// returns the average of `a` and its transpose.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> symmetrized(
    const Eigen::MatrixBase<Derived>& a, double tol, const char* what) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
    throw DomainError(os.str());
  }
  const double asym = max_abs(a - a.transpose());
  if (asym > tol) {
    std::ostringstream os;
    os << what << ": matrix is not symmetric (max |A - A^T| = " << asym << ")";
    throw DomainError(os.str());
  }
  return (a + a.transpose()) / 2.0;
}

Spectrum sym_eig(const RealMatrix& a);

TakagiFactors takagi_real(const RealMatrix& b);

/// Determinant by full-pivot LU. The 0x0 determinant is 1; singular input gives 0.
template <typename Derived>
typename Derived::Scalar determinant(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw DomainError("determinant: matrix must be square");
  if (a.rows() == 0) return Scalar(1);
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return Eigen::FullPivLU<Mat>(a.eval()).determinant();
}

/// Inverse by full-pivot LU. Throws NumericalError when the reciprocal
/// condition estimate falls below `min_rcond`.
ComplexMatrix invert(const ComplexMatrix& a, double min_rcond = 1e-13);
RealMatrix invert(const RealMatrix& a, double min_rcond = 1e-13);

/// Finds c in (lo, hi) with |f(c) - target| <= tol for strictly increasing f.
/// The endpoints are never evaluated, so f may diverge there.
double bisect_monotone(const std::function<double(double)>& f, double target, double lo, double hi,
                       double tol);

/// Symmetric matrix with a lazily computed, shared spectrum.
///
/// Copies share the cached decomposition. Construction symmetrizes the input
/// after checking it against `tol`.
class KernelMatrix {
 public:
  KernelMatrix() = default;
  explicit KernelMatrix(const RealMatrix& k, double tol = 1e-12);

  const RealMatrix& matrix() const { return k_; }
  Eigen::Index dim() const { return k_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return k_(i, j); }

  const Spectrum& spectrum() const;
  /// True when the smallest eigenvalue is >= -tol.
  bool is_psd(double tol = 1e-9) const;

 private:
  struct Cache {
    std::once_flag once;
    Spectrum spectrum;
  };
  RealMatrix k_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace gbspp
