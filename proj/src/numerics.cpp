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

#include "gbspp/numerics.hpp"

#include <cmath>
#include <limits>

namespace gbspp {

Spectrum sym_eig(const RealMatrix& a) {
  const RealMatrix sym = symmetrized(a, 1e-12 * std::max(1.0, max_abs(a)), "sym_eig");
  if (!sym.allFinite()) throw DomainError("sym_eig: matrix has non-finite entries");
  Spectrum out;
  if (sym.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eig: eigensolver did not converge for a " + std::to_string(sym.rows()) +
                         "x" + std::to_string(sym.rows()) + " matrix");
  }
  // Eigen sorts ascending.
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

TakagiFactors takagi_real(const RealMatrix& b) {
  const Spectrum s = sym_eig(b);
  const Eigen::Index n = s.eigenvalues.size();
  TakagiFactors out;
  out.lambdas = s.eigenvalues.cwiseAbs();
  out.U = s.eigenvectors.cast<Complex>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (s.eigenvalues[j] < 0) out.U.col(j) *= Complex(0.0, 1.0);
  }
  return out;
}

namespace {

template <typename Mat>
Mat invert_impl(const Mat& a, double min_rcond) {
  if (a.rows() != a.cols()) throw DomainError("invert: matrix must be square");
  if (a.rows() == 0) return a;
  Eigen::FullPivLU<Mat> lu(a);
  const double rc = lu.rcond();
  if (!(rc >= min_rcond) || !lu.isInvertible()) {
    std::ostringstream os;
    os << "invert: matrix is singular to working precision (condition estimate "
       << (rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity()) << ")";
    throw NumericalError(os.str());
  }
  return lu.inverse();
}

}  // namespace

ComplexMatrix invert(const ComplexMatrix& a, double min_rcond) { return invert_impl(a, min_rcond); }
RealMatrix invert(const RealMatrix& a, double min_rcond) { return invert_impl(a, min_rcond); }

double bisect_monotone(const std::function<double(double)>& f, double target, double lo, double hi,
                       double tol) {
  if (!(lo < hi)) throw DomainError("bisect_monotone: empty bracket");
  double a = lo;
  double b = hi;
  for (int it = 0; it < 4096; ++it) {
    const double mid = a + (b - a) / 2;
    if (!(mid > a && mid < b)) break;
    const double v = f(mid);
    if (std::isfinite(v) && std::abs(v - target) <= tol) return mid;
    if (std::isfinite(v) && v < target) {
      a = mid;
    } else {
      b = mid;
    }
  }
  std::ostringstream os;
  os << "bisect_monotone: target " << target << " not reachable to tolerance " << tol << " in ("
     << lo << ", " << hi << ")";
  throw NumericalError(os.str());
}

KernelMatrix::KernelMatrix(const RealMatrix& k, double tol) : k_(symmetrized(k, tol, "kernel")) {
  if (!k_.allFinite()) throw DomainError("kernel: non-finite entries");
}

const Spectrum& KernelMatrix::spectrum() const {
  std::call_once(cache_->once, [this] { cache_->spectrum = sym_eig(k_); });
  return cache_->spectrum;
}

bool KernelMatrix::is_psd(double tol) const {
  const auto& ev = spectrum().eigenvalues;
  return ev.size() == 0 || ev[ev.size() - 1] >= -tol;
}

}  // namespace gbspp
