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

#include "gbspp/encoding.hpp"

#include <cmath>
#include <sstream>

namespace gbspp {
namespace {

constexpr double kPsdTol = 1e-9;
constexpr double kUncertaintyTol = 1e-9;

double positive_part_max(const RealVector& v) { return v.size() == 0 ? 0.0 : std::max(0.0, v.maxCoeff()); }

// Kernel eigenvalues with [-kPsdTol, 0) clipped; throws for genuinely negative ones.
RealVector psd_eigenvalues(const KernelMatrix& kernel, InputFlavor flavor) {
  RealVector d = kernel.spectrum().eigenvalues;
  // Negatives at the eigensolver's rounding level are zeroed silently.
  const double roundoff = 1e-13 * std::max(1.0, d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] < -kPsdTol) {
      std::ostringstream os;
      os << to_string(flavor) << " encoding needs a positive semidefinite kernel; eigenvalue " << d[i]
         << " is below " << -kPsdTol;
      throw DomainError(os.str());
    }
    if (d[i] < -roundoff) {
      std::ostringstream os;
      os << "clipping kernel eigenvalue " << d[i] << " to 0";
      warn(os.str());
    }
    d[i] = std::max(d[i], 0.0);
  }
  return d;
}

void check_scale(double lambda_max, InputFlavor flavor, double c) {
  if (!(c >= 0) || !std::isfinite(c)) {
    std::ostringstream os;
    os << "scale c must be a finite non-negative number, got " << c;
    throw DomainError(os.str());
  }
  const double factor = flavor == InputFlavor::Squashed ? 2.0 : 1.0;
  const double v = factor * c * lambda_max;
  if (!(v < 1.0)) {
    std::ostringstream os;
    os << to_string(flavor) << " encoding needs " << (factor == 2.0 ? "2c" : "c")
       << " * max eigenvalue < 1, got " << v << " (c = " << c << ", max eigenvalue = " << lambda_max << ")";
    throw DomainError(os.str());
  }
}

double min_hermitian_eigenvalue(const ComplexMatrix& h) {
  if (h.rows() == 0) return 0.0;
  const ComplexMatrix sym = (h + h.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("uncertainty check: eigensolver failed");
  return solver.eigenvalues()[0];
}

}  // namespace

std::string_view to_string(InputFlavor flavor) {
  switch (flavor) {
    case InputFlavor::Squeezed:
      return "squeezed";
    case InputFlavor::Thermal:
      return "thermal";
    case InputFlavor::Squashed:
      return "squashed";
  }
  return "unknown";
}

InputFlavor parse_flavor(std::string_view name) {
  if (name == "squeezed") return InputFlavor::Squeezed;
  if (name == "thermal") return InputFlavor::Thermal;
  if (name == "squashed") return InputFlavor::Squashed;
  throw DomainError("unknown input flavor '" + std::string(name) + "'");
}

ComplexMatrix swap_matrix(Eigen::Index m) {
  ComplexMatrix x = ComplexMatrix::Zero(2 * m, 2 * m);
  x.topRightCorner(m, m).setIdentity();
  x.bottomLeftCorner(m, m).setIdentity();
  return x;
}

void GaussianState::finish_from_inverse(const ComplexMatrix& sigma_q_inv) {
  m_ = sigma_q_inv.rows() / 2;
  sigma_q_inv_ = sigma_q_inv;
  sigma_q_ = invert(sigma_q_inv);
  const auto n = sigma_q_.rows();
  kernel_ = swap_matrix(m_) * (ComplexMatrix::Identity(n, n) - sigma_q_inv);
  sigma_ = sigma_q_ - ComplexMatrix::Identity(n, n) / 2.0;

  ComplexMatrix z = ComplexMatrix::Identity(n, n);
  z.bottomRightCorner(m_, m_) *= -1.0;
  const double min_eig = min_hermitian_eigenvalue(sigma_ + z / 2.0);
  if (min_eig < -kUncertaintyTol) {
    std::ostringstream os;
    os << "state violates the uncertainty relation: min eigenvalue of Sigma + Z/2 is " << min_eig;
    throw InvalidStateError(os.str());
  }

  if (n == 0) {
    det_sigma_q_ = 1.0;
  } else {
    Eigen::LLT<ComplexMatrix> llt((sigma_q_ + sigma_q_.adjoint()) / 2.0);
    if (llt.info() != Eigen::Success) throw InvalidStateError("sigma_Q is not positive definite");
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i).real());
    det_sigma_q_ = std::exp(log_det);
  }
  vacuum_probability_ = 1.0 / std::sqrt(det_sigma_q_);
}

GaussianState GaussianState::from_sigma(const ComplexMatrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() % 2 != 0)
    throw DomainError("from_sigma: covariance must be square with even dimension");
  const auto n = sigma.rows();
  if (max_abs(sigma - sigma.adjoint()) > 1e-12 * std::max(1.0, max_abs(sigma)))
    throw InvalidStateError("from_sigma: covariance is not Hermitian");
  const ComplexMatrix sq = sigma + ComplexMatrix::Identity(n, n) / 2.0;
  GaussianState s;
  s.finish_from_inverse(invert(sq));
  return s;
}

double max_scale(double lambda_max, InputFlavor flavor) {
  if (!(lambda_max > 0)) throw DomainError("max_scale: spectrum is identically zero");
  return (flavor == InputFlavor::Squashed ? 0.5 : 1.0) / lambda_max;
}

RealVector flavor_lambdas(const KernelMatrix& kernel, InputFlavor flavor) {
  if (flavor == InputFlavor::Squeezed) return kernel.spectrum().eigenvalues.cwiseAbs();
  return psd_eigenvalues(kernel, flavor);
}

GaussianState encode(const KernelMatrix& kernel, InputFlavor flavor, double scale_c) {
  const Eigen::Index m = kernel.dim();
  if (m == 0) throw DomainError("encode: empty kernel");
  const Spectrum& spec = kernel.spectrum();

  GaussianState state;
  state.flavor_ = flavor;
  state.scale_c_ = scale_c;

  ComplexMatrix k_block = ComplexMatrix::Zero(2 * m, 2 * m);
  if (flavor == InputFlavor::Squeezed) {
    const RealVector sv = spec.eigenvalues.cwiseAbs();
    check_scale(sv.maxCoeff(), flavor, scale_c);
    const ComplexMatrix cb = (scale_c * kernel.matrix()).cast<Complex>();
    k_block.topLeftCorner(m, m) = cb;
    k_block.bottomRightCorner(m, m) = cb.conjugate();
    const TakagiFactors tk = takagi_real(kernel.matrix());
    state.mode_params_ = scale_c * tk.lambdas;
    state.U_ = tk.U;
  } else {
    const RealVector d = psd_eigenvalues(kernel, flavor);
    check_scale(positive_part_max(d), flavor, scale_c);
    const RealMatrix& q = spec.eigenvectors;
    const RealMatrix c = scale_c * (q * d.asDiagonal() * q.transpose());
    const ComplexMatrix cc = c.cast<Complex>();
    if (flavor == InputFlavor::Thermal) {
      k_block.topRightCorner(m, m) = cc;
      k_block.bottomLeftCorner(m, m) = cc.transpose();
      state.mode_params_ = (scale_c * d).unaryExpr([](double x) { return x / (1.0 - x); });
    } else {
      k_block.topLeftCorner(m, m) = cc;
      k_block.topRightCorner(m, m) = cc;
      k_block.bottomLeftCorner(m, m) = cc;
      k_block.bottomRightCorner(m, m) = cc;
      state.mode_params_ = scale_c * d;
    }
    state.U_ = q.cast<Complex>();
  }

  const ComplexMatrix sigma_q_inv = ComplexMatrix::Identity(2 * m, 2 * m) - swap_matrix(m) * k_block;
  state.finish_from_inverse(sigma_q_inv);
  return state;
}

double mean_points(const RealVector& lambdas, InputFlavor flavor, double c) {
  if (lambdas.size() == 0) return 0.0;
  if (lambdas.minCoeff() < 0) throw DomainError("mean_points: lambdas must be non-negative");
  check_scale(lambdas.maxCoeff(), flavor, c);
  double total = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double x = c * lambdas[i];
    switch (flavor) {
      case InputFlavor::Squeezed:
        total += x * x / (1.0 - x * x);
        break;
      case InputFlavor::Thermal:
        total += x / (1.0 - x);
        break;
      case InputFlavor::Squashed:
        // A squashed mode with block eigenvalue x has a geometric-like photon
        // distribution with mean x / (1 - 2x).
        total += x / (1.0 - 2.0 * x);
        break;
    }
  }
  return total;
}

double solve_scale(const RealVector& lambdas, InputFlavor flavor, double target) {
  if (!(target > 0) || !std::isfinite(target)) throw DomainError("solve_scale: target must be positive");
  const double lmax = lambdas.size() == 0 ? 0.0 : lambdas.maxCoeff();
  if (!(lmax > 0)) throw DomainError("solve_scale: kernel spectrum is identically zero");
  return bisect_monotone([&](double c) { return mean_points(lambdas, flavor, c); }, target, 0.0,
                         max_scale(lmax, flavor), 1e-9);
}

double expected_clicks(const KernelMatrix& kernel, InputFlavor flavor, double c) {
  const Spectrum& spec = kernel.spectrum();
  const RealVector d = flavor == InputFlavor::Squeezed ? spec.eigenvalues : psd_eigenvalues(kernel, flavor);
  check_scale(flavor == InputFlavor::Squeezed ? d.cwiseAbs().maxCoeff() : positive_part_max(d), flavor, c);
  const RealMatrix q2 = spec.eigenvectors.cwiseAbs2();
  const RealVector x = c * d;

  // Per-mode 2x2 block of sigma_Q is [[p, r], [r', p]] with p, r diagonal
  // entries of Q f(x) Q^T.
  RealVector fp(x.size());
  RealVector fr(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double v = x[j];
    switch (flavor) {
      case InputFlavor::Squeezed:
        fp[j] = 1.0 / (1.0 - v * v);
        fr[j] = v / (1.0 - v * v);
        break;
      case InputFlavor::Thermal:
        fp[j] = 1.0 / (1.0 - v);
        fr[j] = 0.0;
        break;
      case InputFlavor::Squashed:
        fp[j] = (1.0 - v) / (1.0 - 2.0 * v);
        fr[j] = v / (1.0 - 2.0 * v);
        break;
    }
  }
  const RealVector p = q2 * fp;
  const RealVector r = q2 * fr;
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) total += 1.0 - 1.0 / std::sqrt(p[i] * p[i] - r[i] * r[i]);
  return total;
}

double solve_scale_for_clicks(const KernelMatrix& kernel, InputFlavor flavor, double target) {
  if (!(target > 0) || !(target < static_cast<double>(kernel.dim())))
    throw DomainError("solve_scale_for_clicks: target must lie in (0, m)");
  const RealVector lam = flavor_lambdas(kernel, flavor);
  const double lmax = lam.size() == 0 ? 0.0 : lam.maxCoeff();
  if (!(lmax > 0)) throw DomainError("solve_scale_for_clicks: kernel spectrum is identically zero");
  return bisect_monotone([&](double c) { return expected_clicks(kernel, flavor, c); }, target, 0.0,
                         max_scale(lmax, flavor), 1e-9);
}

ComplexMatrix recover_kernel(const GaussianState& state) {
  const Eigen::Index n = state.sigma_q().rows();
  return swap_matrix(state.modes()) * (ComplexMatrix::Identity(n, n) - invert(state.sigma_q()));
}

}  // namespace gbspp
