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

// Encoding of a real symmetric kernel into a zero-mean Gaussian state in the
// complex-amplitude convention, blocks ordered [alpha | alpha*].

#include <optional>
#include <string>
#include <string_view>

#include "gbspp/numerics.hpp"

namespace gbspp {

enum class InputFlavor { Squeezed, Thermal, Squashed };

std::string_view to_string(InputFlavor flavor);
InputFlavor parse_flavor(std::string_view name);

/// Immutable zero-mean Gaussian state.
///
/// Invariants: sigma_q() == sigma() + I/2, sigma() + Z/2 is positive
/// semidefinite, and X (I - sigma_q^-1) reproduces the encoded kernel blocks.
class GaussianState {
 public:
  /// Wraps an arbitrary complex covariance after checking the uncertainty relation.
  static GaussianState from_sigma(const ComplexMatrix& sigma);

  Eigen::Index modes() const { return m_; }
  const ComplexMatrix& sigma() const { return sigma_; }
  const ComplexMatrix& sigma_q() const { return sigma_q_; }
  /// I - X K, kept from construction.
  const ComplexMatrix& sigma_q_inverse() const { return sigma_q_inv_; }
  /// X (I - sigma_Q^-1) from the stored inverse; the hafnian kernel.
  const ComplexMatrix& kernel() const { return kernel_; }
  double det_sigma_q() const { return det_sigma_q_; }
  /// det(sigma_Q)^(-1/2), the vacuum probability.
  double vacuum_probability() const { return vacuum_probability_; }

  std::optional<InputFlavor> flavor() const { return flavor_; }
  double scale_c() const { return scale_c_; }
  /// tanh r_i (squeezed), mean photon number n_i (thermal) or block eigenvalue (squashed).
  const RealVector& mode_params() const { return mode_params_; }
  /// Interferometer from the kernel decomposition; real orthogonal except for squeezed inputs.
  const ComplexMatrix& U() const { return U_; }

 private:
  friend GaussianState encode(const KernelMatrix&, InputFlavor, double);
  GaussianState() = default;
  void finish_from_inverse(const ComplexMatrix& sigma_q_inv);

  Eigen::Index m_ = 0;
  ComplexMatrix sigma_;
  ComplexMatrix sigma_q_;
  ComplexMatrix sigma_q_inv_;
  ComplexMatrix kernel_;
  double det_sigma_q_ = 1.0;
  double vacuum_probability_ = 1.0;
  std::optional<InputFlavor> flavor_;
  double scale_c_ = 0.0;
  RealVector mode_params_;
  ComplexMatrix U_;
};

/// Largest admissible scale for `flavor` given the kernel's extreme eigenvalue
/// magnitude; the bracket is open at this value.
double max_scale(double lambda_max, InputFlavor flavor);

/// Builds the flavor's block kernel from c * kernel and the matching state.
///
/// Squeezed: [[cB, 0], [0, cB*]], needs c * max|eig| < 1.
/// Thermal:  [[0, cC], [cC^T, 0]], needs a PSD kernel and c * max eig < 1.
/// Squashed: all four blocks cC, needs a PSD kernel and 2c * max eig < 1.
/// Eigenvalues in [-1e-9, 0) are clipped to zero with a warning.
GaussianState encode(const KernelMatrix& kernel, InputFlavor flavor, double scale_c);

/// Expected photon number for kernel eigenvalues `lambdas` (singular values
/// for squeezed inputs) at scale c.
double mean_points(const RealVector& lambdas, InputFlavor flavor, double c);

/// Scale c giving mean_points == target to 1e-9.
double solve_scale(const RealVector& lambdas, InputFlavor flavor, double target);

/// Expected number of threshold-detector clicks, sum_i 1 - det(sigma_Q[i])^(-1/2),
/// computed from the kernel spectrum in O(m^2).
double expected_clicks(const KernelMatrix& kernel, InputFlavor flavor, double c);

/// Scale c giving expected_clicks == target to 1e-9.
double solve_scale_for_clicks(const KernelMatrix& kernel, InputFlavor flavor, double target);

/// X (I - sigma_Q^-1).
ComplexMatrix recover_kernel(const GaussianState& state);

/// Block swap matrix [[0, I], [I, 0]] of size 2m.
ComplexMatrix swap_matrix(Eigen::Index m);

/// Kernel spectrum magnitudes consumed by mean_points for this flavor.
RealVector flavor_lambdas(const KernelMatrix& kernel, InputFlavor flavor);

}  // namespace gbspp
