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

// Point-process samplers over a finite state space {0, ..., m-1} and the
// exact probabilities they are checked against.
//
// Patterns are plain integer vectors of length m: 0/1 click indicators for
// threshold patterns, photon counts for photon patterns. DPP and PPP draws
// are sorted index subsets.

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "gbspp/encoding.hpp"
#include "gbspp/matrixfn.hpp"
#include "gbspp/rng.hpp"

namespace gbspp {

using Pattern = std::vector<int>;
using IndexSubset = std::vector<int>;

/// Probability of a threshold pattern: det(sigma_Q)^(-1/2) Tor(O_S), O = I - sigma_Q^-1.
double tpp_probability(const GaussianState& state, std::span<const int> clicks, const MatrixFnLimits& limits = {});

/// Probability that the first prefix.size() modes show exactly `prefix`,
/// by inclusion-exclusion over vacuum marginals:
///   sum_{W subset C} (-1)^|W| det(sigma_Q[W u N0])^(-1/2)
/// with C the clicked and N0 the dark modes of the prefix.
double threshold_marginal(const GaussianState& state, std::span<const int> prefix);

/// Exact threshold sample by the mode-by-mode chain rule over marginals.
Pattern sample_tpp(const GaussianState& state, RngStream& rng, const MatrixFnLimits& limits = {});

/// Exact distribution over all 2^m threshold patterns, indexed by bitmask
/// (bit i set when mode i clicks). Requires m <= 12.
std::vector<double> enumerate_tpp(const GaussianState& state, const MatrixFnLimits& limits = {});

/// Pattern for a bitmask over m modes, and back.
Pattern mask_to_pattern(std::uint64_t mask, std::size_t m);
std::uint64_t pattern_to_mask(std::span<const int> pattern);

/// det(sigma_Q)^(-1/2) Haf(K_S) / prod s_i!, K_S the doubled reduction of the
/// state's kernel. Squeezed states give exactly 0 for odd totals.
double hpp_probability(const GaussianState& state, std::span<const int> counts, const MatrixFnLimits& limits = {});

struct HppSamplerOptions {
  std::size_t max_patterns = 200000;
  double max_truncated_mass = 1e-3;
};

/// Categorical sampler over every photon pattern with total <= cutoff.
class ExactHppSampler {
 public:
  ExactHppSampler(const GaussianState& state, int cutoff, const HppSamplerOptions& options = {},
                  const MatrixFnLimits& limits = {});

  Pattern sample(RngStream& rng) const;
  double truncated_mass() const { return truncated_mass_; }
  const std::vector<Pattern>& patterns() const { return patterns_; }
  const std::vector<double>& probabilities() const { return probs_; }

 private:
  std::vector<Pattern> patterns_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double truncated_mass_ = 0.0;
};

Pattern sample_hpp_exact(const GaussianState& state, int cutoff, RngStream& rng,
                         const HppSamplerOptions& options = {});

/// Quantum-inspired sampler for thermal and squashed inputs: draw coherent
/// amplitudes from the positive P function, push them through the real
/// orthogonal interferometer and count photons with Poisson draws. O(m^2)
/// per sample after setup.
class ClassicalSampler {
 public:
  explicit ClassicalSampler(const GaussianState& state);
  ClassicalSampler(const KernelMatrix& kernel, InputFlavor flavor, double scale_c);

  InputFlavor flavor() const { return flavor_; }
  Eigen::Index modes() const { return q_.rows(); }
  /// Per-mode standard deviation of the input amplitude quadrature(s).
  const RealVector& amplitude_sd() const { return sd_; }

  Pattern sample(RngStream& rng) const;

 private:
  void init(const RealMatrix& q, const RealVector& block_eigs);

  InputFlavor flavor_;
  RealMatrix q_;
  RealVector sd_;
};

Pattern sample_classical(const GaussianState& state, RngStream& rng);

enum class TppMethod { ChainRule, ClassicalThreshold };
std::string_view to_string(TppMethod method);

/// Threshold sampler that uses the exact chain rule up to the Torontonian
/// cap and, for thermal or squashed inputs beyond it, thresholds the
/// classical sampler's photon counts.
class TppSampler {
 public:
  TppSampler(const KernelMatrix& kernel, InputFlavor flavor, double scale_c, const MatrixFnLimits& limits = {});

  TppMethod method() const { return method_; }
  Pattern sample(RngStream& rng) const;
  const GaussianState* state() const { return state_ ? &*state_ : nullptr; }

 private:
  TppMethod method_;
  MatrixFnLimits limits_;
  std::optional<GaussianState> state_;
  std::optional<ClassicalSampler> classical_;
};

/// sum_i c l_i / (1 + c l_i), the DPP expected size for L-ensemble c K.
double dpp_mean_points(const RealVector& lambdas, double c);
/// Scale c with dpp_mean_points == target to 1e-9.
double solve_dpp_scale(const RealVector& lambdas, double target);

/// Spectral L-ensemble sampler for P(S) = det(L_S) / det(L + I) with L = scale * kernel.
class DppSampler {
 public:
  explicit DppSampler(const KernelMatrix& kernel, double scale = 1.0);

  IndexSubset sample(RngStream& rng) const;
  double expected_size() const;

 private:
  RealVector eigenvalues_;
  RealMatrix eigenvectors_;
};

IndexSubset sample_dpp(const KernelMatrix& kernel, RngStream& rng);

/// N ~ Poisson(mean_points) truncated at m, then N distinct uniform indices.
IndexSubset sample_ppp(std::size_t m, double mean_points, RngStream& rng);

enum class CorrelationProcess { Hpp, Dpp };

/// n-point correlation: hafnian (HPP) or determinant (DPP) of the kernel
/// restricted to `indices`.
double correlation_fn(const RealMatrix& kernel, std::span<const int> indices, CorrelationProcess process);

/// Indices with a non-zero entry.
IndexSubset support(std::span<const int> pattern);

}  // namespace gbspp
