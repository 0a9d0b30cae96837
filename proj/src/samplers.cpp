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

#include "gbspp/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace gbspp {
namespace {

constexpr double kConditionalTol = 1e-9;

// Indices {i, i + m : i in modes} into a 2m x 2m covariance.
std::vector<Eigen::Index> pair_indices(const std::vector<Eigen::Index>& modes, Eigen::Index m) {
  std::vector<Eigen::Index> idx(modes);
  for (Eigen::Index i : modes) idx.push_back(i + m);
  return idx;
}

// det of a Hermitian positive-definite matrix, or a non-positive value when
// the Cholesky factorization fails.
double hpd_det(const ComplexMatrix& a) {
  if (a.rows() == 0) return 1.0;
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success) return -1.0;
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i).real());
  return std::exp(log_det);
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void check_pattern_length(std::span<const int> pattern, Eigen::Index m, const char* what) {
  if (static_cast<Eigen::Index>(pattern.size()) != m) {
    std::ostringstream os;
    os << what << ": pattern has length " << pattern.size() << " but the state has " << m << " modes";
    throw DomainError(os.str());
  }
}

void enumerate_patterns(std::size_t m, int cutoff, bool even_only, Pattern& current, std::size_t pos, int used,
                        std::vector<Pattern>& out) {
  if (pos == m) {
    if (!even_only || used % 2 == 0) out.push_back(current);
    return;
  }
  for (int s = 0; s + used <= cutoff; ++s) {
    current[pos] = s;
    enumerate_patterns(m, cutoff, even_only, current, pos + 1, used + s, out);
  }
  current[pos] = 0;
}

double count_patterns(std::size_t m, int cutoff) {
  // C(cutoff + m, m)
  double c = 1.0;
  for (std::size_t k = 1; k <= m; ++k) c = c * static_cast<double>(cutoff + static_cast<int>(k)) / static_cast<double>(k);
  return c;
}

}  // namespace

Pattern mask_to_pattern(std::uint64_t mask, std::size_t m) {
  Pattern p(m, 0);
  for (std::size_t i = 0; i < m; ++i) p[i] = static_cast<int>(mask >> i & 1U);
  return p;
}

std::uint64_t pattern_to_mask(std::span<const int> pattern) {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < pattern.size(); ++i)
    if (pattern[i] != 0) mask |= std::uint64_t{1} << i;
  return mask;
}

IndexSubset support(std::span<const int> pattern) {
  IndexSubset out;
  for (std::size_t i = 0; i < pattern.size(); ++i)
    if (pattern[i] != 0) out.push_back(static_cast<int>(i));
  return out;
}

double tpp_probability(const GaussianState& state, std::span<const int> clicks, const MatrixFnLimits& limits) {
  const Eigen::Index m = state.modes();
  check_pattern_length(clicks, m, "tpp_probability");
  std::vector<Eigen::Index> on;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (clicks[i] != 0 && clicks[i] != 1) throw DomainError("tpp_probability: threshold pattern entries must be 0 or 1");
    if (clicks[i] == 1) on.push_back(i);
  }
  if (on.empty()) return state.vacuum_probability();
  const ComplexMatrix o = ComplexMatrix::Identity(2 * m, 2 * m) - state.sigma_q_inverse();
  const auto idx = pair_indices(on, m);
  return state.vacuum_probability() * torontonian(o(idx, idx), limits);
}

double threshold_marginal(const GaussianState& state, std::span<const int> prefix) {
  const Eigen::Index m = state.modes();
  if (static_cast<Eigen::Index>(prefix.size()) > m) throw DomainError("threshold_marginal: prefix longer than the state");
  std::vector<Eigen::Index> clicked;
  std::vector<Eigen::Index> dark;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] == 1) {
      clicked.push_back(static_cast<Eigen::Index>(i));
    } else if (prefix[i] == 0) {
      dark.push_back(static_cast<Eigen::Index>(i));
    } else {
      throw DomainError("threshold_marginal: entries must be 0 or 1");
    }
  }
  if (clicked.size() > 62) throw CapExceededError("threshold_marginal: too many clicks");
  const ComplexMatrix& sq = state.sigma_q();
  const auto dark_idx = pair_indices(dark, m);
  const auto click_idx = pair_indices(clicked, m);

  // det(sigma[W u N0]) = det(sigma[N0]) det(S[W]) with S the Schur complement
  // of sigma[N0] on the clicked modes.
  ComplexMatrix schur = sq(click_idx, click_idx);
  double det_dark = 1.0;
  if (!dark.empty()) {
    const ComplexMatrix a = sq(dark_idx, dark_idx);
    Eigen::LLT<ComplexMatrix> llt(a);
    if (llt.info() != Eigen::Success) throw InvalidStateError("threshold_marginal: sigma_Q block is not positive definite");
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i).real());
    det_dark = std::exp(log_det);
    if (!clicked.empty()) {
      const ComplexMatrix b = sq(dark_idx, click_idx);
      schur -= b.adjoint() * llt.solve(b);
    }
  }

  const auto c = static_cast<Eigen::Index>(clicked.size());
  const std::uint64_t subsets = std::uint64_t{1} << c;
  double sum = 0.0;
  double carry = 0.0;
  std::vector<Eigen::Index> local;
  for (std::uint64_t w = 0; w < subsets; ++w) {
    local.clear();
    for (Eigen::Index i = 0; i < c; ++i)
      if (w >> i & 1U) local.push_back(i);
    const auto k = static_cast<Eigen::Index>(local.size());
    for (Eigen::Index i = 0; i < k; ++i) local.push_back(local[i] + c);
    const double det = hpd_det(schur(local, local));
    if (!(det > 0)) throw InvalidStateError("threshold_marginal: vacuum marginal is not positive");
    const double term = (k % 2 == 0 ? 1.0 : -1.0) / std::sqrt(det);
    const double y = term - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum / std::sqrt(det_dark);
}

Pattern sample_tpp(const GaussianState& state, RngStream& rng, const MatrixFnLimits& limits) {
  const Eigen::Index m = state.modes();
  detail::check_cap("sample_tpp", m, limits.torontonian_modes);
  Pattern prefix;
  prefix.reserve(static_cast<std::size_t>(m));
  double p_prefix = 1.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    prefix.push_back(0);
    const double p0 = threshold_marginal(state, prefix);
    const double cond0 = p0 / p_prefix;
    if (!(cond0 >= -kConditionalTol && cond0 <= 1.0 + kConditionalTol)) {
      std::ostringstream os;
      os << "sample_tpp: conditional probability " << cond0 << " at mode " << k << " is outside [0, 1]";
      throw NumericalError(os.str());
    }
    if (rng.uniform() < cond0) {
      p_prefix = p0;
    } else {
      prefix.back() = 1;
      p_prefix = threshold_marginal(state, prefix);
    }
  }
  return prefix;
}

std::vector<double> enumerate_tpp(const GaussianState& state, const MatrixFnLimits& limits) {
  const Eigen::Index m = state.modes();
  detail::check_cap("enumerate_tpp", m, 12);
  const std::uint64_t n = std::uint64_t{1} << m;
  std::vector<double> probs(n);
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    const Pattern p = mask_to_pattern(mask, static_cast<std::size_t>(m));
    probs[mask] = tpp_probability(state, p, limits);
  }
  return probs;
}

double hpp_probability(const GaussianState& state, std::span<const int> counts, const MatrixFnLimits& limits) {
  const Eigen::Index m = state.modes();
  check_pattern_length(counts, m, "hpp_probability");
  int total = 0;
  double log_fact = 0.0;
  for (int s : counts) {
    if (s < 0) throw DomainError("hpp_probability: photon counts must be non-negative");
    total += s;
    log_fact += log_factorial(s);
  }
  if (total == 0) return state.vacuum_probability();
  if (state.flavor() == InputFlavor::Squeezed && total % 2 == 1) return 0.0;

  Complex haf;
  if (2 * total <= limits.hafnian_dim) {
    haf = hafnian(reduce(state.kernel(), counts, true), limits);
  } else {
    std::vector<int> reps(counts.begin(), counts.end());
    reps.insert(reps.end(), counts.begin(), counts.end());
    haf = hafnian_repeated(state.kernel(), reps);
  }
  return state.vacuum_probability() * haf.real() * std::exp(-log_fact);
}

ExactHppSampler::ExactHppSampler(const GaussianState& state, int cutoff, const HppSamplerOptions& options,
                                 const MatrixFnLimits& limits) {
  if (cutoff < 0 || cutoff % 2 != 0) throw DomainError("ExactHppSampler: cutoff must be a non-negative even integer");
  const auto m = static_cast<std::size_t>(state.modes());
  const double count = count_patterns(m, cutoff);
  if (count > static_cast<double>(options.max_patterns)) {
    std::ostringstream os;
    os << "ExactHppSampler: " << count << " patterns with total <= " << cutoff << " exceed the budget of "
       << options.max_patterns;
    throw CapExceededError(os.str());
  }
  const bool even_only = state.flavor() == InputFlavor::Squeezed;
  Pattern current(m, 0);
  enumerate_patterns(m, cutoff, even_only, current, 0, 0, patterns_);

  probs_.reserve(patterns_.size());
  double total = 0.0;
  for (const auto& p : patterns_) {
    const double pr = std::max(0.0, hpp_probability(state, p, limits));
    probs_.push_back(pr);
    total += pr;
  }
  truncated_mass_ = 1.0 - total;
  if (truncated_mass_ > options.max_truncated_mass) {
    std::ostringstream os;
    os << "ExactHppSampler: probability mass " << truncated_mass_ << " lies above cutoff " << cutoff
       << " (bound " << options.max_truncated_mass << "); use a larger cutoff";
    throw NumericalError(os.str());
  }
  cdf_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    acc += probs_[i];
    cdf_[i] = acc / total;
  }
}

Pattern ExactHppSampler::sample(RngStream& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return patterns_[static_cast<std::size_t>(it - cdf_.begin())];
}

Pattern sample_hpp_exact(const GaussianState& state, int cutoff, RngStream& rng, const HppSamplerOptions& options) {
  return ExactHppSampler(state, cutoff, options).sample(rng);
}

void ClassicalSampler::init(const RealMatrix& q, const RealVector& block_eigs) {
  q_ = q;
  sd_.resize(block_eigs.size());
  for (Eigen::Index j = 0; j < block_eigs.size(); ++j) {
    const double x = std::max(0.0, block_eigs[j]);
    // Thermal: Re and Im parts each have variance nbar / 2 with nbar = x / (1 - x).
    // Squashed: only Im is spread, variance (e^{2r} - 1) / 4 = x / (1 - 2x).
    const double var = flavor_ == InputFlavor::Thermal ? 0.5 * x / (1.0 - x) : x / (1.0 - 2.0 * x);
    sd_[j] = std::sqrt(var);
  }
}

ClassicalSampler::ClassicalSampler(const GaussianState& state) {
  if (state.flavor() != InputFlavor::Thermal && state.flavor() != InputFlavor::Squashed)
    throw DomainError("classical sampler needs a thermal or squashed state");
  flavor_ = *state.flavor();
  RealVector block(state.mode_params().size());
  for (Eigen::Index j = 0; j < block.size(); ++j) {
    const double p = state.mode_params()[j];
    block[j] = flavor_ == InputFlavor::Thermal ? p / (1.0 + p) : p;
  }
  init(state.U().real(), block);
}

ClassicalSampler::ClassicalSampler(const KernelMatrix& kernel, InputFlavor flavor, double scale_c) : flavor_(flavor) {
  if (flavor != InputFlavor::Thermal && flavor != InputFlavor::Squashed)
    throw DomainError("classical sampler needs a thermal or squashed flavor");
  const RealVector d = flavor_lambdas(kernel, flavor);
  (void)mean_points(d, flavor, scale_c);  // validates the scale
  init(kernel.spectrum().eigenvectors, scale_c * d);
}

Pattern ClassicalSampler::sample(RngStream& rng) const {
  const Eigen::Index m = q_.rows();
  Pattern out(static_cast<std::size_t>(m));
  if (flavor_ == InputFlavor::Thermal) {
    RealVector br = RealVector::Zero(m);
    RealVector bi = RealVector::Zero(m);
    // One sweep over the columns of Q; each column is reused from cache for both parts.
    for (Eigen::Index j = 0; j < m; ++j) {
      const double re = sd_[j] * rng.normal();
      const double im = sd_[j] * rng.normal();
      if (re == 0.0 && im == 0.0) continue;
      br.noalias() += re * q_.col(j);
      bi.noalias() += im * q_.col(j);
    }
    for (Eigen::Index i = 0; i < m; ++i)
      out[static_cast<std::size_t>(i)] = static_cast<int>(rng.poisson(br[i] * br[i] + bi[i] * bi[i]));
  } else {
    RealVector im(m);
    for (Eigen::Index j = 0; j < m; ++j) im[j] = sd_[j] * rng.normal();
    const RealVector bi = q_ * im;
    for (Eigen::Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(rng.poisson(bi[i] * bi[i]));
  }
  return out;
}

Pattern sample_classical(const GaussianState& state, RngStream& rng) { return ClassicalSampler(state).sample(rng); }

std::string_view to_string(TppMethod method) {
  return method == TppMethod::ChainRule ? "chain-rule" : "classical-threshold";
}

TppSampler::TppSampler(const KernelMatrix& kernel, InputFlavor flavor, double scale_c, const MatrixFnLimits& limits)
    : limits_(limits) {
  if (kernel.dim() <= limits.torontonian_modes) {
    method_ = TppMethod::ChainRule;
    state_ = encode(kernel, flavor, scale_c);
  } else if (flavor == InputFlavor::Thermal || flavor == InputFlavor::Squashed) {
    method_ = TppMethod::ClassicalThreshold;
    classical_ = ClassicalSampler(kernel, flavor, scale_c);
  } else {
    std::ostringstream os;
    os << "TppSampler: " << kernel.dim() << " modes exceed the Torontonian cap of " << limits.torontonian_modes
       << " and squeezed inputs have no classical fallback";
    throw CapExceededError(os.str());
  }
}

Pattern TppSampler::sample(RngStream& rng) const {
  if (method_ == TppMethod::ChainRule) return sample_tpp(*state_, rng, limits_);
  Pattern p = classical_->sample(rng);
  for (int& s : p) s = s > 0 ? 1 : 0;
  return p;
}

double dpp_mean_points(const RealVector& lambdas, double c) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double x = c * std::max(0.0, lambdas[i]);
    total += x / (1.0 + x);
  }
  return total;
}

double solve_dpp_scale(const RealVector& lambdas, double target) {
  const auto positive = (lambdas.array() > 1e-12).count();
  if (!(target > 0) || !(target < static_cast<double>(positive))) {
    std::ostringstream os;
    os << "solve_dpp_scale: target " << target << " must lie in (0, " << positive << ")";
    throw DomainError(os.str());
  }
  double hi = 1.0 / lambdas.maxCoeff();
  while (dpp_mean_points(lambdas, hi) <= target) hi *= 2.0;
  return bisect_monotone([&](double c) { return dpp_mean_points(lambdas, c); }, target, 0.0, hi, 1e-9);
}

DppSampler::DppSampler(const KernelMatrix& kernel, double scale) {
  if (!(scale >= 0)) throw DomainError("DppSampler: scale must be non-negative");
  const Spectrum& s = kernel.spectrum();
  eigenvalues_ = scale * s.eigenvalues;
  eigenvectors_ = s.eigenvectors;
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    if (eigenvalues_[i] < -1e-9) {
      std::ostringstream os;
      os << "DppSampler: kernel has negative eigenvalue " << eigenvalues_[i];
      throw DomainError(os.str());
    }
    if (eigenvalues_[i] < 1e-12) eigenvalues_[i] = 0.0;
  }
}

double DppSampler::expected_size() const { return dpp_mean_points(eigenvalues_, 1.0); }

IndexSubset DppSampler::sample(RngStream& rng) const {
  const Eigen::Index m = eigenvectors_.rows();
  std::vector<Eigen::Index> chosen;
  for (Eigen::Index n = 0; n < eigenvalues_.size(); ++n) {
    const double l = eigenvalues_[n];
    if (rng.uniform() < l / (1.0 + l)) chosen.push_back(n);
  }
  RealMatrix v = eigenvectors_(Eigen::all, chosen);
  IndexSubset out;
  std::vector<double> weights(static_cast<std::size_t>(m));
  while (v.cols() > 0) {
    for (Eigen::Index i = 0; i < m; ++i) weights[static_cast<std::size_t>(i)] = v.row(i).squaredNorm();
    const auto pick = static_cast<Eigen::Index>(rng.categorical(weights));
    out.push_back(static_cast<int>(pick));

    // Project the span onto the complement of e_pick and drop one dimension.
    Eigen::Index pivot = 0;
    v.row(pick).cwiseAbs().maxCoeff(&pivot);
    const RealVector vp = v.col(pivot) / v(pick, pivot);
    RealMatrix next(m, v.cols() - 1);
    for (Eigen::Index c = 0, d = 0; c < v.cols(); ++c) {
      if (c == pivot) continue;
      next.col(d++) = v.col(c) - vp * v(pick, c);
    }
    // Modified Gram-Schmidt.
    for (Eigen::Index c = 0; c < next.cols(); ++c) {
      for (Eigen::Index p = 0; p < c; ++p) next.col(c) -= next.col(p).dot(next.col(c)) * next.col(p);
      const double nrm = next.col(c).norm();
      if (nrm < 1e-12) throw NumericalError("DppSampler: projection lost rank");
      next.col(c) /= nrm;
    }
    v = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

IndexSubset sample_dpp(const KernelMatrix& kernel, RngStream& rng) { return DppSampler(kernel).sample(rng); }

IndexSubset sample_ppp(std::size_t m, double mean_points, RngStream& rng) {
  if (!(mean_points >= 0)) throw DomainError("sample_ppp: mean must be non-negative");
  if (mean_points > static_cast<double>(m)) throw DomainError("sample_ppp: mean exceeds the number of points");
  const auto n = std::min<std::uint64_t>(rng.poisson(mean_points), m);
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto j = i + rng.index(m - i);
    std::swap(perm[i], perm[j]);
  }
  IndexSubset out(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(out.begin(), out.end());
  return out;
}

double correlation_fn(const RealMatrix& kernel, std::span<const int> indices, CorrelationProcess process) {
  std::set<int> seen;
  std::vector<Eigen::Index> idx;
  for (int i : indices) {
    if (i < 0 || i >= kernel.rows()) throw DomainError("correlation_fn: index out of range");
    if (!seen.insert(i).second) throw DomainError("correlation_fn: duplicate index " + std::to_string(i));
    idx.push_back(i);
  }
  const RealMatrix sub = kernel(idx, idx);
  return process == CorrelationProcess::Hpp ? hafnian(sub) : determinant(sub);
}

}  // namespace gbspp
