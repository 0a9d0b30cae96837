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

// Exact evaluators for the matrix functions behind boson-sampling point
// processes: hafnian, permanent and Torontonian, plus the outcome-driven
// row/column reduction that forms the submatrices they act on.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gbspp/numerics.hpp"

namespace gbspp {

/// Size caps for the exponential-time evaluators.
struct MatrixFnLimits {
  int hafnian_dim = 24;
  int permanent_dim = 20;
  int torontonian_modes = 16;
};

/// Photon-count pattern driving a reduction. In doubled mode index i and its
/// partner i + m are repeated together.
struct Reduction {
  std::vector<int> pattern;
  bool doubled = false;

  /// Row/column indices of the reduced matrix, in order.
  std::vector<Eigen::Index> indices() const;
  int total() const;
};

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> reduce(
    const Eigen::MatrixBase<Derived>& a, const Reduction& r) {
  const auto m = static_cast<Eigen::Index>(r.pattern.size());
  const Eigen::Index expected = r.doubled ? 2 * m : m;
  if (a.rows() != expected || a.cols() != expected) {
    std::ostringstream os;
    os << "reduce: matrix is " << a.rows() << "x" << a.cols() << " but pattern of length " << m
       << (r.doubled ? " (doubled)" : "") << " needs " << expected << "x" << expected;
    throw DomainError(os.str());
  }
  const std::vector<Eigen::Index> idx = r.indices();
  return a(idx, idx);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> reduce(
    const Eigen::MatrixBase<Derived>& a, std::span<const int> pattern, bool doubled) {
  return reduce(a, Reduction{std::vector<int>(pattern.begin(), pattern.end()), doubled});
}

namespace detail {

void check_cap(const char* what, Eigen::Index size, int cap);

// [eta^n] exp(sum_j traces[j-1] eta^j / (2j)); traces has length n.
template <typename Scalar>
Scalar power_trace_coefficient(const std::vector<Scalar>& traces) {
  const std::size_t n = traces.size();
  std::vector<Scalar> p(n + 1, Scalar(0));
  for (std::size_t j = 1; j <= n; ++j) p[j] = traces[j - 1] / static_cast<double>(2 * j);
  // e' = p' e  =>  k e_k = sum_j j p_j e_{k-j}
  std::vector<Scalar> e(n + 1, Scalar(0));
  e[0] = Scalar(1);
  for (std::size_t k = 1; k <= n; ++k) {
    Scalar acc(0);
    for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * p[j] * e[k - j];
    e[k] = acc / static_cast<double>(k);
  }
  return e[n];
}

}  // namespace detail

/// Hafnian of a symmetric matrix of even dimension 2n.
///
/// Inclusion-exclusion over the n index pairs (i, i + n): every perfect
/// matching closes into alternating cycles with the pair edges, which the
/// power traces of (A X)_S enumerate. O(n^4 2^n) time, O(n^2) memory.
/// Odd dimension gives 0 and the empty matrix gives 1.
template <typename Derived>
typename Derived::Scalar hafnian(const Eigen::MatrixBase<Derived>& a_in,
                                 const MatrixFnLimits& limits = {}) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat a = symmetrized(a_in, 1e-12 * std::max(1.0, max_abs(a_in)), "hafnian");
  const Eigen::Index dim = a.rows();
  if (dim == 0) return Scalar(1);
  if (dim % 2 == 1) return Scalar(0);
  detail::check_cap("hafnian", dim, limits.hafnian_dim);

  const Eigen::Index n = dim / 2;
  // AX swaps the two column halves.
  Mat ax(dim, dim);
  ax.leftCols(n) = a.rightCols(n);
  ax.rightCols(n) = a.leftCols(n);

  Scalar total(0);
  std::vector<Eigen::Index> idx;
  std::vector<Scalar> traces(static_cast<std::size_t>(n));
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    idx.clear();
    for (Eigen::Index i = 0; i < n; ++i)
      if (mask >> i & 1U) idx.push_back(i);
    const auto k = static_cast<Eigen::Index>(idx.size());
    for (Eigen::Index i = 0; i < k; ++i) idx.push_back(idx[i] + n);
    const Mat c = ax(idx, idx);
    Mat power = c;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j > 0) power = power * c;
      traces[static_cast<std::size_t>(j)] = power.trace();
    }
    const Scalar term = detail::power_trace_coefficient(traces);
    total += ((n - k) % 2 == 0) ? term : Scalar(-term);
  }
  return total;
}

/// Hafnian of the matrix obtained from `a` by repeating row/column i
/// reps[i] times, by Kan's moment formula:
///   sum_v (-1)^|v| prod_i C(reps_i, v_i) (h^T A h / 2)^n / n!,  h = reps/2 - v.
/// Costs prod_i (reps_i + 1) quadratic forms, so it wins over hafnian() when
/// indices repeat many times. Alternating terms lose roughly
/// log10(largest term / result) digits.
Complex hafnian_repeated(const ComplexMatrix& a, std::span<const int> reps, double max_terms = 67108864.0);

/// Permanent by Ryser's formula with Gray-code row sums, O(2^n n).
template <typename Derived>
typename Derived::Scalar permanent(const Eigen::MatrixBase<Derived>& a,
                                   const MatrixFnLimits& limits = {}) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw DomainError("permanent: matrix must be square");
  const Eigen::Index n = a.rows();
  if (n == 0) return Scalar(1);
  detail::check_cap("permanent", n, limits.permanent_dim);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_sums = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  Scalar total(0);
  std::uint64_t gray = 0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const auto bit = static_cast<Eigen::Index>(__builtin_ctzll(k));
    gray ^= std::uint64_t{1} << bit;
    if (gray >> bit & 1U) {
      row_sums += a.col(bit);
    } else {
      row_sums -= a.col(bit);
    }
    const Scalar prod = row_sums.prod();
    const int size = __builtin_popcountll(gray);
    total += ((n - size) % 2 == 0) ? prod : Scalar(-prod);
  }
  return total;
}

/// Sum over Z of (-1)^(m-|Z|) det(I - O_Z)^(-1/2), where O is 2m x 2m and O_Z
/// keeps rows/columns {i, i+m : i in Z}. Positive for matrices built from
/// valid Gaussian states; throws InvalidStateError naming Z when some
/// det(I - O_Z) is not positive.
///
/// The 2^m terms are summed in fixed chunks with compensated accumulation, so
/// the result does not depend on `workers`.
double torontonian(const ComplexMatrix& o, const MatrixFnLimits& limits = {}, int workers = 1);

}  // namespace gbspp
