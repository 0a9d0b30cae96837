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

#include "gbspp/matrixfn.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace gbspp {

std::vector<Eigen::Index> Reduction::indices() const {
  const auto m = static_cast<Eigen::Index>(pattern.size());
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (pattern[i] < 0) throw DomainError("reduce: pattern entries must be non-negative");
    for (int r = 0; r < pattern[i]; ++r) idx.push_back(i);
  }
  if (doubled) {
    const std::size_t half = idx.size();
    for (std::size_t k = 0; k < half; ++k) idx.push_back(idx[k] + m);
  }
  return idx;
}

int Reduction::total() const {
  int s = 0;
  for (int v : pattern) s += v;
  return s;
}

namespace detail {

void check_cap(const char* what, Eigen::Index size, int cap) {
  if (size > cap) {
    std::ostringstream os;
    os << what << ": size " << size << " exceeds the configured cap of " << cap;
    throw CapExceededError(os.str());
  }
}

}  // namespace detail

Complex hafnian_repeated(const ComplexMatrix& a_in, std::span<const int> reps, double max_terms) {
  const ComplexMatrix a = symmetrized(a_in, 1e-12 * std::max(1.0, max_abs(a_in)), "hafnian_repeated");
  if (static_cast<Eigen::Index>(reps.size()) != a.rows())
    throw DomainError("hafnian_repeated: repetition vector length does not match the matrix");
  std::vector<Eigen::Index> idx;
  std::vector<int> r;
  double terms = 1.0;
  int total = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i] < 0) throw DomainError("hafnian_repeated: repetitions must be non-negative");
    if (reps[i] == 0) continue;
    idx.push_back(static_cast<Eigen::Index>(i));
    r.push_back(reps[i]);
    terms *= reps[i] + 1;
    total += reps[i];
  }
  if (total == 0) return {1.0, 0.0};
  if (total % 2 == 1) return {0.0, 0.0};
  if (terms > max_terms) {
    std::ostringstream os;
    os << "hafnian_repeated: " << terms << " terms exceed the budget of " << max_terms;
    throw CapExceededError(os.str());
  }
  const ComplexMatrix sub = a(idx, idx);
  const std::size_t k = r.size();
  const int n = total / 2;

  // binom[i][v] = C(r_i, v)
  std::vector<std::vector<double>> binom(k);
  for (std::size_t i = 0; i < k; ++i) {
    binom[i].assign(static_cast<std::size_t>(r[i]) + 1, 1.0);
    for (int v = 1; v <= r[i]; ++v) binom[i][v] = binom[i][v - 1] * (r[i] - v + 1) / v;
  }

  std::vector<int> v(k, 0);
  ComplexVector h(static_cast<Eigen::Index>(k));
  std::complex<long double> acc(0.0L, 0.0L);
  for (;;) {
    double weight = 1.0;
    int parity = 0;
    for (std::size_t i = 0; i < k; ++i) {
      h[static_cast<Eigen::Index>(i)] = 0.5 * r[i] - v[i];
      weight *= binom[i][v[i]];
      parity += v[i];
    }
    const Complex half_q = (h.transpose() * sub * h).value() / 2.0;
    std::complex<long double> term(static_cast<long double>(weight), 0.0L);
    const std::complex<long double> hq(half_q.real(), half_q.imag());
    for (int j = 1; j <= n; ++j) term *= hq / static_cast<long double>(j);
    acc += (parity % 2 == 0) ? term : -term;

    std::size_t pos = 0;
    while (pos < k && v[pos] == r[pos]) v[pos++] = 0;
    if (pos == k) break;
    ++v[pos];
  }
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

namespace {

struct KahanSum {
  Complex sum{0.0, 0.0};
  Complex carry{0.0, 0.0};

  void add(Complex x) {
    const Complex y = x - carry;
    const Complex t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

constexpr int kChunks = 64;

std::string describe_subset(std::uint64_t mask, Eigen::Index m) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (mask >> i & 1U) {
      os << (first ? "" : ",") << i;
      first = false;
    }
  }
  os << "}";
  return os.str();
}

void sum_range(const ComplexMatrix& o, Eigen::Index m, std::uint64_t begin, std::uint64_t end,
               KahanSum& acc) {
  std::vector<Eigen::Index> idx;
  for (std::uint64_t mask = begin; mask < end; ++mask) {
    idx.clear();
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask >> i & 1U) idx.push_back(i);
    const auto k = static_cast<Eigen::Index>(idx.size());
    for (Eigen::Index i = 0; i < k; ++i) idx.push_back(idx[i] + m);
    Complex det(1.0, 0.0);
    if (k > 0) {
      const ComplexMatrix sub = ComplexMatrix::Identity(2 * k, 2 * k) - o(idx, idx);
      det = Eigen::PartialPivLU<ComplexMatrix>(sub).determinant();
    }
    if (!(det.real() > 0.0) || !std::isfinite(det.real())) {
      std::ostringstream os;
      os << "torontonian: det(I - O_Z) = " << det.real() << " is not positive for Z = "
         << describe_subset(mask, m);
      throw InvalidStateError(os.str());
    }
    const Complex term = 1.0 / std::sqrt(det);
    acc.add(((m - k) % 2 == 0) ? term : -term);
  }
}

}  // namespace

double torontonian(const ComplexMatrix& o, const MatrixFnLimits& limits, int workers) {
  if (o.rows() != o.cols() || o.rows() % 2 != 0)
    throw DomainError("torontonian: expected a square matrix of even dimension");
  const Eigen::Index m = o.rows() / 2;
  detail::check_cap("torontonian", m, limits.torontonian_modes);
  const std::uint64_t subsets = std::uint64_t{1} << m;

  const int chunks = static_cast<int>(std::min<std::uint64_t>(kChunks, subsets));
  std::vector<KahanSum> partial(static_cast<std::size_t>(chunks));
  auto chunk_bounds = [&](int c) {
    const std::uint64_t lo = subsets * static_cast<std::uint64_t>(c) / chunks;
    const std::uint64_t hi = subsets * static_cast<std::uint64_t>(c + 1) / chunks;
    return std::pair{lo, hi};
  };

  workers = std::clamp(workers, 1, chunks);
  if (workers == 1) {
    for (int c = 0; c < chunks; ++c) {
      auto [lo, hi] = chunk_bounds(c);
      sum_range(o, m, lo, hi, partial[static_cast<std::size_t>(c)]);
    }
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int c = w; c < chunks; c += workers) {
            auto [lo, hi] = chunk_bounds(c);
            sum_range(o, m, lo, hi, partial[static_cast<std::size_t>(c)]);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  KahanSum total;
  for (const auto& p : partial) {
    total.add(p.sum);
    total.add(-p.carry);
  }
  const Complex result = total.sum - total.carry;
  if (std::abs(result.imag()) > 1e-9 * std::max(1.0, std::abs(result.real()))) {
    std::ostringstream os;
    os << "torontonian: imaginary residue " << result.imag() << " exceeds tolerance";
    throw NumericalError(os.str());
  }
  return result.real();
}

}  // namespace gbspp
