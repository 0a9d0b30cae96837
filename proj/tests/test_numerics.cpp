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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gbspp/numerics.hpp"
#include "oracles.hpp"

using namespace gbspp;

TEST(SymEig, IdentityHasUnitSpectrum) {
  const Spectrum s = sym_eig(RealMatrix::Identity(3, 3));
  EXPECT_TRUE(s.eigenvalues.isApprox(RealVector::Ones(3)));
  EXPECT_LE(max_abs(s.eigenvectors.transpose() * s.eigenvectors - RealMatrix::Identity(3, 3)), 1e-12);
}

TEST(SymEig, DiagonalSortedDescending) {
  RealMatrix a(2, 2);
  a << 2, 0, 0, -3;
  const Spectrum s = sym_eig(a);
  EXPECT_DOUBLE_EQ(s.eigenvalues[0], 2.0);
  EXPECT_DOUBLE_EQ(s.eigenvalues[1], -3.0);
  EXPECT_NEAR(std::abs(s.eigenvectors(0, 0)), 1.0, 1e-14);
}

TEST(SymEig, SwapMatrix) {
  RealMatrix a(2, 2);
  a << 0, 1, 1, 0;
  const Spectrum s = sym_eig(a);
  EXPECT_NEAR(s.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[1], -1.0, 1e-14);
}

TEST(SymEig, RandomReconstructionUpTo50) {
  std::mt19937_64 gen(11);
  for (int m : {1, 2, 7, 20, 50}) {
    const RealMatrix a = oracle::random_symmetric(m, gen);
    const Spectrum s = sym_eig(a);
    const RealMatrix& q = s.eigenvectors;
    EXPECT_LE(max_abs(a - q * s.eigenvalues.asDiagonal() * q.transpose()), 1e-10 * max_abs(a)) << m;
    EXPECT_LE(max_abs(q.transpose() * q - RealMatrix::Identity(m, m)), 1e-10) << m;
    for (int i = 1; i < m; ++i) EXPECT_GE(s.eigenvalues[i - 1], s.eigenvalues[i]);
  }
}

TEST(SymEig, RejectsAsymmetric) {
  RealMatrix a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_THROW(sym_eig(a), DomainError);
}

TEST(Takagi, NegativeEigenvalueGetsImaginaryPhase) {
  RealMatrix b(2, 2);
  b << 1, 0, 0, -1;
  const TakagiFactors t = takagi_real(b);
  EXPECT_NEAR(t.lambdas[0], 1.0, 1e-15);
  EXPECT_NEAR(t.lambdas[1], 1.0, 1e-15);
  const ComplexMatrix rec = t.U * t.lambdas.cast<Complex>().asDiagonal() * t.U.transpose();
  EXPECT_LE(max_abs(rec - b.cast<Complex>()), 1e-14);
}

TEST(Takagi, PsdGivesRealU) {
  std::mt19937_64 gen(3);
  const RealMatrix b = oracle::random_psd(4, gen);
  const TakagiFactors t = takagi_real(b);
  EXPECT_LE(max_abs(t.U.imag()), 0.0);
  EXPECT_TRUE(t.lambdas.isApprox(sym_eig(b).eigenvalues, 1e-12));
}

TEST(Takagi, RandomRoundTripAndUnitarity) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const RealMatrix b = oracle::random_symmetric(4 + trial, gen);
    const TakagiFactors t = takagi_real(b);
    EXPECT_GE(t.lambdas.minCoeff(), 0.0);
    const ComplexMatrix rec = t.U * t.lambdas.cast<Complex>().asDiagonal() * t.U.transpose();
    EXPECT_LE(max_abs(rec - b.cast<Complex>()), 1e-10);
    const auto n = b.rows();
    EXPECT_LE(max_abs(t.U.adjoint() * t.U - ComplexMatrix::Identity(n, n)), 1e-10);
  }
}

TEST(Determinant, Conventions) {
  EXPECT_EQ(determinant(ComplexMatrix(0, 0)), Complex(1.0));
  RealMatrix d(2, 2);
  d << 2, 0, 0, 3;
  EXPECT_NEAR(determinant(d), 6.0, 1e-14);
  RealMatrix a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_NEAR(determinant(a), -2.0, 1e-14);
  RealMatrix s(2, 2);
  s << 1, 2, 2, 4;
  EXPECT_EQ(determinant(s), 0.0);
}

TEST(Determinant, Multiplicative) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = oracle::random_complex(4, gen);
    const ComplexMatrix b = oracle::random_complex(4, gen);
    const Complex lhs = determinant(a * b);
    const Complex rhs = determinant(a) * determinant(b);
    EXPECT_LE(std::abs(lhs - rhs), 1e-8 * std::abs(rhs));
  }
}

TEST(Invert, BasicsAndResidual) {
  EXPECT_LE(max_abs(invert(ComplexMatrix(ComplexMatrix::Identity(3, 3))) - ComplexMatrix::Identity(3, 3)), 0.0);
  ComplexMatrix d(1, 1);
  d << 2.0;
  EXPECT_NEAR(invert(d)(0, 0).real(), 0.5, 1e-16);
  std::mt19937_64 gen(23);
  const ComplexMatrix a = oracle::random_complex(5, gen) + 5.0 * ComplexMatrix::Identity(5, 5);
  EXPECT_LE(max_abs(a * invert(a) - ComplexMatrix::Identity(5, 5)), 1e-9);
}

TEST(Invert, SingularCarriesConditionEstimate) {
  RealMatrix s(2, 2);
  s << 1, 2, 2, 4;
  try {
    invert(s);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("condition"), std::string::npos) << e.what();
  }
}

TEST(Bisect, ClosedForms) {
  EXPECT_NEAR(bisect_monotone([](double x) { return x; }, 0.5, 0.0, 1.0, 1e-12), 0.5, 1e-12);
  const double r = bisect_monotone([](double x) { return x * x; }, 2.0, 0.0, 10.0, 1e-12);
  EXPECT_NEAR(r * r, 2.0, 1e-12);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-10);
}

TEST(Bisect, UnreachableTargetThrows) {
  EXPECT_THROW(bisect_monotone([](double x) { return x; }, 5.0, 0.0, 1.0, 1e-9), NumericalError);
}

TEST(Bisect, DeterministicAndNeverTouchesEndpoints) {
  auto f = [](double x) {
    if (x <= 0.0 || x >= 1.0) throw std::logic_error("endpoint evaluated");
    return x / (1.0 - x);
  };
  const double a = bisect_monotone(f, 3.0, 0.0, 1.0, 1e-12);
  const double b = bisect_monotone(f, 3.0, 0.0, 1.0, 1e-12);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(f(a), 3.0, 1e-12);
}

TEST(KernelMatrixTest, SharesSpectrumAcrossCopies) {
  RealMatrix a(2, 2);
  a << 2, 1, 1, 2;
  const KernelMatrix k(a);
  const KernelMatrix copy = k;
  EXPECT_EQ(&k.spectrum(), &copy.spectrum());
  EXPECT_TRUE(k.is_psd());
  a << 1, 2, 2, 1;
  EXPECT_FALSE(KernelMatrix(a).is_psd());
}
