#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "sqlayer/qudit.hpp"
#include "sqlayer/rng.hpp"
#include "test_support.hpp"

using namespace sqlayer;

namespace {

double max_deviation_from_identity(const Matrix& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t j = 0; j < f.n; ++j) {
      Complex s{};
      for (std::size_t k = 0; k < f.n; ++k) s += f(i, k) * std::conj(f(j, k));
      worst = std::max(worst, std::abs(s - Complex(i == j ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST(FourierMatrix, FirstColumnIsUniform) {
  const Matrix f = fourier_matrix(3);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(f(j, 0) - 1.0 / std::sqrt(3.0)), 0, 1e-15);
}

TEST(FourierMatrix, EntryModulus) {
  EXPECT_NEAR(std::norm(fourier_matrix(3)(1, 1)), 1.0 / 3.0, 1e-15);
}

TEST(FourierMatrix, Unitary) {
  for (std::size_t d : {2u, 3u, 9u, 27u})
    for (auto sign : {FourierSign::Positive, FourierSign::Negative})
      EXPECT_LT(max_deviation_from_identity(fourier_matrix(d, sign)), 1e-9) << "d=" << d;
}

TEST(FourierMatrix, PositiveExponentConvention) {
  const Matrix f = fourier_matrix(3);
  const Complex expected = std::exp(Complex(0, 2.0 * std::numbers::pi / 3.0)) / std::sqrt(3.0);
  EXPECT_NEAR(std::abs(f(1, 1) - expected), 0, 1e-15);
}

TEST(FourierMatrix, RejectsSmallDimension) {
  EXPECT_THROW(fourier_matrix(1), std::invalid_argument);
  EXPECT_THROW(fourier_matrix(0), std::invalid_argument);
}

TEST(StateVector, RejectsBadInput) {
  EXPECT_THROW(StateVector(std::vector<Complex>{1, 0, 0, 0}), std::invalid_argument);
  EXPECT_THROW(StateVector(std::vector<Complex>{1, 1, 0}), std::invalid_argument);
  EXPECT_THROW(StateVector::basis_state(3, 3), std::out_of_range);
}

TEST(PrepareS1, MatchesListedStates) {
  // |00>,|11>,|22>,|30>,|41>,|52>,|60>,|71>,|82>
  const std::array<std::array<int, 2>, 9> listed{
      {{0, 0}, {1, 1}, {2, 2}, {3, 0}, {4, 1}, {5, 2}, {6, 0}, {7, 1}, {8, 2}}};
  for (int a = 0; a < 9; ++a) {
    const ProductState s = prepare_s1(a);
    EXPECT_EQ(s.first, StateVector::basis_state(9, listed[a][0]));
    EXPECT_EQ(s.second, StateVector::basis_state(3, listed[a][1]));
  }
}

TEST(PrepareS1, RangeChecked) {
  EXPECT_THROW(prepare_s1(-1), std::out_of_range);
  EXPECT_THROW(prepare_s1(9), std::out_of_range);
  EXPECT_THROW(prepare_s2(9), std::out_of_range);
}

TEST(PrepareS2, ZeroIsUniform) {
  const ProductState s = prepare_s2(0);
  for (const auto& a : s.first.amps()) EXPECT_NEAR(std::abs(a - 1.0 / 3.0), 0, 1e-15);
  for (const auto& a : s.second.amps()) EXPECT_NEAR(std::abs(a - 1.0 / std::sqrt(3.0)), 0, 1e-15);
}

TEST(PrepareS2, IsFourierImageOfS1) {
  for (int a = 0; a < 9; ++a) {
    const ProductState s = prepare_s2(a);
    const Matrix f9 = fourier_matrix(9), f3 = fourier_matrix(3);
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_NEAR(std::abs(s.first[j] - f9(j, a)), 0, 1e-15);
      EXPECT_NEAR(std::norm(s.first[j]), 1.0 / 9.0, 1e-12);
    }
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(s.second[j] - f3(j, a % 3)), 0, 1e-15);
  }
}

TEST(Overlap, Basics) {
  const auto e0 = StateVector::basis_state(9, 0), e1 = StateVector::basis_state(9, 1);
  EXPECT_EQ(overlap(e0, e0), Complex(1.0));
  EXPECT_EQ(overlap(e0, e1), Complex(0.0));
  EXPECT_THROW(overlap(e0, StateVector::basis_state(3, 0)), std::invalid_argument);
}

TEST(Overlap, ConjugatesLeftArgument) {
  const double r = 1.0 / std::sqrt(2.0);
  const StateVector u(std::vector<Complex>{{0, r}, {r, 0}, {0, 0}});
  const StateVector v = StateVector::basis_state(3, 0);
  EXPECT_NEAR(std::abs(overlap(u, v) - Complex(0, -r)), 0, 1e-15);
}

TEST(Overlap, ComputationalVsFourierIsUnbiased) {
  for (std::size_t a = 0; a < 9; ++a)
    for (std::size_t b = 0; b < 9; ++b)
      EXPECT_NEAR(std::norm(overlap(StateVector::basis_state(9, a),
                                    basis_vector(Basis::Fourier, 9, b))),
                  1.0 / 9.0, 1e-12);
}

TEST(Overlap, CompositeS1S2AreMutuallyUnbiased) {
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < 9; ++b) {
      const ProductState s1 = prepare_s1(a), s2 = prepare_s2(b);
      const double p = std::norm(overlap(s1.first, s2.first) * overlap(s1.second, s2.second));
      EXPECT_NEAR(p, 1.0 / 27.0, 1e-9);
    }
}

TEST(Measure, EigenstatesAreDeterministic) {
  RngStream rng(1, "t");
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(measure(StateVector::basis_state(9, 5), Basis::Computational, rng).index, 5);
    EXPECT_EQ(measure(basis_vector(Basis::Fourier, 9, 2), Basis::Fourier, rng).index, 2);
  }
}

TEST(Measure, ConsumesOneDraw) {
  RngStream rng(1, "t");
  measure(prepare_s2(3).first, Basis::Computational, rng);
  EXPECT_EQ(rng.draws(), 1u);
}

TEST(Measure, PostStateIsBasisVector) {
  RngStream rng(7, "t");
  for (int i = 0; i < 50; ++i) {
    const auto m = measure(prepare_s2(i % 9).first, Basis::Computational, rng);
    EXPECT_EQ(m.post_state, StateVector::basis_state(9, m.index));
    // Repeatability: measuring again gives the same answer.
    EXPECT_EQ(measure(m.post_state, Basis::Computational, rng).index, m.index);
    const auto f = measure(m.post_state, Basis::Fourier, rng);
    EXPECT_EQ(measure(f.post_state, Basis::Fourier, rng).index, f.index);
  }
}

TEST(Measure, FourierZeroGivesUniformOutcomes) {
  RngStream rng(2024, "stats");
  const StateVector s = basis_vector(Basis::Fourier, 9, 0);
  constexpr std::size_t n = 100000;
  std::array<std::size_t, 9> counts{};
  for (std::size_t i = 0; i < n; ++i) ++counts[measure(s, Basis::Computational, rng).index];
  for (auto c : counts) EXPECT_TRUE(testutil::within_5sigma(double(c) / n, n, 1.0 / 9.0)) << c;
}

TEST(Measure, QutritFourierGivesThirds) {
  RngStream rng(5, "stats");
  const StateVector s = basis_vector(Basis::Fourier, 3, 0);
  constexpr std::size_t n = 30000;
  std::array<std::size_t, 3> counts{};
  for (std::size_t i = 0; i < n; ++i) ++counts[measure(s, Basis::Computational, rng).index];
  for (auto c : counts) EXPECT_TRUE(testutil::within_5sigma(double(c) / n, n, 1.0 / 3.0));
}

TEST(Rng, SameConfigurationSameSequence) {
  RngStream a(42, "alice"), b(42, "alice"), c(42, "bob1"), d(43, "alice");
  std::vector<std::uint64_t> xa, xb, xc, xd;
  for (int i = 0; i < 64; ++i) {
    xa.push_back(a.uniform_int(1000));
    xb.push_back(b.uniform_int(1000));
    xc.push_back(c.uniform_int(1000));
    xd.push_back(d.uniform_int(1000));
  }
  EXPECT_EQ(xa, xb);
  EXPECT_NE(xa, xc);
  EXPECT_NE(xa, xd);
}

TEST(Rng, MeasurementSequencesRepeat) {
  RngStream a(9, "x"), b(9, "x");
  const StateVector s = prepare_s2(4).first;
  for (int i = 0; i < 200; ++i)
    EXPECT_EQ(measure(s, Basis::Computational, a).index, measure(s, Basis::Computational, b).index);
}

TEST(Rng, UniformRange) {
  RngStream r(3, "u");
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.uniform_int(9), 9u);
  }
  EXPECT_THROW(r.uniform_int(0), std::invalid_argument);
}
