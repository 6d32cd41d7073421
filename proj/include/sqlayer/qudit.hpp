#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sqlayer/rng.hpp"

namespace sqlayer {

using Complex = std::complex<double>;

inline constexpr double kNormTolerance = 1e-9;

/// Single-subsystem measurement basis.
enum class Basis { Computational, Fourier };

/// Composite preparation basis: S1 is computational on both subsystems,
/// S2 is Fourier on both.
enum class BasisSet { S1, S2 };

constexpr Basis subsystem_basis(BasisSet set) noexcept {
  return set == BasisSet::S1 ? Basis::Computational : Basis::Fourier;
}

/// Sign of the DFT exponent. The library uses Positive throughout;
/// Negative exists so the convention can be shown not to matter.
enum class FourierSign { Positive = 1, Negative = -1 };

inline bool valid_dim(std::size_t d) noexcept { return d == 3 || d == 9 || d == 27; }

/// Normalized amplitude vector of dimension 3, 9 or 27.
class StateVector {
 public:
  explicit StateVector(std::vector<Complex> amps, double tolerance = kNormTolerance)
      : amps_(std::move(amps)) {
    if (!valid_dim(amps_.size()))
      throw std::invalid_argument("StateVector: dimension must be 3, 9 or 27, got " +
                                  std::to_string(amps_.size()));
    const double dev = std::abs(norm_squared() - 1.0);
    if (dev > tolerance)
      throw std::invalid_argument("StateVector: not normalized (|norm^2 - 1| = " +
                                  std::to_string(dev) + ")");
  }

  static StateVector basis_state(std::size_t dim, std::size_t k) {
    if (k >= dim) throw std::out_of_range("basis_state: index out of range");
    std::vector<Complex> amps(dim);
    amps[k] = 1.0;
    return StateVector(std::move(amps));
  }

  std::size_t dim() const noexcept { return amps_.size(); }
  const std::vector<Complex>& amps() const noexcept { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::vector<Complex> amps_;
};

/// Dense square complex matrix, row-major.
struct Matrix {
  std::size_t n = 0;
  std::vector<Complex> data;

  explicit Matrix(std::size_t size) : n(size), data(size * size) {}
  Complex& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
};

/// (1/sqrt d) exp(±2πi jk/d).
inline Matrix fourier_matrix(std::size_t d, FourierSign sign = FourierSign::Positive) {
  if (d < 2) throw std::invalid_argument("fourier_matrix: d must be >= 2");
  Matrix f(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const double s = static_cast<double>(static_cast<int>(sign));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < d; ++k) {
      // Reduce jk mod d first so the phase stays exact for large products.
      const double phase = s * 2.0 * std::numbers::pi * static_cast<double>((j * k) % d) /
                           static_cast<double>(d);
      f(j, k) = std::polar(scale, phase);
    }
  return f;
}

/// k-th vector of the given basis in dimension d.
inline StateVector basis_vector(Basis basis, std::size_t d, std::size_t k,
                                FourierSign sign = FourierSign::Positive) {
  if (basis == Basis::Computational) return StateVector::basis_state(d, k);
  if (k >= d) throw std::out_of_range("basis_vector: index out of range");
  const Matrix f = fourier_matrix(d, sign);
  std::vector<Complex> col(d);
  for (std::size_t j = 0; j < d; ++j) col[j] = f(j, k);
  return StateVector(std::move(col));
}

/// <u|v>, conjugate-linear in u.
inline Complex overlap(const StateVector& u, const StateVector& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("overlap: dimension mismatch");
  Complex s{};
  for (std::size_t i = 0; i < u.dim(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

/// A separable state of the 9-level and 3-level carriers.
struct ProductState {
  StateVector first;   // to Bob1, dim 9
  StateVector second;  // to Bob2, dim 3
  friend bool operator==(const ProductState&, const ProductState&) = default;
};

inline constexpr int kFirstDim = 9;
inline constexpr int kSecondDim = 3;
inline constexpr int kAlphabet = 9;

inline void check_symbol(int a) {
  if (a < 0 || a >= kAlphabet)
    throw std::out_of_range("preparation index must be in 0..8, got " + std::to_string(a));
}

/// a-th element of S1: |a> ⊗ |a mod 3>.
inline ProductState prepare_s1(int a) {
  check_symbol(a);
  return {StateVector::basis_state(kFirstDim, static_cast<std::size_t>(a)),
          StateVector::basis_state(kSecondDim, static_cast<std::size_t>(a % 3))};
}

/// a-th element of S2: F9|a> ⊗ F3|a mod 3>.
inline ProductState prepare_s2(int a, FourierSign sign = FourierSign::Positive) {
  check_symbol(a);
  return {basis_vector(Basis::Fourier, kFirstDim, static_cast<std::size_t>(a), sign),
          basis_vector(Basis::Fourier, kSecondDim, static_cast<std::size_t>(a % 3), sign)};
}

inline ProductState prepare(BasisSet set, int a) {
  return set == BasisSet::S1 ? prepare_s1(a) : prepare_s2(a);
}

/// Outcome probabilities |<basis_k|state>|² for all k.
inline std::vector<double> outcome_probabilities(const StateVector& state, Basis basis,
                                                 FourierSign sign = FourierSign::Positive) {
  const std::size_t d = state.dim();
  std::vector<double> p(d);
  if (basis == Basis::Computational) {
    for (std::size_t k = 0; k < d; ++k) p[k] = std::norm(state[k]);
    return p;
  }
  // <F_k|ψ> = Σ_j conj(F(j,k)) ψ_j
  const Matrix f = fourier_matrix(d, sign);
  for (std::size_t k = 0; k < d; ++k) {
    Complex s{};
    for (std::size_t j = 0; j < d; ++j) s += std::conj(f(j, k)) * state[j];
    p[k] = std::norm(s);
  }
  return p;
}

struct MeasurementOutcome {
  int index;
  StateVector post_state;
};

/// Projective measurement in `basis`. Consumes exactly one draw from rng.
inline MeasurementOutcome measure(const StateVector& state, Basis basis, RngStream& rng) {
  if (std::abs(state.norm_squared() - 1.0) > kNormTolerance)
    throw std::invalid_argument("measure: state not normalized");
  const std::vector<double> p = outcome_probabilities(state, basis);
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t pick = p.size();
  std::size_t last_nonzero = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) last_nonzero = k;
    acc += p[k];
    if (u < acc && pick == p.size()) pick = k;
  }
  // Rounding can leave acc a hair below u; fall back to the last supported outcome.
  if (pick == p.size()) pick = last_nonzero;
  return {static_cast<int>(pick), basis_vector(basis, state.dim(), pick)};
}

}  // namespace sqlayer
