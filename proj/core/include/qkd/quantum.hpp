#pragma once

// Exact linear algebra for a single qubit (2 amplitudes) and a qubit paired
// with one probe qubit (4 amplitudes).
//
// Coordinates: a linear polarization at angle phi from vertical is the ket
// (cos phi, sin phi). Vertical is (1, 0), horizontal is (0, 1).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>

#include "qkd/bits.hpp"
#include "qkd/error.hpp"
#include "qkd/rng.hpp"

namespace qkd {

using Complex = std::complex<double>;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kOperatorTolerance = 1e-10;
/// Outcome probabilities below this are treated as exactly zero when sampling.
inline constexpr double kProbabilityFloor = 1e-12;

/// Unit state vector of dimension N. Only constructible through
/// normalization, so every instance satisfies |norm - 1| < kNormTolerance.
template <std::size_t N>
class Ket {
 public:
  static Ket normalized(const std::array<Complex, N>& amplitudes);

  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  const std::array<Complex, N>& amplitudes() const { return amps_; }
  static constexpr std::size_t dimension() { return N; }

 private:
  explicit Ket(const std::array<Complex, N>& a) : amps_(a) {}
  std::array<Complex, N> amps_;
};

using Ket2 = Ket<2>;
/// Carrier (x) probe. Index = 2 * carrier_bit + probe_bit.
using Ket4 = Ket<4>;

/// Dense row-major N x N complex matrix.
template <std::size_t N>
struct Matrix {
  std::array<Complex, N * N> entries{};

  Complex& operator()(std::size_t r, std::size_t c) { return entries[r * N + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return entries[r * N + c]; }

  static Matrix identity();
  Matrix adjoint() const;
  Complex trace() const;

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    Matrix out;
    for (std::size_t i = 0; i < N * N; ++i) out.entries[i] = a.entries[i] + b.entries[i];
    return out;
  }
  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix out;
    for (std::size_t i = 0; i < N * N; ++i) out.entries[i] = a.entries[i] - b.entries[i];
    return out;
  }
  friend Matrix operator*(Complex s, const Matrix& m) {
    Matrix out;
    for (std::size_t i = 0; i < N * N; ++i) out.entries[i] = s * m.entries[i];
    return out;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix out;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c) {
        Complex sum{};
        for (std::size_t k = 0; k < N; ++k) sum += a(r, k) * b(k, c);
        out(r, c) = sum;
      }
    return out;
  }
};

using Matrix2 = Matrix<2>;
using Matrix4 = Matrix<4>;

// Construction ---------------------------------------------------------------

/// Throws Errc::ZeroVector if |a0|^2 + |a1|^2 < 1e-24.
Ket2 make_qubit(Complex a0, Complex a1);
Ket4 make_joint(const std::array<Complex, 4>& amplitudes);

/// Linear polarization at `angle` radians from vertical.
Ket2 polarization(double angle);
/// The unit ket orthogonal to `k`: (-conj(a1), conj(a0)).
Ket2 orthogonal_complement(const Ket2& k);
/// Real rotation by `angle`: [[cos, -sin], [sin, cos]].
Matrix2 polarization_rotation(double angle);

Ket4 tensor(const Ket2& carrier, const Ket2& probe);

// Products and predicates -----------------------------------------------------

/// <u|v>, conjugate-linear in u. Mixing dimensions is a compile error.
template <std::size_t N>
Complex inner(const Ket<N>& u, const Ket<N>& v) {
  Complex sum{};
  for (std::size_t i = 0; i < N; ++i) sum += std::conj(u[i]) * v[i];
  return sum;
}

template <std::size_t N>
double norm(const Ket<N>& k) {
  return std::sqrt(std::real(inner(k, k)));
}

/// |u><v|
Matrix2 outer(const Ket2& u, const Ket2& v);
Matrix4 kron(const Matrix2& a, const Matrix2& b);

template <std::size_t N>
bool is_unitary(const Matrix<N>& u, double tol = kOperatorTolerance);
template <std::size_t N>
bool is_hermitian(const Matrix<N>& m, double tol = kOperatorTolerance);
/// 2x2 Hermitian positivity via trace >= -tol and det >= -tol.
bool is_positive_semidefinite(const Matrix2& m, double tol = kOperatorTolerance);

/// Throws Errc::NotUnitary unless U^dagger U = I within 1e-10.
template <std::size_t N>
Ket<N> apply_unitary(const Matrix<N>& u, const Ket<N>& state);

/// <s|M|s> without any Hermiticity check.
template <std::size_t N>
Complex quadratic_form(const Matrix<N>& m, const Ket<N>& s);

// Measurement -----------------------------------------------------------------

/// Orthonormal pair; index in the array is the outcome label.
using Basis2 = std::array<Ket2, 2>;

/// Picks an index by cumulative inversion of one uniform draw. Entries below
/// kProbabilityFloor are zeroed first so that forbidden outcomes never occur.
std::size_t sample_outcome(std::span<const double> probabilities, Rng& rng);

struct ProjectiveOutcome {
  Bit bit;
  Ket2 collapsed;
};

/// Throws Errc::BadBasis if |<b0|b1>| > 1e-10.
ProjectiveOutcome measure_projective(const Ket2& s, const Basis2& basis, Rng& rng);

/// Outcome order is fixed (Zero, One, Inconclusive); it is also the order of
/// cumulative inversion.
enum class PovmOutcome : std::uint8_t { Zero = 0, One = 1, Inconclusive = 2 };

/// Three-element receiver for the code states |theta+> ("1") and |theta->
/// ("0"): conclusive elements annihilate the other code state.
struct PovmSet {
  Matrix2 a_plus;
  Matrix2 a_minus;
  Matrix2 a_q;
  double theta = 0.0;
};

/// Throws Errc::ThetaOutOfRange unless 0 < theta < pi/4.
PovmSet build_povm(double theta);
bool povm_is_valid(const PovmSet& p, double tol = kOperatorTolerance);

/// {P(Zero), P(One), P(Inconclusive)} for the state.
std::array<double, 3> povm_probabilities(const Ket2& s, const PovmSet& p);
std::array<double, 3> povm_probabilities(const Ket4& joint, const PovmSet& p);
PovmOutcome measure_povm(const Ket2& s, const PovmSet& p, Rng& rng);

struct CarrierOutcome {
  Bit bit;
  Ket2 residual_probe;
};

/// Projects the carrier of `joint` onto `onto`, returning the normalized probe
/// state and writing the squared norm of the projection to `weight`.
std::optional<Ket2> project_carrier(const Ket4& joint, const Ket2& onto, double* weight = nullptr);

/// Throws Errc::DegenerateProjection if the sampled branch has norm < 1e-24.
CarrierOutcome measure_carrier(const Ket4& joint, const Basis2& basis, Rng& rng);

struct JointPovmOutcome {
  PovmOutcome outcome;
  /// Set for conclusive outcomes, whose POVM elements are rank one.
  std::optional<Ket2> residual_probe;
};

/// Applies the receiver to the carrier of a carrier (x) probe state.
JointPovmOutcome measure_povm_carrier(const Ket4& joint, const PovmSet& p, Rng& rng);

// Observables -----------------------------------------------------------------

/// Throws Errc::NotHermitian.
double expectation(const Matrix2& observable, const Ket2& s);

struct UncertaintyCheck {
  double lhs;  // <(dA)^2><(dB)^2>
  double rhs;  // |<[A,B]>|^2 / 4
  bool holds;  // lhs >= rhs - 1e-9
};

UncertaintyCheck uncertainty_check(const Matrix2& a, const Matrix2& b, const Ket2& s);

}  // namespace qkd
