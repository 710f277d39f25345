#include "qkd/quantum.hpp"

#include <numbers>
#include <string>

namespace qkd {

namespace {

constexpr double kZeroNormSquared = 1e-24;

template <std::size_t N>
double norm_squared(const std::array<Complex, N>& a) {
  double sum = 0.0;
  for (const auto& z : a) sum += std::norm(z);
  return sum;
}

double max_abs_deviation(const Matrix2& a, const Matrix2& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a.entries[i] - b.entries[i]));
  return worst;
}

}  // namespace

template <std::size_t N>
Ket<N> Ket<N>::normalized(const std::array<Complex, N>& amplitudes) {
  const double n2 = norm_squared(amplitudes);
  if (!(n2 >= kZeroNormSquared) || !std::isfinite(n2)) {
    throw Error(Errc::ZeroVector, "cannot normalize a vector of squared norm " + std::to_string(n2));
  }
  const double scale = 1.0 / std::sqrt(n2);
  std::array<Complex, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = amplitudes[i] * scale;
  return Ket<N>(out);
}

template class Ket<2>;
template class Ket<4>;

template <std::size_t N>
Matrix<N> Matrix<N>::identity() {
  Matrix m;
  for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
  return m;
}

template <std::size_t N>
Matrix<N> Matrix<N>::adjoint() const {
  Matrix m;
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) m(c, r) = std::conj((*this)(r, c));
  return m;
}

template <std::size_t N>
Complex Matrix<N>::trace() const {
  Complex t{};
  for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
  return t;
}

template struct Matrix<2>;
template struct Matrix<4>;

Ket2 make_qubit(Complex a0, Complex a1) { return Ket2::normalized({a0, a1}); }

Ket4 make_joint(const std::array<Complex, 4>& amplitudes) { return Ket4::normalized(amplitudes); }

Ket2 polarization(double angle) { return make_qubit(std::cos(angle), std::sin(angle)); }

Ket2 orthogonal_complement(const Ket2& k) { return make_qubit(-std::conj(k[1]), std::conj(k[0])); }

Matrix2 polarization_rotation(double angle) {
  Matrix2 m;
  m(0, 0) = std::cos(angle);
  m(0, 1) = -std::sin(angle);
  m(1, 0) = std::sin(angle);
  m(1, 1) = std::cos(angle);
  return m;
}

Ket4 tensor(const Ket2& carrier, const Ket2& probe) {
  return make_joint({carrier[0] * probe[0], carrier[0] * probe[1], carrier[1] * probe[0],
                     carrier[1] * probe[1]});
}

Matrix2 outer(const Ket2& u, const Ket2& v) {
  Matrix2 m;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) m(r, c) = u[r] * std::conj(v[c]);
  return m;
}

Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 m;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return m;
}

template <std::size_t N>
bool is_unitary(const Matrix<N>& u, double tol) {
  const Matrix<N> product = u.adjoint() * u;
  const Matrix<N> id = Matrix<N>::identity();
  for (std::size_t i = 0; i < N * N; ++i) {
    if (std::abs(product.entries[i] - id.entries[i]) > tol) return false;
  }
  return true;
}

template <std::size_t N>
bool is_hermitian(const Matrix<N>& m, double tol) {
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = r; c < N; ++c)
      if (std::abs(m(r, c) - std::conj(m(c, r))) > tol) return false;
  return true;
}

template bool is_unitary<2>(const Matrix2&, double);
template bool is_unitary<4>(const Matrix4&, double);
template bool is_hermitian<2>(const Matrix2&, double);
template bool is_hermitian<4>(const Matrix4&, double);

bool is_positive_semidefinite(const Matrix2& m, double tol) {
  if (!is_hermitian(m, tol)) return false;
  const double tr = std::real(m.trace());
  const double det = std::real(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
  return tr >= -tol && det >= -tol;
}

template <std::size_t N>
Ket<N> apply_unitary(const Matrix<N>& u, const Ket<N>& state) {
  if (!is_unitary(u)) throw Error(Errc::NotUnitary, "U^dagger U deviates from identity by more than 1e-10");
  std::array<Complex, N> out{};
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) out[r] += u(r, c) * state[c];
  return Ket<N>::normalized(out);
}

template Ket2 apply_unitary<2>(const Matrix2&, const Ket2&);
template Ket4 apply_unitary<4>(const Matrix4&, const Ket4&);

template <std::size_t N>
Complex quadratic_form(const Matrix<N>& m, const Ket<N>& s) {
  Complex sum{};
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) sum += std::conj(s[r]) * m(r, c) * s[c];
  return sum;
}

template Complex quadratic_form<2>(const Matrix2&, const Ket2&);
template Complex quadratic_form<4>(const Matrix4&, const Ket4&);

std::size_t sample_outcome(std::span<const double> probabilities, Rng& rng) {
  double total = 0.0;
  for (double p : probabilities) total += (p < kProbabilityFloor ? 0.0 : p);
  const double u = rng.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_allowed = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] < kProbabilityFloor) continue;
    cumulative += probabilities[i];
    last_allowed = i;
    if (u < cumulative) return i;
  }
  return last_allowed;
}

ProjectiveOutcome measure_projective(const Ket2& s, const Basis2& basis, Rng& rng) {
  if (std::abs(inner(basis[0], basis[1])) > kOperatorTolerance) {
    throw Error(Errc::BadBasis, "basis kets are not orthogonal");
  }
  const std::array<double, 2> p{std::norm(inner(basis[0], s)), std::norm(inner(basis[1], s))};
  const auto b = sample_outcome(p, rng);
  return {static_cast<Bit>(b), basis[b]};
}

PovmSet build_povm(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 4)) {
    throw Error(Errc::ThetaOutOfRange, "theta must lie in (0, pi/4), got " + std::to_string(theta));
  }
  const Ket2 plus = polarization(theta);
  const Ket2 minus = polarization(-theta);
  const Complex denom = 1.0 + inner(plus, minus);
  const Matrix2 id = Matrix2::identity();

  PovmSet p;
  p.theta = theta;
  p.a_plus = (1.0 / denom) * (id - outer(minus, minus));
  p.a_minus = (1.0 / denom) * (id - outer(plus, plus));
  p.a_q = id - p.a_plus - p.a_minus;
  return p;
}

bool povm_is_valid(const PovmSet& p, double tol) {
  const Matrix2 sum = p.a_plus + p.a_minus + p.a_q;
  if (max_abs_deviation(sum, Matrix2::identity()) > tol) return false;
  for (const Matrix2* m : {&p.a_plus, &p.a_minus, &p.a_q}) {
    if (!is_hermitian(*m, tol) || !is_positive_semidefinite(*m, tol)) return false;
  }
  return true;
}

std::array<double, 3> povm_probabilities(const Ket2& s, const PovmSet& p) {
  return {std::real(quadratic_form(p.a_minus, s)), std::real(quadratic_form(p.a_plus, s)),
          std::real(quadratic_form(p.a_q, s))};
}

std::array<double, 3> povm_probabilities(const Ket4& joint, const PovmSet& p) {
  const Matrix2 id = Matrix2::identity();
  return {std::real(quadratic_form(kron(p.a_minus, id), joint)),
          std::real(quadratic_form(kron(p.a_plus, id), joint)),
          std::real(quadratic_form(kron(p.a_q, id), joint))};
}

PovmOutcome measure_povm(const Ket2& s, const PovmSet& p, Rng& rng) {
  const auto probs = povm_probabilities(s, p);
  return static_cast<PovmOutcome>(sample_outcome(probs, rng));
}

std::optional<Ket2> project_carrier(const Ket4& joint, const Ket2& onto, double* weight) {
  // probe_j = sum_i conj(onto_i) * c[2i + j]
  const Complex p0 = std::conj(onto[0]) * joint[0] + std::conj(onto[1]) * joint[2];
  const Complex p1 = std::conj(onto[0]) * joint[1] + std::conj(onto[1]) * joint[3];
  const double w = std::norm(p0) + std::norm(p1);
  if (weight != nullptr) *weight = w;
  if (w < kZeroNormSquared) return std::nullopt;
  return make_qubit(p0, p1);
}

CarrierOutcome measure_carrier(const Ket4& joint, const Basis2& basis, Rng& rng) {
  if (std::abs(inner(basis[0], basis[1])) > kOperatorTolerance) {
    throw Error(Errc::BadBasis, "basis kets are not orthogonal");
  }
  std::array<double, 2> w{};
  std::array<std::optional<Ket2>, 2> residual{project_carrier(joint, basis[0], &w[0]),
                                              project_carrier(joint, basis[1], &w[1])};
  const auto b = sample_outcome(w, rng);
  if (!residual[b]) throw Error(Errc::DegenerateProjection, "sampled carrier branch has zero weight");
  return {static_cast<Bit>(b), *residual[b]};
}

JointPovmOutcome measure_povm_carrier(const Ket4& joint, const PovmSet& p, Rng& rng) {
  const auto probs = povm_probabilities(joint, p);
  const auto outcome = static_cast<PovmOutcome>(sample_outcome(probs, rng));
  if (outcome == PovmOutcome::Inconclusive) return {outcome, std::nullopt};
  // A_plus is proportional to the projector orthogonal to |theta->, A_minus to
  // the one orthogonal to |theta+>.
  const Ket2 direction = outcome == PovmOutcome::One ? orthogonal_complement(polarization(-p.theta))
                                                     : orthogonal_complement(polarization(p.theta));
  auto residual = project_carrier(joint, direction);
  if (!residual) throw Error(Errc::DegenerateProjection, "conclusive branch has zero weight");
  return {outcome, residual};
}

double expectation(const Matrix2& observable, const Ket2& s) {
  if (!is_hermitian(observable)) throw Error(Errc::NotHermitian, "observable is not Hermitian");
  return std::real(quadratic_form(observable, s));
}

UncertaintyCheck uncertainty_check(const Matrix2& a, const Matrix2& b, const Ket2& s) {
  const double mean_a = expectation(a, s);
  const double mean_b = expectation(b, s);
  const Matrix2 id = Matrix2::identity();
  const Matrix2 da = a - Complex(mean_a) * id;
  const Matrix2 db = b - Complex(mean_b) * id;
  const double var_a = std::real(quadratic_form(Matrix2(da * da), s));
  const double var_b = std::real(quadratic_form(Matrix2(db * db), s));
  const Complex commutator_mean = quadratic_form(Matrix2(a * b - b * a), s);

  UncertaintyCheck out;
  out.lhs = var_a * var_b;
  out.rhs = 0.25 * std::norm(commutator_mean);
  out.holds = out.lhs >= out.rhs - 1e-9;
  return out;
}

}  // namespace qkd
