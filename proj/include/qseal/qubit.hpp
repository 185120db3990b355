#pragma once

// Two-level state and channel arithmetic: density matrices, Bloch vectors,
// Kraus channels and Born-rule probabilities.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qseal {

using Complex = std::complex<double>;
using Mat2 = std::array<std::array<Complex, 2>, 2>;
using Vec3 = std::array<double, 3>;

inline constexpr double kStateTol = 1e-12;
inline constexpr double kCompletenessTol = 1e-10;
// Kraus operators below this Frobenius norm are dropped.
inline constexpr double kNegligibleOperatorNorm = 1e-14;
// Bloch radius below this is reported as the chaotic state.
inline constexpr double kZeroRadius = 1e-14;

//----------------------------------------------------------------------------
// 2x2 matrix helpers
//----------------------------------------------------------------------------

namespace mat {

inline Mat2 zero() { return Mat2{}; }

inline Mat2 identity() {
  Mat2 m{};
  m[0][0] = 1.0;
  m[1][1] = 1.0;
  return m;
}

inline Mat2 diag(Complex a, Complex d) {
  Mat2 m{};
  m[0][0] = a;
  m[1][1] = d;
  return m;
}

inline Mat2 mul(const Mat2 &a, const Mat2 &b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

inline Mat2 adjoint(const Mat2 &a) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      r[i][j] = std::conj(a[j][i]);
  return r;
}

inline Mat2 add(const Mat2 &a, const Mat2 &b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      r[i][j] = a[i][j] + b[i][j];
  return r;
}

inline Mat2 scale(const Mat2 &a, Complex s) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      r[i][j] = a[i][j] * s;
  return r;
}

inline Complex trace(const Mat2 &a) { return a[0][0] + a[1][1]; }

inline double frobenius(const Mat2 &a) {
  double s = 0.0;
  for (const auto &row : a)
    for (const auto &z : row)
      s += std::norm(z);
  return std::sqrt(s);
}

inline double max_abs_diff(const Mat2 &a, const Mat2 &b) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline bool all_finite(const Mat2 &a) {
  for (const auto &row : a)
    for (const auto &z : row)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        return false;
  return true;
}

}  // namespace mat

namespace pauli {
inline Mat2 sigma1() { return Mat2{{{0.0, 1.0}, {1.0, 0.0}}}; }
inline Mat2 sigma2() {
  return Mat2{{{0.0, Complex(0.0, -1.0)}, {Complex(0.0, 1.0), 0.0}}};
}
inline Mat2 sigma3() { return mat::diag(1.0, -1.0); }
}  // namespace pauli

//----------------------------------------------------------------------------
// Protocol vocabulary
//----------------------------------------------------------------------------

enum class PureState { Zero, One, Plus, Minus };
enum class Basis { Sigma1, Sigma3 };
enum class Outcome { Plus = +1, Minus = -1 };

inline constexpr std::array<PureState, 4> kPureStates = {
    PureState::Zero, PureState::One, PureState::Plus, PureState::Minus};

inline int value(Outcome m) { return static_cast<int>(m); }

inline Basis natural_basis(PureState s) {
  return (s == PureState::Zero || s == PureState::One) ? Basis::Sigma3
                                                       : Basis::Sigma1;
}

// Eigenvalue of the natural-basis observable for which `s` is an eigenstate.
inline Outcome eigen_outcome(PureState s) {
  return (s == PureState::Zero || s == PureState::Plus) ? Outcome::Plus
                                                        : Outcome::Minus;
}

inline const char *to_string(PureState s) {
  switch (s) {
    case PureState::Zero: return "0";
    case PureState::One: return "1";
    case PureState::Plus: return "+";
    case PureState::Minus: return "-";
  }
  return "?";
}

inline const char *to_string(Basis b) {
  return b == Basis::Sigma1 ? "sigma1" : "sigma3";
}

inline const char *to_string(Outcome m) {
  return m == Outcome::Plus ? "+1" : "-1";
}

//----------------------------------------------------------------------------
// DensityMatrix
//----------------------------------------------------------------------------

// Hermitian, trace one, positive semidefinite. Instances only come out of
// checked factories, so holding one means the invariants held at 1e-12.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(const Mat2 &m) {
    if (!mat::all_finite(m))
      throw std::invalid_argument("density matrix has non-finite entries");
    if (std::abs(m[0][1] - std::conj(m[1][0])) > kStateTol ||
        std::abs(m[0][0].imag()) > kStateTol ||
        std::abs(m[1][1].imag()) > kStateTol)
      throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(mat::trace(m) - 1.0) > kStateTol)
      throw std::invalid_argument("density matrix trace is not one");
    const auto [lo, hi] = eigenvalues_of(m);
    if (lo < -kStateTol)
      throw std::invalid_argument("density matrix is not positive semidefinite");
    return DensityMatrix(m);
  }

  static DensityMatrix chaotic() { return DensityMatrix(mat::scale(mat::identity(), 0.5)); }

  static DensityMatrix pure(PureState s) {
    const double h = 0.5;
    switch (s) {
      case PureState::Zero: return DensityMatrix(mat::diag(1.0, 0.0));
      case PureState::One: return DensityMatrix(mat::diag(0.0, 1.0));
      case PureState::Plus: return DensityMatrix(Mat2{{{h, h}, {h, h}}});
      case PureState::Minus: return DensityMatrix(Mat2{{{h, -h}, {-h, h}}});
    }
    throw std::invalid_argument("unknown pure state");
  }

  const Mat2 &matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_[i][j]; }

  // Ascending eigenvalues via the closed-form 2x2 formula.
  std::pair<double, double> eigenvalues() const { return eigenvalues_of(m_); }

  // Convex combination p*a + (1-p)*b.
  static DensityMatrix mix(double p, const DensityMatrix &a, const DensityMatrix &b) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("mixing weight outside [0,1]");
    return from_matrix(mat::add(mat::scale(a.m_, p), mat::scale(b.m_, 1.0 - p)));
  }

 private:
  explicit DensityMatrix(const Mat2 &m) : m_(m) {}

  static std::pair<double, double> eigenvalues_of(const Mat2 &m) {
    const double a = m[0][0].real();
    const double d = m[1][1].real();
    const double mean = 0.5 * (a + d);
    const double half_gap = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m[0][1]));
    return {mean - half_gap, mean + half_gap};
  }

  Mat2 m_;
};

//----------------------------------------------------------------------------
// Bloch parameterization rho = 1/2 (I + lambda v.sigma)
//----------------------------------------------------------------------------

struct BlochVector {
  double lambda = 0.0;
  Vec3 v{0.0, 0.0, 1.0};

  double component(int i) const { return lambda * v[static_cast<std::size_t>(i)]; }
};

inline void check_bloch(const BlochVector &b) {
  if (!(b.lambda >= 0.0 && b.lambda <= 1.0))
    throw std::invalid_argument("Bloch lambda outside [0,1]");
  if (!std::isfinite(b.v[0]) || !std::isfinite(b.v[1]) || !std::isfinite(b.v[2]))
    throw std::invalid_argument("Bloch direction is not finite");
  const double n2 = b.v[0] * b.v[0] + b.v[1] * b.v[1] + b.v[2] * b.v[2];
  if (b.lambda > 0.0 && std::abs(n2 - 1.0) > kStateTol)
    throw std::invalid_argument("Bloch direction is not a unit vector");
}

inline DensityMatrix density_from_bloch(const BlochVector &b) {
  check_bloch(b);
  const double r1 = b.component(0), r2 = b.component(1), r3 = b.component(2);
  const Mat2 m{{{0.5 * (1.0 + r3), Complex(0.5 * r1, -0.5 * r2)},
                {Complex(0.5 * r1, 0.5 * r2), 0.5 * (1.0 - r3)}}};
  return DensityMatrix::from_matrix(m);
}

inline BlochVector bloch_from_density(const DensityMatrix &rho) {
  // r_j = Tr(sigma_j rho)
  const Vec3 r{2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(),
               (rho(0, 0) - rho(1, 1)).real()};
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  BlochVector out;
  if (len < kZeroRadius)
    return out;
  out.lambda = std::min(len, 1.0);
  // + 0.0 turns -0 into 0
  out.v = {r[0] / len + 0.0, r[1] / len + 0.0, r[2] / len + 0.0};
  return out;
}

//----------------------------------------------------------------------------
// Born rule
//----------------------------------------------------------------------------

// Pr(m | rho, basis) = Tr(1/2 (I + m sigma) rho)
inline double measurement_prob(const DensityMatrix &rho, Basis basis, Outcome m) {
  const double expectation = basis == Basis::Sigma1
                                 ? 2.0 * rho(0, 1).real()
                                 : (rho(0, 0) - rho(1, 1)).real();
  const double p = 0.5 * (1.0 + value(m) * expectation);
  return std::clamp(p, 0.0, 1.0);
}

//----------------------------------------------------------------------------
// Kraus channels
//----------------------------------------------------------------------------

struct ChannelReport {
  double deviation = 0.0;  // ||sum E^dag E - I||_F
  bool complete = false;
  bool unital = false;
  // Image of the chaotic state; meaningful only when `complete`.
  BlochVector chaotic_image;
};

class KrausChannel {
 public:
  KrausChannel(std::vector<Mat2> operators, std::string label)
      : label_(std::move(label)) {
    if (operators.empty())
      throw std::invalid_argument("Kraus channel needs at least one operator");
    for (const auto &e : operators) {
      if (!mat::all_finite(e))
        throw std::invalid_argument("Kraus operator has non-finite entries");
      if (mat::frobenius(e) >= kNegligibleOperatorNorm)
        ops_.push_back(e);
    }
    if (ops_.empty())
      ops_.push_back(mat::zero());
  }

  const std::vector<Mat2> &operators() const { return ops_; }
  const std::string &label() const { return label_; }

  // Raw sum E rho E^dag with no validity checks.
  Mat2 act(const Mat2 &rho) const {
    Mat2 out{};
    for (const auto &e : ops_)
      out = mat::add(out, mat::mul(mat::mul(e, rho), mat::adjoint(e)));
    return out;
  }

  double completeness_deviation() const {
    Mat2 s{};
    for (const auto &e : ops_)
      s = mat::add(s, mat::mul(mat::adjoint(e), e));
    return mat::frobenius(mat::add(s, mat::scale(mat::identity(), -1.0)));
  }

 private:
  std::vector<Mat2> ops_;
  std::string label_;
};

inline ChannelReport validate_channel(const KrausChannel &ch) {
  ChannelReport r;
  r.deviation = ch.completeness_deviation();
  r.complete = r.deviation <= kCompletenessTol;
  if (!r.complete)
    return r;
  const Mat2 image = ch.act(DensityMatrix::chaotic().matrix());
  try {
    r.chaotic_image = bloch_from_density(DensityMatrix::from_matrix(image));
  } catch (const std::invalid_argument &) {
    // Possible only at the edge of the completeness tolerance.
    r.complete = false;
    return r;
  }
  r.unital = r.chaotic_image.lambda < 1e-10;
  return r;
}

namespace detail {
inline std::string labelled(const char *name, double parameter) {
  std::ostringstream os;
  os << name << '(' << parameter << ')';
  return os.str();
}

inline Mat2 hermitian_part(const Mat2 &m) {
  return mat::scale(mat::add(m, mat::adjoint(m)), 0.5);
}
}  // namespace detail

// E(rho) = sum_i E_i rho E_i^dag. The output is Hermitian-symmetrized and
// trace-normalized; for a channel that passes validation the rescale is at
// most of order the completeness tolerance.
inline DensityMatrix apply_channel(const KrausChannel &ch, const DensityMatrix &rho) {
  const double dev = ch.completeness_deviation();
  if (!(dev <= kCompletenessTol))
    throw std::invalid_argument("channel '" + ch.label() +
                                "' violates Kraus completeness");
  Mat2 out = detail::hermitian_part(ch.act(rho.matrix()));
  const double tr = mat::trace(out).real();
  out = mat::scale(out, 1.0 / tr);
  return DensityMatrix::from_matrix(out);
}

//----------------------------------------------------------------------------
// Builtin channels
//----------------------------------------------------------------------------

inline KrausChannel identity_channel() { return KrausChannel({mat::identity()}, "identity"); }

// Amplitude-damping form of the sealed-message example attack:
// E0 = diag(1, sqrt(1-x)), E1 = sqrt(x) |0><1|.
inline KrausChannel seal_example_channel(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("seal channel parameter x outside [0,1]");
  Mat2 e1{};
  e1[0][1] = std::sqrt(x);
  return KrausChannel({mat::diag(1.0, std::sqrt(1.0 - x)), e1},
                      detail::labelled("seal", x));
}

// rho -> (1-p) rho + (p/2) I, via the Pauli-twirl Kraus set.
inline KrausChannel depolarizing_channel(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("depolarizing parameter p outside [0,1]");
  const double keep = std::sqrt(1.0 - 0.75 * p);
  const double flip = std::sqrt(0.25 * p);
  return KrausChannel({mat::scale(mat::identity(), keep), mat::scale(pauli::sigma1(), flip),
                       mat::scale(pauli::sigma2(), flip), mat::scale(pauli::sigma3(), flip)},
                      detail::labelled("depolarizing", p));
}

// Full dephasing in the sigma3 basis.
inline KrausChannel dephasing_channel() {
  return KrausChannel({mat::diag(1.0, 0.0), mat::diag(0.0, 1.0)}, "dephasing");
}

}  // namespace qseal
