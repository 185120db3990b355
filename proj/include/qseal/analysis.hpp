#pragma once

// Closed-form eavesdropper information gain and disturbance.
//
// Information gain is the Shannon mutual information, in bits, between the
// message bit B (uniform prior) and the string C of bit announcements. For a
// fixed number k of bit announcements each one is drawn i.i.d. from a
// four-letter alphabet whose law depends on B; the number of announcements
// is Binomial(N, p_a). Strings are grouped into count classes with
// multinomial multiplicities and evaluated in log space.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qseal/qubit.hpp"

namespace qseal {

inline constexpr double kDefaultTailTol = 1e-12;
// Probabilities below this are zero before any log is taken.
inline constexpr double kProbFloor = 1e-300;

// Alphabet order: [(sigma1,c=0), (sigma1,c=1), (sigma3,c=0), (sigma3,c=1)].
struct AnnouncementDistribution {
  std::array<std::array<double, 4>, 2> probs_given_b{};

  // b=1 is b=0 with c flipped inside each basis.
  bool is_symmetric(double tol = kStateTol) const {
    const auto &p0 = probs_given_b[0];
    const auto &p1 = probs_given_b[1];
    return std::abs(p0[0] - p1[1]) <= tol && std::abs(p0[1] - p1[0]) <= tol &&
           std::abs(p0[2] - p1[3]) <= tol && std::abs(p0[3] - p1[2]) <= tol;
  }
};

struct MIResult {
  double mi_bits = 0.0;
  int k_terms_used = 0;
  double truncation_mass = 0.0;
};

struct MismatchProbability {
  double per_shot = 0.0;
  double matched_basis_conditional = 0.0;
};

inline void check_distribution(const AnnouncementDistribution &d) {
  for (const auto &row : d.probs_given_b) {
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("announcement probability outside [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStateTol)
      throw std::invalid_argument("announcement probabilities do not sum to one");
  }
}

// Pr(sigma_i, c=b | b) = 1/4 (1 + lambda v_i), Pr(sigma_i, c!=b | b) = 1/4 (1 - lambda v_i),
// where lambda v is the Bloch vector of E(I/2).
inline AnnouncementDistribution bit_announcement_probs(const KrausChannel &eve) {
  const BlochVector image = bloch_from_density(apply_channel(eve, DensityMatrix::chaotic()));
  const double r1 = image.component(0);
  const double r3 = image.component(2);
  AnnouncementDistribution d;
  d.probs_given_b[0] = {0.25 * (1 + r1), 0.25 * (1 - r1), 0.25 * (1 + r3), 0.25 * (1 - r3)};
  d.probs_given_b[1] = {0.25 * (1 - r1), 0.25 * (1 + r1), 0.25 * (1 - r3), 0.25 * (1 + r3)};
  return d;
}

namespace detail {

// log(n!) for n = 0..max.
class LogFactorials {
 public:
  explicit LogFactorials(int max) : table_(static_cast<std::size_t>(max) + 1, 0.0) {
    for (std::size_t n = 2; n < table_.size(); ++n)
      table_[n] = table_[n - 1] + std::log(static_cast<double>(n));
  }
  double operator()(int n) const { return table_[static_cast<std::size_t>(n)]; }

 private:
  std::vector<double> table_;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double safe_log(double p) { return p < kProbFloor ? kNegInf : std::log(p); }

// n * log(p) with 0 * log(0) = 0.
inline double weighted_log(int n, double log_p) { return n == 0 ? 0.0 : n * log_p; }

// Contribution (in nats) of one count class to I = sum_c 1/2 sum_b P(c|b) log(P(c|b)/P(c)),
// given log multiplicity and the two per-string log probabilities.
inline double class_term(double log_mult, double log_p0, double log_p1) {
  if (log_p0 == kNegInf && log_p1 == kNegInf)
    return 0.0;
  const double hi = std::max(log_p0, log_p1);
  const double lo = std::min(log_p0, log_p1);
  // log of the mixture 1/2 (P0 + P1)
  const double log_mix = hi + std::log(0.5 * (1.0 + std::exp(lo - hi)));
  double term = 0.0;
  for (double lp : {log_p0, log_p1})
    if (lp != kNegInf)
      term += 0.5 * std::exp(log_mult + lp) * (lp - log_mix);
  return term;
}

struct BinomialSupport {
  std::vector<std::pair<int, double>> terms;  // (k, p_k), ascending k
  double truncation_mass = 0.0;
};

// Binomial(N, p) weights collected outward from the mode, always taking the
// heavier neighbour, until the omitted mass drops below tail_tol.
inline BinomialSupport binomial_support(int n, double p, double tail_tol) {
  if (n < 0)
    throw std::invalid_argument("n_shots must be non-negative");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("p_announce outside [0,1]");
  if (!(tail_tol > 0.0 && tail_tol <= 1e-6))
    throw std::invalid_argument("tail_tol must lie in (0, 1e-6]");

  BinomialSupport out;
  if (p == 0.0 || p == 1.0) {
    out.terms.emplace_back(p == 0.0 ? 0 : n, 1.0);
    return out;
  }
  const LogFactorials lf(n);
  const double lp = std::log(p), lq = std::log1p(-p);
  auto weight = [&](int k) {
    return std::exp(lf(n) - lf(k) - lf(n - k) + k * lp + (n - k) * lq);
  };

  const int mode = std::min(n, static_cast<int>(std::floor((n + 1) * p)));
  out.terms.emplace_back(mode, weight(mode));
  double taken = out.terms.back().second;
  int lo = mode - 1, hi = mode + 1;
  while (1.0 - taken >= tail_tol && (lo >= 0 || hi <= n)) {
    const double w_lo = lo >= 0 ? weight(lo) : -1.0;
    const double w_hi = hi <= n ? weight(hi) : -1.0;
    if (w_lo >= w_hi) {
      out.terms.emplace_back(lo--, w_lo);
      taken += w_lo;
    } else {
      out.terms.emplace_back(hi++, w_hi);
      taken += w_hi;
    }
  }
  out.truncation_mass = (lo < 0 && hi > n) ? 0.0 : std::max(0.0, 1.0 - taken);
  std::sort(out.terms.begin(), out.terms.end());
  return out;
}

template <typename PerK>
MIResult sum_over_lengths(int n_shots, double p_announce, double tail_tol, PerK &&mi_k) {
  const BinomialSupport support = binomial_support(n_shots, p_announce, tail_tol);
  MIResult r;
  for (const auto &[k, pk] : support.terms)
    r.mi_bits += pk * mi_k(k);
  r.k_terms_used = static_cast<int>(support.terms.size());
  r.truncation_mass = support.truncation_mass;
  return r;
}

inline double mutual_information_k(const AnnouncementDistribution &dist, int k,
                                   const LogFactorials &lf) {
  std::array<std::array<double, 4>, 2> lp{};
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t j = 0; j < 4; ++j)
      lp[b][j] = safe_log(dist.probs_given_b[b][j]);

  double nats = 0.0;
  for (int n0 = 0; n0 <= k; ++n0)
    for (int n1 = 0; n0 + n1 <= k; ++n1)
      for (int n2 = 0; n0 + n1 + n2 <= k; ++n2) {
        const int n3 = k - n0 - n1 - n2;
        const double log_mult = lf(k) - lf(n0) - lf(n1) - lf(n2) - lf(n3);
        double log_p[2];
        for (std::size_t b = 0; b < 2; ++b)
          log_p[b] = weighted_log(n0, lp[b][0]) + weighted_log(n1, lp[b][1]) +
                     weighted_log(n2, lp[b][2]) + weighted_log(n3, lp[b][3]);
        nats += class_term(log_mult, log_p[0], log_p[1]);
      }
  return nats / std::numbers::ln2;
}

}  // namespace detail

// I(C^(k) : B) in bits for strings of exactly k bit announcements.
inline double mutual_information_k(const AnnouncementDistribution &dist, int k) {
  if (k < 0)
    throw std::invalid_argument("k must be non-negative");
  check_distribution(dist);
  return detail::mutual_information_k(dist, k, detail::LogFactorials(k));
}

// I(C : B) = sum_k p_k I(C^(k) : B) with p_k ~ Binomial(n_shots, p_announce).
inline MIResult expected_mutual_information(const AnnouncementDistribution &dist, int n_shots,
                                            double p_announce,
                                            double tail_tol = kDefaultTailTol) {
  check_distribution(dist);
  const detail::LogFactorials lf(std::max(n_shots, 0));
  return detail::sum_over_lengths(n_shots, p_announce, tail_tol, [&](int k) {
    return detail::mutual_information_k(dist, k, lf);
  });
}

namespace detail {

// Seal-family I(C^(k):B). The two sigma1 letters have probability 1/4 under
// both messages, so they are merged into one letter of weight 1/2: a class
// (d3, d4, m = k-d3-d4) has multiplicity k!/(d3! d4! m!) * 2^m.
inline double seal_mi_k(double x, int k, const LogFactorials &lf) {
  const double log_quarter = std::log(0.25);
  const double log_up = safe_log(1.0 + x);
  const double log_down = safe_log(1.0 - x);
  double nats = 0.0;
  for (int d3 = 0; d3 <= k; ++d3)
    for (int d4 = 0; d3 + d4 <= k; ++d4) {
      const int m = k - d3 - d4;
      const double log_mult = lf(k) - lf(d3) - lf(d4) - lf(m) + m * std::numbers::ln2;
      const double base = k * log_quarter;
      const double log_p = base + weighted_log(d3, log_up) + weighted_log(d4, log_down);
      const double log_q = base + weighted_log(d3, log_down) + weighted_log(d4, log_up);
      nats += class_term(log_mult, log_p, log_q);
    }
  return nats / std::numbers::ln2;
}

}  // namespace detail

// Class-probability mass sum_{d3,d4} mult * p for the seal family; equals one.
inline double seal_class_mass(double x, int k) {
  const detail::LogFactorials lf(k);
  double mass = 0.0;
  for (int d3 = 0; d3 <= k; ++d3)
    for (int d4 = 0; d3 + d4 <= k; ++d4) {
      const int m = k - d3 - d4;
      const double log_p = k * std::log(0.25) + detail::weighted_log(d3, detail::safe_log(1.0 + x)) +
                           detail::weighted_log(d4, detail::safe_log(1.0 - x));
      if (log_p == detail::kNegInf)
        continue;
      mass += std::exp(lf(k) - lf(d3) - lf(d4) - lf(m) + m * std::numbers::ln2 + log_p);
    }
  return mass;
}

// Expected information gain for the amplitude-damping attack of strength x.
inline MIResult mi_seal_example(double x, int n_shots, double p_announce,
                                double tail_tol = kDefaultTailTol) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("seal channel parameter x outside [0,1]");
  const detail::LogFactorials lf(std::max(n_shots, 0));
  return detail::sum_over_lengths(n_shots, p_announce, tail_tol,
                                  [&](int k) { return detail::seal_mi_k(x, k, lf); });
}

// Probability of a mismatch event: per shot, and conditioned on matched bases.
inline MismatchProbability mismatch_probability(const KrausChannel &eve) {
  auto prob = [&](PureState s, Basis basis, Outcome m) {
    return measurement_prob(apply_channel(eve, DensityMatrix::pure(s)), basis, m);
  };
  const double sum = prob(PureState::Plus, Basis::Sigma1, Outcome::Minus) +
                     prob(PureState::Minus, Basis::Sigma1, Outcome::Plus) +
                     prob(PureState::Zero, Basis::Sigma3, Outcome::Minus) +
                     prob(PureState::One, Basis::Sigma3, Outcome::Plus);
  return {sum / 8.0, sum / 4.0};
}

// Probability that an undisturbed run yields at least one matched-basis bit
// announcement: 1 - (1 - p_a/2)^N.
inline double decode_success_probability(int n_shots, double p_announce) {
  if (n_shots < 0)
    throw std::invalid_argument("n_shots must be non-negative");
  if (!(p_announce >= 0.0 && p_announce <= 1.0))
    throw std::invalid_argument("p_announce outside [0,1]");
  return -std::expm1(n_shots * std::log1p(-0.5 * p_announce));
}

}  // namespace qseal
