#pragma once

// Shot-level simulation of the sealed-message protocol: Bob prepares one of
// four states, the eavesdropper's channel acts, Alice measures in a random
// basis and announces either a coded bit or her raw result.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "qseal/qubit.hpp"

namespace qseal {

//----------------------------------------------------------------------------
// Random streams
//----------------------------------------------------------------------------

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// SplitMix64. Small enough to give every shot its own substream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

enum class StreamDomain : std::uint64_t { Shot = 1, Trial = 2 };

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index,
                                 StreamDomain domain) {
  const auto tag = static_cast<std::uint64_t>(domain);
  return mix64(mix64(parent ^ (tag * 0xD1B54A32D192ED03ULL)) +
               (index + 1) * 0x9E3779B97F4A7C15ULL);
}

inline std::uint64_t trial_seed(std::uint64_t root, std::uint64_t trial) {
  return derive_seed(root, trial, StreamDomain::Trial);
}

// Uniform double in [0,1) from the top 53 bits; identical on every platform.
template <typename Rng>
double uniform01(Rng &rng) {
  static_assert(std::is_same_v<typename Rng::result_type, std::uint64_t>);
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

//----------------------------------------------------------------------------
// Records
//----------------------------------------------------------------------------

struct ProtocolParams {
  int n_shots = 119;
  double p_announce = 0.05;
  int message_bit = 0;
  std::uint64_t seed = 0;
};

inline void check_params(const ProtocolParams &p) {
  if (p.n_shots < 1)
    throw std::invalid_argument("n_shots must be at least 1");
  if (!(p.p_announce >= 0.0 && p.p_announce <= 1.0))
    throw std::invalid_argument("p_announce outside [0,1]");
  if (p.message_bit != 0 && p.message_bit != 1)
    throw std::invalid_argument("message bit must be 0 or 1");
}

struct BitAnnouncement {
  int c = 0;
  bool operator==(const BitAnnouncement &) const = default;
};

struct ResultAnnouncement {
  Outcome m = Outcome::Plus;
  bool operator==(const ResultAnnouncement &) const = default;
};

using Announcement = std::variant<BitAnnouncement, ResultAnnouncement>;

struct ShotRecord {
  PureState prep = PureState::Zero;
  Basis basis = Basis::Sigma3;
  Outcome result = Outcome::Plus;
  Announcement announcement;

  bool matched() const { return natural_basis(prep) == basis; }
  bool operator==(const ShotRecord &) const = default;
};

// What everyone hears: the basis and the announcement.
struct PublicShot {
  Basis basis = Basis::Sigma3;
  Announcement announcement;
  bool operator==(const PublicShot &) const = default;
};

using PublicTranscript = std::vector<PublicShot>;

struct RunOutcome {
  std::optional<int> decoded_bit;
  int matched_bit_announcements = 0;
  int matched_result_announcements = 0;
  int mismatch_count = 0;
};

struct MismatchTally {
  int mismatches = 0;
  int matched_result_announcements = 0;
};

struct ProtocolRun {
  std::vector<ShotRecord> shots;
  PublicTranscript transcript;
  RunOutcome outcome;
};

// Index into the bit-announcement alphabet
// [(sigma1,c=0), (sigma1,c=1), (sigma3,c=0), (sigma3,c=1)].
inline int announcement_index(Basis basis, int c) {
  return (basis == Basis::Sigma3 ? 2 : 0) + c;
}

//----------------------------------------------------------------------------
// Shots
//----------------------------------------------------------------------------

// Born probabilities Pr(m=+1) for every (prep, basis) pair under one channel.
class ShotModel {
 public:
  explicit ShotModel(const KrausChannel &eve) {
    for (std::size_t s = 0; s < kPureStates.size(); ++s) {
      const DensityMatrix out = apply_channel(eve, DensityMatrix::pure(kPureStates[s]));
      p_plus_[s][0] = measurement_prob(out, Basis::Sigma1, Outcome::Plus);
      p_plus_[s][1] = measurement_prob(out, Basis::Sigma3, Outcome::Plus);
    }
  }

  double p_plus(PureState s, Basis b) const {
    return p_plus_[static_cast<std::size_t>(s)][b == Basis::Sigma3 ? 1 : 0];
  }

 private:
  std::array<std::array<double, 2>, 4> p_plus_{};
};

template <typename Rng>
ShotRecord run_shot(Rng &rng, int message_bit, double p_announce, const ShotModel &model) {
  ShotRecord shot;
  shot.prep = kPureStates[static_cast<std::size_t>(rng() >> 62)];
  shot.basis = (rng() >> 63) ? Basis::Sigma3 : Basis::Sigma1;
  shot.result = uniform01(rng) < model.p_plus(shot.prep, shot.basis) ? Outcome::Plus
                                                                    : Outcome::Minus;
  if (uniform01(rng) < p_announce)
    shot.announcement = BitAnnouncement{message_bit ^ (shot.result == Outcome::Minus ? 1 : 0)};
  else
    shot.announcement = ResultAnnouncement{shot.result};
  return shot;
}

template <typename Rng>
ShotRecord run_shot(Rng &rng, int message_bit, double p_announce, const KrausChannel &eve) {
  return run_shot(rng, message_bit, p_announce, ShotModel(eve));
}

//----------------------------------------------------------------------------
// Bob's side
//----------------------------------------------------------------------------

// Controlled bit flip on every matched-basis bit announcement, then majority.
// Empty when there are no votes or the vote ties.
inline std::optional<int> bob_decode(std::span<const ShotRecord> shots) {
  int votes[2] = {0, 0};
  for (const auto &s : shots) {
    const auto *bit = std::get_if<BitAnnouncement>(&s.announcement);
    if (!bit || !s.matched())
      continue;
    const int flip = eigen_outcome(s.prep) == Outcome::Minus ? 1 : 0;
    ++votes[bit->c ^ flip];
  }
  if (votes[0] == votes[1])
    return std::nullopt;
  return votes[1] > votes[0] ? 1 : 0;
}

// Matched-basis result announcements whose result contradicts the preparation.
inline MismatchTally tally_mismatches(std::span<const ShotRecord> shots) {
  MismatchTally t;
  for (const auto &s : shots) {
    const auto *res = std::get_if<ResultAnnouncement>(&s.announcement);
    if (!res || !s.matched())
      continue;
    ++t.matched_result_announcements;
    if (res->m != eigen_outcome(s.prep))
      ++t.mismatches;
  }
  return t;
}

inline PublicTranscript public_view(std::span<const ShotRecord> shots) {
  PublicTranscript t;
  t.reserve(shots.size());
  for (const auto &s : shots)
    t.push_back({s.basis, s.announcement});
  return t;
}

inline ProtocolRun run_protocol(const ProtocolParams &params, const ShotModel &model) {
  check_params(params);
  ProtocolRun run;
  run.shots.reserve(static_cast<std::size_t>(params.n_shots));
  for (int i = 0; i < params.n_shots; ++i) {
    SplitMix64 rng(derive_seed(params.seed, static_cast<std::uint64_t>(i), StreamDomain::Shot));
    run.shots.push_back(run_shot(rng, params.message_bit, params.p_announce, model));
  }
  run.transcript = public_view(run.shots);

  const MismatchTally tally = tally_mismatches(run.shots);
  run.outcome.decoded_bit = bob_decode(run.shots);
  run.outcome.mismatch_count = tally.mismatches;
  run.outcome.matched_result_announcements = tally.matched_result_announcements;
  for (const auto &s : run.shots)
    if (s.matched() && std::holds_alternative<BitAnnouncement>(s.announcement))
      ++run.outcome.matched_bit_announcements;
  return run;
}

inline ProtocolRun run_protocol(const ProtocolParams &params, const KrausChannel &eve) {
  return run_protocol(params, ShotModel(eve));
}

//----------------------------------------------------------------------------
// Monte Carlo
//----------------------------------------------------------------------------

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  long long count = 0;  // numerator
  long long total = 0;  // denominator
};

inline Estimate binomial_estimate(long long count, long long total) {
  Estimate e;
  e.count = count;
  e.total = total;
  if (total > 0) {
    e.value = static_cast<double>(count) / static_cast<double>(total);
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(total));
  }
  return e;
}

struct SimStats {
  long long trials = 0;
  long long shots = 0;
  // Frequencies over the bit-announcement alphabet, per bit announcement.
  std::array<Estimate, 4> announcement_freq{};
  Estimate mismatch_rate;       // per matched-basis result announcement
  Estimate matched_fraction;    // per shot
  Estimate decode_success;      // per trial
  Estimate decode_correct;      // per successful decode
};

namespace detail {

struct TrialCounts {
  std::array<long long, 4> announcements{};
  long long bit_announcements = 0;
  long long matched_shots = 0;
  long long matched_results = 0;
  long long mismatches = 0;
  long long decoded = 0;
  long long decoded_correct = 0;

  TrialCounts &operator+=(const TrialCounts &o) {
    for (std::size_t i = 0; i < 4; ++i)
      announcements[i] += o.announcements[i];
    bit_announcements += o.bit_announcements;
    matched_shots += o.matched_shots;
    matched_results += o.matched_results;
    mismatches += o.mismatches;
    decoded += o.decoded;
    decoded_correct += o.decoded_correct;
    return *this;
  }
};

inline TrialCounts count_trial(const ProtocolParams &params, const ShotModel &model) {
  const ProtocolRun run = run_protocol(params, model);
  TrialCounts c;
  for (const auto &s : run.shots) {
    if (s.matched())
      ++c.matched_shots;
    if (const auto *bit = std::get_if<BitAnnouncement>(&s.announcement)) {
      ++c.announcements[static_cast<std::size_t>(announcement_index(s.basis, bit->c))];
      ++c.bit_announcements;
    }
  }
  c.matched_results = run.outcome.matched_result_announcements;
  c.mismatches = run.outcome.mismatch_count;
  if (run.outcome.decoded_bit) {
    ++c.decoded;
    if (*run.outcome.decoded_bit == params.message_bit)
      ++c.decoded_correct;
  }
  return c;
}

}  // namespace detail

// Trial t runs run_protocol with seed trial_seed(params.seed, t). Results do
// not depend on `threads`: counts are integers and summed in trial order.
inline SimStats monte_carlo(const ProtocolParams &params, const KrausChannel &eve,
                            long long trials, unsigned threads = 1) {
  check_params(params);
  if (trials < 1)
    throw std::invalid_argument("trials must be at least 1");
  const ShotModel model(eve);

  threads = std::max(1u, threads);
  const auto n_workers = static_cast<long long>(threads) < trials ? static_cast<long long>(threads)
                                                                  : trials;
  std::vector<detail::TrialCounts> partial(static_cast<std::size_t>(n_workers));
  auto work = [&](long long worker) {
    detail::TrialCounts acc;
    for (long long t = worker; t < trials; t += n_workers) {
      ProtocolParams p = params;
      p.seed = trial_seed(params.seed, static_cast<std::uint64_t>(t));
      acc += detail::count_trial(p, model);
    }
    partial[static_cast<std::size_t>(worker)] = acc;
  };
  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (long long w = 0; w < n_workers; ++w)
      pool.emplace_back(work, w);
  }

  detail::TrialCounts total;
  for (const auto &c : partial)
    total += c;

  SimStats s;
  s.trials = trials;
  s.shots = trials * params.n_shots;
  for (std::size_t i = 0; i < 4; ++i)
    s.announcement_freq[i] = binomial_estimate(total.announcements[i], total.bit_announcements);
  s.mismatch_rate = binomial_estimate(total.mismatches, total.matched_results);
  s.matched_fraction = binomial_estimate(total.matched_shots, s.shots);
  s.decode_success = binomial_estimate(total.decoded, trials);
  s.decode_correct = binomial_estimate(total.decoded_correct, total.decoded);
  return s;
}

//----------------------------------------------------------------------------
// Transcript export
//----------------------------------------------------------------------------

namespace detail {
inline void write_announcement(std::ostream &os, const Announcement &a) {
  if (const auto *bit = std::get_if<BitAnnouncement>(&a))
    os << "bit," << bit->c;
  else
    os << "result," << to_string(std::get<ResultAnnouncement>(a).m);
}
}  // namespace detail

// shot_index,prep,basis,result,announcement_kind,announced_value
inline void write_private_transcript(std::ostream &os, std::span<const ShotRecord> shots) {
  os << "shot_index,prep,basis,result,announcement_kind,announced_value\n";
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const auto &s = shots[i];
    os << i << ',' << to_string(s.prep) << ',' << to_string(s.basis) << ','
       << to_string(s.result) << ',';
    detail::write_announcement(os, s.announcement);
    os << '\n';
  }
}

// shot_index,basis,announcement_kind,announced_value
inline void write_public_transcript(std::ostream &os, const PublicTranscript &transcript) {
  os << "shot_index,basis,announcement_kind,announced_value\n";
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    os << i << ',' << to_string(transcript[i].basis) << ',';
    detail::write_announcement(os, transcript[i].announcement);
    os << '\n';
  }
}

}  // namespace qseal
