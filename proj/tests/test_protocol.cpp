#include "qseal/protocol.hpp"

#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "qseal/analysis.hpp"

using namespace qseal;

namespace {

ShotRecord make_shot(PureState prep, Basis basis, Outcome m, Announcement a) {
  ShotRecord s;
  s.prep = prep;
  s.basis = basis;
  s.result = m;
  s.announcement = a;
  return s;
}

// |observed - expected| <= 5 standard errors of a Bernoulli(expected) mean.
void expect_within_5se(long long hits, long long total, double expected) {
  ASSERT_GT(total, 0);
  const double freq = static_cast<double>(hits) / static_cast<double>(total);
  const double se = std::sqrt(expected * (1 - expected) / static_cast<double>(total));
  EXPECT_LE(std::abs(freq - expected), 5 * se + 1e-15)
      << "freq " << freq << " expected " << expected << " n " << total;
}

void expect_estimate_near(const Estimate &e, double expected) {
  EXPECT_LE(std::abs(e.value - expected), 5 * e.std_error + 1e-15)
      << "value " << e.value << " expected " << expected << " se " << e.std_error;
}

}  // namespace

TEST(Rng, derived_streams_are_distinct_and_reproducible) {
  EXPECT_EQ(derive_seed(7, 3, StreamDomain::Shot), derive_seed(7, 3, StreamDomain::Shot));
  EXPECT_NE(derive_seed(7, 3, StreamDomain::Shot), derive_seed(7, 4, StreamDomain::Shot));
  EXPECT_NE(derive_seed(7, 3, StreamDomain::Shot), derive_seed(7, 3, StreamDomain::Trial));
  EXPECT_NE(derive_seed(7, 3, StreamDomain::Shot), derive_seed(8, 3, StreamDomain::Shot));
  SplitMix64 a(1), b(1);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(a(), b());
  SplitMix64 r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(r);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(RunShot, identity_channel_outcomes) {
  const ShotModel model(identity_channel());
  SplitMix64 rng(123);
  long long zero_s3 = 0, plus_s3 = 0, plus_s3_up = 0;
  for (int i = 0; i < 200000; ++i) {
    const ShotRecord s = run_shot(rng, 0, 0.5, model);
    if (s.prep == PureState::Zero && s.basis == Basis::Sigma3) {
      ++zero_s3;
      EXPECT_EQ(s.result, Outcome::Plus);
    }
    if (s.prep == PureState::Plus && s.basis == Basis::Sigma3) {
      ++plus_s3;
      plus_s3_up += s.result == Outcome::Plus;
    }
  }
  EXPECT_GT(zero_s3, 0);
  expect_within_5se(plus_s3_up, plus_s3, 0.5);
}

TEST(RunShot, seal_channel_flips_one_with_probability_x) {
  for (double x : {0.2, 0.7}) {
    const ShotModel model(seal_example_channel(x));
    SplitMix64 rng(77);
    long long n = 0, up = 0;
    for (int i = 0; i < 200000; ++i) {
      const ShotRecord s = run_shot(rng, 1, 0.1, model);
      if (s.prep == PureState::One && s.basis == Basis::Sigma3) {
        ++n;
        up += s.result == Outcome::Plus;
      }
    }
    expect_within_5se(up, n, x);
  }
}

TEST(RunShot, preparation_basis_and_announcement_rates) {
  const ShotModel model(depolarizing_channel(0.4));
  SplitMix64 rng(9);
  const long long total = 400000;
  long long per_state[4] = {}, sigma3 = 0, bits = 0;
  for (long long i = 0; i < total; ++i) {
    const int bit = static_cast<int>(i & 1);
    const ShotRecord s = run_shot(rng, bit, 0.3, model);
    ++per_state[static_cast<int>(s.prep)];
    sigma3 += s.basis == Basis::Sigma3;
    if (const auto *a = std::get_if<BitAnnouncement>(&s.announcement)) {
      ++bits;
      EXPECT_EQ(a->c ^ bit, s.result == Outcome::Minus ? 1 : 0);
    } else {
      EXPECT_EQ(std::get<ResultAnnouncement>(s.announcement).m, s.result);
    }
  }
  for (long long c : per_state)
    expect_within_5se(c, total, 0.25);
  expect_within_5se(sigma3, total, 0.5);
  expect_within_5se(bits, total, 0.3);
}

TEST(RunShot, announcement_probability_endpoints) {
  const ShotModel model(identity_channel());
  SplitMix64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(std::holds_alternative<ResultAnnouncement>(run_shot(rng, 0, 0.0, model).announcement));
    EXPECT_TRUE(std::holds_alternative<BitAnnouncement>(run_shot(rng, 0, 1.0, model).announcement));
  }
}

TEST(BobDecode, single_shot_examples) {
  const std::vector<ShotRecord> plus = {
      make_shot(PureState::Plus, Basis::Sigma1, Outcome::Plus, BitAnnouncement{1})};
  EXPECT_EQ(bob_decode(plus), 1);

  const std::vector<ShotRecord> one = {
      make_shot(PureState::One, Basis::Sigma3, Outcome::Minus, BitAnnouncement{0})};
  EXPECT_EQ(bob_decode(one), 1);
}

TEST(BobDecode, tie_and_empty_abstain) {
  const std::vector<ShotRecord> tie = {
      make_shot(PureState::Zero, Basis::Sigma3, Outcome::Plus, BitAnnouncement{0}),
      make_shot(PureState::Zero, Basis::Sigma3, Outcome::Plus, BitAnnouncement{1})};
  EXPECT_EQ(bob_decode(tie), std::nullopt);
  EXPECT_EQ(bob_decode(std::vector<ShotRecord>{}), std::nullopt);

  // Unmatched bit announcements and result announcements carry no vote.
  const std::vector<ShotRecord> no_votes = {
      make_shot(PureState::Zero, Basis::Sigma1, Outcome::Plus, BitAnnouncement{1}),
      make_shot(PureState::Plus, Basis::Sigma1, Outcome::Plus, ResultAnnouncement{Outcome::Plus})};
  EXPECT_EQ(bob_decode(no_votes), std::nullopt);
}

TEST(BobDecode, majority_vote) {
  const std::vector<ShotRecord> shots = {
      make_shot(PureState::Zero, Basis::Sigma3, Outcome::Plus, BitAnnouncement{1}),
      make_shot(PureState::Minus, Basis::Sigma1, Outcome::Minus, BitAnnouncement{0}),
      make_shot(PureState::Plus, Basis::Sigma1, Outcome::Minus, BitAnnouncement{1})};
  EXPECT_EQ(bob_decode(shots), 1);
  const std::vector<ShotRecord> mixed = {
      make_shot(PureState::Zero, Basis::Sigma3, Outcome::Plus, BitAnnouncement{0}),
      make_shot(PureState::One, Basis::Sigma3, Outcome::Minus, BitAnnouncement{1}),
      make_shot(PureState::Plus, Basis::Sigma1, Outcome::Plus, BitAnnouncement{1})};
  EXPECT_EQ(bob_decode(mixed), 0);
}

TEST(TallyMismatches, table_events) {
  const auto r = [](PureState p, Basis b, Outcome m) {
    return make_shot(p, b, m, ResultAnnouncement{m});
  };
  const std::vector<ShotRecord> mismatches = {
      r(PureState::Plus, Basis::Sigma1, Outcome::Minus), r(PureState::Minus, Basis::Sigma1, Outcome::Plus),
      r(PureState::Zero, Basis::Sigma3, Outcome::Minus), r(PureState::One, Basis::Sigma3, Outcome::Plus)};
  for (const auto &s : mismatches) {
    const MismatchTally t = tally_mismatches(std::vector<ShotRecord>{s});
    EXPECT_EQ(t.mismatches, 1);
    EXPECT_EQ(t.matched_result_announcements, 1);
  }
  const MismatchTally unmatched =
      tally_mismatches(std::vector<ShotRecord>{r(PureState::Zero, Basis::Sigma1, Outcome::Minus)});
  EXPECT_EQ(unmatched.mismatches, 0);
  EXPECT_EQ(unmatched.matched_result_announcements, 0);

  const MismatchTally bit_only = tally_mismatches(std::vector<ShotRecord>{
      make_shot(PureState::Zero, Basis::Sigma3, Outcome::Minus, BitAnnouncement{1})});
  EXPECT_EQ(bit_only.mismatches, 0);
  EXPECT_EQ(bit_only.matched_result_announcements, 0);
}

TEST(RunProtocol, identity_channel_is_faithful) {
  const ShotModel model(identity_channel());
  for (std::uint64_t seed = 0; seed < 500; ++seed)
    for (int bit : {0, 1}) {
      ProtocolParams p{119, 0.05, bit, seed};
      const ProtocolRun run = run_protocol(p, model);
      EXPECT_EQ(run.outcome.mismatch_count, 0);
      EXPECT_LE(run.outcome.mismatch_count, run.outcome.matched_result_announcements);
      if (run.outcome.decoded_bit) {
        EXPECT_EQ(*run.outcome.decoded_bit, bit);
      } else {
        EXPECT_EQ(run.outcome.matched_bit_announcements, 0);
      }
    }
}

TEST(RunProtocol, full_damping_sends_everything_to_zero) {
  const ProtocolRun run = run_protocol({500, 0.3, 1, 5}, seal_example_channel(1.0));
  for (const auto &s : run.shots) {
    if (s.basis == Basis::Sigma3) {
      EXPECT_EQ(s.result, Outcome::Plus);
    }
  }
}

TEST(RunProtocol, deterministic_for_fixed_seed) {
  const ProtocolParams p{119, 0.2, 1, 42};
  const ProtocolRun a = run_protocol(p, seal_example_channel(0.4));
  const ProtocolRun b = run_protocol(p, seal_example_channel(0.4));
  EXPECT_EQ(a.shots, b.shots);
  EXPECT_EQ(a.transcript, b.transcript);
  ProtocolParams q = p;
  q.seed = 43;
  EXPECT_NE(run_protocol(q, seal_example_channel(0.4)).shots, a.shots);
}

TEST(RunProtocol, rejects_bad_params) {
  EXPECT_THROW(run_protocol({0, 0.1, 0, 1}, identity_channel()), std::invalid_argument);
  EXPECT_THROW(run_protocol({10, 1.1, 0, 1}, identity_channel()), std::invalid_argument);
  EXPECT_THROW(run_protocol({10, 0.1, 2, 1}, identity_channel()), std::invalid_argument);
}

TEST(Transcript, public_view_hides_private_fields) {
  const ProtocolRun run = run_protocol({200, 0.3, 0, 8}, depolarizing_channel(0.2));
  ASSERT_EQ(run.transcript.size(), run.shots.size());
  for (std::size_t i = 0; i < run.shots.size(); ++i) {
    EXPECT_EQ(run.transcript[i].basis, run.shots[i].basis);
    EXPECT_EQ(run.transcript[i].announcement, run.shots[i].announcement);
  }
  std::ostringstream pub, priv;
  write_public_transcript(pub, run.transcript);
  write_private_transcript(priv, run.shots);
  const std::string pub_text = pub.str();
  EXPECT_EQ(pub_text.substr(0, pub_text.find('\n')), "shot_index,basis,announcement_kind,announced_value");
  const std::string priv_text = priv.str();
  EXPECT_EQ(priv_text.substr(0, priv_text.find('\n')),
            "shot_index,prep,basis,result,announcement_kind,announced_value");
  // header + one line per shot
  EXPECT_EQ(std::count(pub_text.begin(), pub_text.end(), '\n'), 201);
  EXPECT_EQ(std::count(priv_text.begin(), priv_text.end(), '\n'), 201);
}

TEST(MonteCarlo, identity_channel_uniform_announcements) {
  const SimStats s = monte_carlo({119, 0.05, 0, 1}, identity_channel(), 5000);
  for (const auto &f : s.announcement_freq)
    expect_estimate_near(f, 0.25);
  EXPECT_EQ(s.mismatch_rate.count, 0);
  EXPECT_EQ(s.decode_correct.count, s.decode_success.count);
  expect_estimate_near(s.matched_fraction, 0.5);
}

TEST(MonteCarlo, seal_half_matches_closed_forms) {
  const SimStats s = monte_carlo({119, 0.05, 0, 2}, seal_example_channel(0.5), 8404);
  expect_estimate_near(s.announcement_freq[2], 0.375);
  expect_estimate_near(s.announcement_freq[3], 0.125);
  expect_estimate_near(s.mismatch_rate, 0.25 * (1.5 - std::sqrt(0.5)));
}

TEST(MonteCarlo, independent_of_thread_count) {
  const ProtocolParams p{119, 0.1, 1, 2024};
  const SimStats a = monte_carlo(p, seal_example_channel(0.3), 777, 1);
  const SimStats b = monte_carlo(p, seal_example_channel(0.3), 777, 3);
  const SimStats c = monte_carlo(p, seal_example_channel(0.3), 777, 16);
  for (const SimStats *o : {&b, &c}) {
    for (std::size_t i = 0; i < 4; ++i)
      EXPECT_EQ(a.announcement_freq[i].count, o->announcement_freq[i].count);
    EXPECT_EQ(a.mismatch_rate.count, o->mismatch_rate.count);
    EXPECT_EQ(a.mismatch_rate.total, o->mismatch_rate.total);
    EXPECT_EQ(a.decode_success.count, o->decode_success.count);
    EXPECT_EQ(a.decode_correct.count, o->decode_correct.count);
    EXPECT_EQ(a.mismatch_rate.value, o->mismatch_rate.value);
  }
}

TEST(MonteCarlo, empirical_matches_analytic_for_random_channels) {
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 6; ++i) {
    const KrausChannel ch = qseal::testing::random_channel(rng);
    const int bit = i % 2;
    const SimStats s = monte_carlo({119, 0.3, bit, 100u + static_cast<unsigned>(i)}, ch, 3000);
    const auto dist = bit_announcement_probs(ch);
    for (std::size_t j = 0; j < 4; ++j)
      expect_estimate_near(s.announcement_freq[j], dist.probs_given_b[static_cast<std::size_t>(bit)][j]);
    expect_estimate_near(s.mismatch_rate, mismatch_probability(ch).matched_basis_conditional);
  }
}
