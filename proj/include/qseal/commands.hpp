#pragma once

// Implementations behind the qseal command-line tool. Each command writes to
// caller-supplied streams and returns a process exit code.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qseal/analysis.hpp"
#include "qseal/channel_io.hpp"
#include "qseal/protocol.hpp"
#include "qseal/qubit.hpp"

namespace qseal {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidChannel = 1,
  kExitBadArguments = 2,
  kExitIoError = 3,
};

inline constexpr int kDefaultShots = 119;
inline constexpr double kDefaultPAnnounce = 0.05;

//----------------------------------------------------------------------------
// sweep
//----------------------------------------------------------------------------

struct SweepConfig {
  double grid_step = 0.05;
  int n_shots = kDefaultShots;
  double p_announce = kDefaultPAnnounce;
  double tail_tol = kDefaultTailTol;
  std::string output_path;
};

// 0, step, 2 step, ..., 1. When 1/step is an integer n the points are i/n.
inline std::vector<double> make_grid(double step) {
  if (!(step > 0.0 && step <= 1.0))
    throw std::invalid_argument("grid step must lie in (0, 1]");
  std::vector<double> grid;
  const double inv = 1.0 / step;
  const long long n = std::llround(inv);
  if (std::abs(static_cast<double>(n) * step - 1.0) <= 1e-9) {
    for (long long i = 0; i <= n; ++i)
      grid.push_back(static_cast<double>(i) / static_cast<double>(n));
    return grid;
  }
  for (long long i = 0; static_cast<double>(i) * step < 1.0; ++i)
    grid.push_back(static_cast<double>(i) * step);
  grid.push_back(1.0);
  return grid;
}

struct SweepRow {
  double x = 0.0;
  double mi_bits = 0.0;
  double mismatch_conditional = 0.0;
  double mismatch_per_shot = 0.0;
  double truncation_mass = 0.0;
};

inline std::vector<SweepRow> compute_sweep(const SweepConfig &cfg) {
  std::vector<SweepRow> rows;
  for (double x : make_grid(cfg.grid_step)) {
    const MIResult mi = mi_seal_example(x, cfg.n_shots, cfg.p_announce, cfg.tail_tol);
    const MismatchProbability mm = mismatch_probability(seal_example_channel(x));
    rows.push_back({x, mi.mi_bits, mm.matched_basis_conditional, mm.per_shot, mi.truncation_mass});
  }
  return rows;
}

inline void write_sweep_csv(std::ostream &os, const SweepConfig &cfg,
                            const std::vector<SweepRow> &rows) {
  fmt::print(os, "# qseal sweep: seal-family information gain and disturbance\n");
  fmt::print(os, "# n_shots={}\n# p_announce={}\n# tail_tol={}\n# grid_step={}\n", cfg.n_shots,
             cfg.p_announce, cfg.tail_tol, cfg.grid_step);
  fmt::print(os, "x,mi_bits,mismatch_conditional,mismatch_per_shot,truncation_mass\n");
  for (const auto &r : rows)
    fmt::print(os, "{},{},{},{},{}\n", r.x, r.mi_bits, r.mismatch_conditional,
               r.mismatch_per_shot, r.truncation_mass);
}

// Writes to `<out>.tmp` and renames on success, so a failed run leaves no
// partial CSV behind.
inline int cmd_sweep(const SweepConfig &cfg, std::ostream &err) {
  if (cfg.output_path.empty()) {
    fmt::print(err, "sweep: --out is required\n");
    return kExitBadArguments;
  }
  std::vector<SweepRow> rows;
  try {
    rows = compute_sweep(cfg);
  } catch (const std::invalid_argument &e) {
    fmt::print(err, "sweep: {}\n", e.what());
    return kExitBadArguments;
  }

  namespace fs = std::filesystem;
  const fs::path out = cfg.output_path;
  const fs::path tmp = out.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      fmt::print(err, "sweep: cannot write '{}'\n", tmp.string());
      return kExitIoError;
    }
    write_sweep_csv(f, cfg, rows);
    f.flush();
    if (!f) {
      f.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      fmt::print(err, "sweep: write to '{}' failed\n", tmp.string());
      return kExitIoError;
    }
  }
  std::error_code ec;
  fs::rename(tmp, out, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fmt::print(err, "sweep: cannot move output into place at '{}'\n", out.string());
    return kExitIoError;
  }
  return kExitOk;
}

//----------------------------------------------------------------------------
// Channel sources
//----------------------------------------------------------------------------

struct ChannelSource {
  std::string builtin;              // identity | seal | depolarizing | dephasing
  std::optional<double> parameter;  // x for seal, p for depolarizing
  std::string file;
};

class BadArguments : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline KrausChannel builtin_channel(const std::string &name, std::optional<double> parameter) {
  auto need = [&](const char *what) {
    if (!parameter)
      throw BadArguments("channel '" + name + "' needs --x (" + what + ")");
    return *parameter;
  };
  try {
    if (name == "identity")
      return identity_channel();
    if (name == "seal")
      return seal_example_channel(need("damping strength x"));
    if (name == "depolarizing")
      return depolarizing_channel(need("depolarizing probability p"));
    if (name == "dephasing")
      return dephasing_channel();
  } catch (const std::invalid_argument &e) {
    throw BadArguments(e.what());
  }
  throw BadArguments("unknown builtin channel '" + name +
                     "' (expected identity, seal, depolarizing, dephasing)");
}

// Throws BadArguments or ChannelFormatError.
inline KrausChannel resolve_channel(const ChannelSource &src) {
  const bool has_builtin = !src.builtin.empty();
  const bool has_file = !src.file.empty();
  if (has_builtin == has_file)
    throw BadArguments("give exactly one of --channel or --channel-file");
  if (has_builtin)
    return builtin_channel(src.builtin, src.parameter);
  return load_channel_file(src.file);
}

//----------------------------------------------------------------------------
// simulate
//----------------------------------------------------------------------------

struct SimulateConfig {
  ProtocolParams params;
  ChannelSource channel;
  long long trials = 1;
  unsigned threads = 1;
  std::string transcript_path;  // private transcript; public goes to <path>.public
};

namespace detail {

inline void print_row(std::ostream &os, const std::string &name, const Estimate &e,
                      std::optional<double> analytic) {
  std::string z = "-";
  if (analytic && e.std_error > 0.0)
    z = fmt::format("{:+.3f}", (e.value - *analytic) / e.std_error);
  fmt::print(os, "{:<26} {:>12.6f} {:>12.6f} {:>12} {:>10} {:>8}/{}\n", name, e.value,
             e.std_error, analytic ? fmt::format("{:.6f}", *analytic) : std::string("-"), z,
             e.count, e.total);
}

inline bool write_transcripts(const std::string &path, const ProtocolRun &run) {
  std::ofstream priv(path, std::ios::binary | std::ios::trunc);
  std::ofstream pub(path + ".public", std::ios::binary | std::ios::trunc);
  if (!priv || !pub)
    return false;
  write_private_transcript(priv, run.shots);
  write_public_transcript(pub, run.transcript);
  return static_cast<bool>(priv.flush()) && static_cast<bool>(pub.flush());
}

}  // namespace detail

inline int cmd_simulate(const SimulateConfig &cfg, std::ostream &out, std::ostream &err) {
  std::optional<KrausChannel> eve;
  try {
    check_params(cfg.params);
    if (cfg.trials < 1)
      throw BadArguments("--trials must be at least 1");
    eve = resolve_channel(cfg.channel);
  } catch (const ChannelFormatError &e) {
    fmt::print(err, "simulate: {}\n", e.what());
    return kExitBadArguments;
  } catch (const std::exception &e) {
    fmt::print(err, "simulate: {}\n", e.what());
    return kExitBadArguments;
  }

  const ChannelReport report = validate_channel(*eve);
  if (!report.complete) {
    fmt::print(err, "simulate: channel '{}' fails Kraus completeness (deviation {:.6g})\n",
               eve->label(), report.deviation);
    return kExitInvalidChannel;
  }

  const ProtocolParams &p = cfg.params;
  const SimStats stats = monte_carlo(p, *eve, cfg.trials, cfg.threads);
  const AnnouncementDistribution dist = bit_announcement_probs(*eve);
  const MismatchProbability mm = mismatch_probability(*eve);
  const auto &probs = dist.probs_given_b[static_cast<std::size_t>(p.message_bit)];

  fmt::print(out, "# qseal simulate\n");
  fmt::print(out, "channel: {}\n", eve->label());
  fmt::print(out, "n_shots: {}\np_announce: {}\nmessage_bit: {}\nseed: {}\n", p.n_shots,
             p.p_announce, p.message_bit, p.seed);
  fmt::print(out, "trials: {}\ntotal_shots: {}\n\n", stats.trials, stats.shots);
  fmt::print(out, "{:<26} {:>12} {:>12} {:>12} {:>10} {:>8}\n", "statistic", "empirical",
             "std_error", "analytic", "z", "counts");
  detail::print_row(out, "decode_success", stats.decode_success,
                    decode_success_probability(p.n_shots, p.p_announce));
  detail::print_row(out, "decoded_bit_correct", stats.decode_correct, std::nullopt);
  detail::print_row(out, "mismatch_conditional", stats.mismatch_rate,
                    mm.matched_basis_conditional);
  detail::print_row(out, "matched_basis_fraction", stats.matched_fraction, 0.5);
  const char *names[4] = {"announce(sigma1,c=0)", "announce(sigma1,c=1)",
                          "announce(sigma3,c=0)", "announce(sigma3,c=1)"};
  for (std::size_t i = 0; i < 4; ++i)
    detail::print_row(out, names[i], stats.announcement_freq[i], probs[i]);
  fmt::print(out, "\n# analytic decode_success is the undisturbed-channel value 1-(1-p_a/2)^N;\n"
                  "# a disturbing channel also loses runs to tied votes.\n");

  if (!cfg.transcript_path.empty()) {
    ProtocolParams first = p;
    first.seed = trial_seed(p.seed, 0);
    if (!detail::write_transcripts(cfg.transcript_path, run_protocol(first, *eve))) {
      fmt::print(err, "simulate: cannot write transcript '{}'\n", cfg.transcript_path);
      return kExitIoError;
    }
  }
  return kExitOk;
}

//----------------------------------------------------------------------------
// validate-channel
//----------------------------------------------------------------------------

struct ValidateConfig {
  std::string path;
  int n_shots = kDefaultShots;
  double p_announce = kDefaultPAnnounce;
  double tail_tol = kDefaultTailTol;
};

inline int cmd_validate_channel(const ValidateConfig &cfg, std::ostream &out, std::ostream &err) {
  std::optional<KrausChannel> ch;
  try {
    ch = load_channel_file(cfg.path);
  } catch (const std::exception &e) {
    fmt::print(err, "validate-channel: {}\n", e.what());
    return kExitBadArguments;
  }

  const ChannelReport r = validate_channel(*ch);
  fmt::print(out, "channel: {}\n", ch->label());
  fmt::print(out, "operators: {}\n", ch->operators().size());
  fmt::print(out, "completeness_deviation: {:.6g}\n", r.deviation);
  fmt::print(out, "completeness: {}\n", r.complete ? "pass" : "FAIL");
  if (!r.complete) {
    fmt::print(out, "chaotic_image_lambda: n/a\nchaotic_image_v: n/a\nunital: n/a\n");
    fmt::print(out, "mi_bits: n/a\nmismatch_per_shot: n/a\nmismatch_conditional: n/a\n");
    return kExitInvalidChannel;
  }

  MIResult mi;
  try {
    mi = expected_mutual_information(bit_announcement_probs(*ch), cfg.n_shots, cfg.p_announce,
                                     cfg.tail_tol);
  } catch (const std::invalid_argument &e) {
    fmt::print(err, "validate-channel: {}\n", e.what());
    return kExitBadArguments;
  }
  const MismatchProbability mm = mismatch_probability(*ch);
  const auto &v = r.chaotic_image.v;
  fmt::print(out, "chaotic_image_lambda: {:.12g}\n", r.chaotic_image.lambda);
  fmt::print(out, "chaotic_image_v: ({:.12g}, {:.12g}, {:.12g})\n", v[0], v[1], v[2]);
  fmt::print(out, "unital: {}\n", r.unital ? "yes" : "no");
  fmt::print(out, "n_shots: {}\np_announce: {}\n", cfg.n_shots, cfg.p_announce);
  fmt::print(out, "mi_bits: {:.12g}\n", mi.mi_bits);
  fmt::print(out, "mi_truncation_mass: {:.3g}\n", mi.truncation_mass);
  fmt::print(out, "mismatch_per_shot: {:.12g}\n", mm.per_shot);
  fmt::print(out, "mismatch_conditional: {:.12g}\n", mm.matched_basis_conditional);
  return kExitOk;
}

}  // namespace qseal
