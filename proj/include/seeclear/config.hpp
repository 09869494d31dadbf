#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "seeclear/condenser.hpp"
#include "seeclear/schedule.hpp"

namespace seeclear {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a CLI run needs. Every field has a default.
struct RunConfig {
  std::size_t steps = 15;
  double kappa = 0.1;
  double sigma2_blur = 2.0;
  double eta1 = 0.001;
  double etaT = 0.999;
  std::size_t patch = 8;
  std::uint64_t seed = 0;
  std::uint64_t weight_seed = 1;
  std::size_t workers = 1;
  CondenserConfig condenser;
  std::filesystem::path weights;   // empty: seeded weights
  std::filesystem::path bank_in;   // empty: zero bank
  std::filesystem::path bank_out;  // empty: not saved

  DiffusionSchedule schedule() const;
  /// Schedule and condenser checks; throws ConfigError.
  void validate() const;
};

/// `key = value` lines; '#' starts a comment. Unknown keys, duplicate
/// keys and malformed values throw ConfigError naming the line.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);

/// SEECLEAR_SEED, when set, replaces the seed.
void apply_environment(RunConfig& cfg);

/// Round-trippable text form.
void write_config(std::ostream& os, const RunConfig& cfg);

}  // namespace seeclear
