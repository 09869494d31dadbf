#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "seeclear/condenser.hpp"
#include "seeclear/config.hpp"
#include "seeclear/metrics.hpp"

namespace seeclear::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInvariant = 3 };

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a over the raw bytes of the tensor's doubles.
std::uint64_t digest(const Tensor& t);

/// Seeded weights, or the file named by cfg.weights (records in
/// CondenserWeights::parameters() order).
CondenserWeights load_or_seed_weights(const RunConfig& cfg);
void save_weights(const std::filesystem::path& path, CondenserWeights weights);
PixelCondenser make_condenser(const RunConfig& cfg);

struct DemoResult {
  Tensor hr;
  Tensor lr;
  Tensor sr;
  MetricReport report;
  std::uint64_t digest = 0;
  std::size_t bank_updates = 0;
};

/// Synthesize a moving-shapes clip, downsample it, and super-resolve it.
DemoResult run_demo(const RunConfig& cfg, std::size_t frames, std::size_t lr_size);

}  // namespace seeclear::cli
