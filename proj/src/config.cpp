#include "seeclear/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace seeclear {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::uint64_t parse_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected an unsigned integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  auto size = [](std::size_t RunConfig::*f) {
    return [f](RunConfig& c, const std::string& v) { c.*f = static_cast<std::size_t>(parse_u64(v)); };
  };
  auto csize = [](std::size_t CondenserConfig::*f) {
    return [f](RunConfig& c, const std::string& v) { c.condenser.*f = static_cast<std::size_t>(parse_u64(v)); };
  };
  auto real = [](double RunConfig::*f) { return [f](RunConfig& c, const std::string& v) { c.*f = parse_double(v); }; };
  static const std::map<std::string, Setter> table = {
      {"steps", size(&RunConfig::steps)},
      {"kappa", real(&RunConfig::kappa)},
      {"sigma2_blur", real(&RunConfig::sigma2_blur)},
      {"eta1", real(&RunConfig::eta1)},
      {"etaT", real(&RunConfig::etaT)},
      {"patch", size(&RunConfig::patch)},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); }},
      {"weight_seed", [](RunConfig& c, const std::string& v) { c.weight_seed = parse_u64(v); }},
      {"workers", size(&RunConfig::workers)},
      {"weights", [](RunConfig& c, const std::string& v) { c.weights = v; }},
      {"bank_in", [](RunConfig& c, const std::string& v) { c.bank_in = v; }},
      {"bank_out", [](RunConfig& c, const std::string& v) { c.bank_out = v; }},
      {"channels", csize(&CondenserConfig::channels)},
      {"token_dim", csize(&CondenserConfig::token_dim)},
      {"seg_dim", csize(&CondenserConfig::seg_dim)},
      {"topk", csize(&CondenserConfig::topk)},
      {"groups", csize(&CondenserConfig::groups)},
      {"window", csize(&CondenserConfig::window)},
      {"mfsa_window", csize(&CondenserConfig::mfsa_window)},
      {"clip_length", csize(&CondenserConfig::clip_length)},
      {"upscale", csize(&CondenserConfig::upscale)},
      {"dwt_levels", csize(&CondenserConfig::dwt_levels)},
      {"distill_stride", csize(&CondenserConfig::distill_stride)},
      {"head_gain", [](RunConfig& c, const std::string& v) { c.condenser.head_gain = parse_double(v); }},
      {"time_gain", [](RunConfig& c, const std::string& v) { c.condenser.time_gain = parse_double(v); }},
      {"gate",
       [](RunConfig& c, const std::string& v) {
         if (v == "rowmax") c.condenser.gate = GateMode::kRowMax;
         else if (v == "mean") c.condenser.gate = GateMode::kMean;
         else throw ConfigError("gate must be rowmax or mean, got '" + v + "'");
       }},
      {"memory_axis",
       [](RunConfig& c, const std::string& v) {
         if (v == "memory") c.condenser.memory_axis = SoftmaxAxis::kMemory;
         else if (v == "token") c.condenser.memory_axis = SoftmaxAxis::kToken;
         else throw ConfigError("memory_axis must be memory or token, got '" + v + "'");
       }},
  };
  return table;
}

}  // namespace

DiffusionSchedule RunConfig::schedule() const {
  try {
    return build_schedule(steps, kappa, sigma2_blur, eta1, etaT, patch);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
}

void RunConfig::validate() const {
  schedule();
  try {
    condenser.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (workers == 0) throw ConfigError("workers must be >= 1");
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t n = 1; std::getline(is, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(n) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(n) + ": duplicate key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(n) + " (" + key + "): " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is);
}

void apply_environment(RunConfig& cfg) {
  if (const char* s = std::getenv("SEECLEAR_SEED"); s && *s) {
    try {
      cfg.seed = parse_u64(s);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("SEECLEAR_SEED: ") + e.what());
    }
  }
}

void write_config(std::ostream& os, const RunConfig& c) {
  const auto& n = c.condenser;
  os << std::setprecision(17);
  os << "steps = " << c.steps << "\nkappa = " << c.kappa << "\nsigma2_blur = " << c.sigma2_blur
     << "\neta1 = " << c.eta1 << "\netaT = " << c.etaT << "\npatch = " << c.patch << "\nseed = " << c.seed
     << "\nweight_seed = " << c.weight_seed << "\nworkers = " << c.workers << "\nchannels = " << n.channels
     << "\ntoken_dim = " << n.token_dim << "\nseg_dim = " << n.seg_dim << "\ntopk = " << n.topk
     << "\ngroups = " << n.groups << "\nwindow = " << n.window << "\nmfsa_window = " << n.mfsa_window
     << "\nclip_length = " << n.clip_length << "\nupscale = " << n.upscale << "\ndwt_levels = " << n.dwt_levels
     << "\ndistill_stride = " << n.distill_stride << "\nhead_gain = " << n.head_gain
     << "\ntime_gain = " << n.time_gain << "\ngate = " << (n.gate == GateMode::kRowMax ? "rowmax" : "mean")
     << "\nmemory_axis = " << (n.memory_axis == SoftmaxAxis::kMemory ? "memory" : "token") << '\n';
  if (!c.weights.empty()) os << "weights = " << c.weights.string() << '\n';
  if (!c.bank_in.empty()) os << "bank_in = " << c.bank_in.string() << '\n';
  if (!c.bank_out.empty()) os << "bank_out = " << c.bank_out.string() << '\n';
}

}  // namespace seeclear
