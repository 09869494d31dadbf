#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "seeclear/diffusion.hpp"
#include "seeclear/io.hpp"
#include "seeclear/resample.hpp"
#include "seeclear/spectral.hpp"
#include "seeclear/synthetic.hpp"

namespace seeclear::cli {

namespace fs = std::filesystem;

namespace {

// Schedule or condenser invariants broken by the configuration.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig resolve_config(const std::string& path) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  apply_environment(cfg);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw InvariantError(e.what());
  }
  return cfg;
}

std::vector<Tensor> read_frames(const std::vector<fs::path>& files) {
  std::vector<Tensor> out;
  for (const auto& f : files) {
    Tensor t = read_png(f);
    if (t.dim(0) != 3) throw DataError(f.string() + ": expected an RGB frame");
    if (!out.empty() && t.shape() != out[0].shape()) throw DataError(f.string() + ": frame size differs from the first");
    out.push_back(std::move(t));
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

int cmd_forward(const RunConfig& cfg, const fs::path& hr_dir, const fs::path& lr_dir, std::size_t t,
                const fs::path& out_dir, std::ostream& out) {
  const auto sched = cfg.schedule();
  if (t < 1 || t > sched.steps) throw InvariantError("t must lie in 1.." + std::to_string(sched.steps));
  const auto hr_files = list_frames(hr_dir);
  ensure_dir(out_dir);
  const std::size_t s = cfg.condenser.upscale;
  for (std::size_t i = 0; i < hr_files.size(); ++i) {
    const fs::path lr_file = lr_dir / hr_files[i].filename();
    if (!fs::exists(lr_file)) throw DataError("missing LR frame " + lr_file.string());
    const Tensor hr = read_png(hr_files[i]);
    const Tensor lr = read_png(lr_file);
    if (hr.dim(1) != lr.dim(1) * s || hr.dim(2) != lr.dim(2) * s || hr.dim(0) != lr.dim(0)) {
      throw DataError(lr_file.string() + ": not a " + std::to_string(s) + "x downscale of " + hr_files[i].string());
    }
    const auto u0 = dct2_patches(hr, sched.patch);
    auto ul = dct2_patches(resize_bicubic(lr, hr.dim(1), hr.dim(2)), sched.patch);
    const auto ut = forward_marginal_sample({u0.coeffs, 0}, {ul.coeffs, sched.steps}, t, sched,
                                            KeyedNormal(cfg.seed, static_cast<std::uint32_t>(i)));
    ul.coeffs = ut.u;
    const Tensor pixels = idct2_patches(ul);
    const std::string stem = hr_files[i].stem().string();
    write_png(out_dir / (stem + ".png"), pixels);
    save_tensor(out_dir / (stem + "_u.seet"), ut.u);
    save_tensor(out_dir / (stem + "_pixels.seet"), pixels);
  }
  out << "wrote " << hr_files.size() << " frames at t=" << t << " to " << out_dir.string() << '\n';
  return kOk;
}

int cmd_sample(RunConfig cfg, const fs::path& lr_dir, const fs::path& out_dir, const fs::path& hr_dir,
               const fs::path& oracle_dir, std::ostream& out) {
  const auto sched = cfg.schedule();
  const auto lr_files = list_frames(lr_dir);
  const auto lr = read_frames(lr_files);
  const std::size_t s = cfg.condenser.upscale, down = std::size_t{1} << (cfg.condenser.encoder_depth - 1);
  if (lr[0].dim(1) % down || lr[0].dim(2) % down) {
    throw DataError("LR frames of " + shape_to_string(lr[0].shape()) + " are not divisible by " + std::to_string(down));
  }
  if ((lr[0].dim(1) * s) % sched.patch || (lr[0].dim(2) * s) % sched.patch) {
    throw DataError("HR size is not divisible by patch " + std::to_string(sched.patch));
  }
  auto load_matching = [&](const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& f : lr_files) {
      const fs::path p = dir / f.filename();
      if (!fs::exists(p)) throw DataError("missing frame " + p.string());
      files.push_back(p);
    }
    auto frames = read_frames(files);
    if (frames[0].dim(1) != lr[0].dim(1) * s || frames[0].dim(2) != lr[0].dim(2) * s) {
      throw DataError(dir.string() + ": frames are not " + std::to_string(s) + "x the LR size");
    }
    return frames;
  };
  std::vector<Tensor> hr, oracle;
  if (!hr_dir.empty()) hr = load_matching(hr_dir);
  if (!oracle_dir.empty()) oracle = load_matching(oracle_dir);

  const PixelCondenser net = make_condenser(cfg);
  MemoryBank bank = cfg.bank_in.empty() ? MemoryBank::zeros(cfg.condenser.category()) : load_bank(cfg.bank_in);
  ensure_dir(out_dir);

  const std::size_t m = cfg.condenser.clip_length;
  std::vector<Tensor> sr_frames;
  for (std::size_t first = 0, clip = 0; first < lr.size(); first += m, ++clip) {
    const std::size_t count = std::min(m, lr.size() - first);
    const std::vector<Tensor> part(lr.begin() + static_cast<std::ptrdiff_t>(first),
                                   lr.begin() + static_cast<std::ptrdiff_t>(first + count));
    GenerateOptions opts;
    opts.workers = cfg.workers;
    if (!oracle.empty()) {
      opts.oracle_hr = stack(std::vector<Tensor>(oracle.begin() + static_cast<std::ptrdiff_t>(first),
                                                 oracle.begin() + static_cast<std::ptrdiff_t>(first + count)));
    }
    const ClipResult res = generate_clip(stack(part), sched, net, bank, cfg.seed, static_cast<std::uint32_t>(clip), opts);
    for (std::size_t i = 0; i < count; ++i) {
      const Tensor frame = res.sr.slice(i);
      const std::string stem = lr_files[first + i].stem().string();
      write_png(out_dir / (stem + ".png"), frame);
      save_tensor(out_dir / (stem + ".seet"), frame);
      sr_frames.push_back(frame);
    }
  }
  if (!cfg.bank_out.empty()) save_bank(cfg.bank_out, bank);
  if (!hr.empty()) {
    const auto report = evaluate(sr_frames, hr);
    std::ofstream csv(out_dir / "metrics.csv");
    write_csv(csv, report);
    out << std::fixed << std::setprecision(4) << "mean PSNR(Y) " << report.mean_psnr() << " dB, SSIM "
        << report.mean_ssim() << '\n';
  }
  out << "wrote " << sr_frames.size() << " SR frames to " << out_dir.string() << '\n';
  return kOk;
}

int cmd_psd(const fs::path& frames_dir, const fs::path& out_csv, std::ostream& out) {
  const auto files = list_frames(frames_dir);
  std::ofstream csv(out_csv);
  if (!csv) throw DataError("cannot write " + out_csv.string());
  csv << "frame,bin,power\n" << std::setprecision(12);
  for (const auto& f : files) {
    const auto profile = psd_radial(read_png(f));
    for (std::size_t b = 0; b < profile.bins.size(); ++b) csv << f.filename().string() << ',' << b << ',' << profile.bins[b] << '\n';
  }
  out << "wrote PSD of " << files.size() << " frames to " << out_csv.string() << '\n';
  return kOk;
}

int cmd_metrics(const fs::path& a_dir, const fs::path& b_dir, const fs::path& out_csv, bool rgb, std::ostream& out) {
  const auto a_files = list_frames(a_dir);
  std::vector<fs::path> b_files;
  for (const auto& f : a_files) {
    const fs::path p = b_dir / f.filename();
    if (!fs::exists(p)) throw DataError("missing frame " + p.string());
    b_files.push_back(p);
  }
  std::vector<Tensor> a, b;
  for (std::size_t i = 0; i < a_files.size(); ++i) {
    a.push_back(read_png(a_files[i]));
    b.push_back(read_png(b_files[i]));
    if (a.back().shape() != b.back().shape()) throw DataError(b_files[i].string() + ": size differs from " + a_files[i].string());
  }
  const auto report = evaluate(a, b, rgb ? PsnrMode::kRGB : PsnrMode::kY);
  std::ofstream csv(out_csv);
  if (!csv) throw DataError("cannot write " + out_csv.string());
  write_csv(csv, report);
  out << std::fixed << std::setprecision(4) << "mean PSNR " << report.mean_psnr() << " dB, SSIM " << report.mean_ssim()
      << ", Charbonnier " << report.mean_charbonnier() << '\n';
  return kOk;
}

int cmd_demo(const RunConfig& cfg, const fs::path& out_dir, std::size_t frames, std::size_t lr_size, std::ostream& out) {
  const DemoResult demo = run_demo(cfg, frames, lr_size);
  if (!out_dir.empty()) {
    ensure_dir(out_dir / "hr");
    ensure_dir(out_dir / "lr");
    ensure_dir(out_dir / "sr");
    for (std::size_t i = 0; i < demo.sr.dim(0); ++i) {
      std::ostringstream name;
      name << std::setw(4) << std::setfill('0') << i;
      write_png(out_dir / "hr" / (name.str() + ".png"), demo.hr.slice(i));
      write_png(out_dir / "lr" / (name.str() + ".png"), demo.lr.slice(i));
      write_png(out_dir / "sr" / (name.str() + ".png"), demo.sr.slice(i));
    }
    save_tensor(out_dir / "sr.seet", demo.sr);
    save_weights(out_dir / "weights.seet", load_or_seed_weights(cfg));
    std::ofstream csv(out_dir / "metrics.csv");
    write_csv(csv, demo.report);
    std::ofstream cfg_out(out_dir / "run.cfg");
    write_config(cfg_out, cfg);
  }
  out << "demo: " << demo.sr.dim(0) << " frames " << demo.sr.dim(2) << "x" << demo.sr.dim(3) << ", mean PSNR(Y) "
      << std::fixed << std::setprecision(4) << demo.report.mean_psnr() << " dB, digest " << std::hex
      << std::setw(16) << std::setfill('0') << demo.digest << std::dec << '\n';
  return kOk;
}

}  // namespace

std::uint64_t digest(const Tensor& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(t.data().data());
  for (std::size_t i = 0; i < t.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

CondenserWeights load_or_seed_weights(const RunConfig& cfg) {
  CondenserWeights w = CondenserWeights::seeded(cfg.condenser, cfg.weight_seed);
  if (cfg.weights.empty()) return w;
  const auto records = load_tensors(cfg.weights);
  auto params = w.parameters();
  if (records.size() != params.size()) {
    throw DataError(cfg.weights.string() + " holds " + std::to_string(records.size()) + " tensors, expected " +
                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (records[i].shape() != params[i]->shape()) {
      throw DataError(cfg.weights.string() + ": record " + std::to_string(i) + " has shape " +
                      shape_to_string(records[i].shape()) + ", expected " + shape_to_string(params[i]->shape()));
    }
    *params[i] = records[i];
  }
  return w;
}

void save_weights(const fs::path& path, CondenserWeights weights) {
  std::vector<Tensor> records;
  for (Tensor* p : weights.parameters()) records.push_back(*p);
  save_tensors(path, records);
}

PixelCondenser make_condenser(const RunConfig& cfg) {
  return PixelCondenser(cfg.condenser, load_or_seed_weights(cfg), cfg.weight_seed);
}

DemoResult run_demo(const RunConfig& cfg, std::size_t frames, std::size_t lr_size) {
  DemoResult r;
  const std::size_t s = cfg.condenser.upscale;
  r.hr = moving_shapes_clip(frames, lr_size * s, lr_size * s, cfg.seed);
  r.lr = downsample_clip(r.hr, s);
  const PixelCondenser net = make_condenser(cfg);
  MemoryBank bank = cfg.bank_in.empty() ? MemoryBank::zeros(cfg.condenser.category()) : load_bank(cfg.bank_in);
  GenerateOptions opts;
  opts.workers = cfg.workers;
  const ClipResult res = generate_clip(r.lr, cfg.schedule(), net, bank, cfg.seed, 0, opts);
  if (!cfg.bank_out.empty()) save_bank(cfg.bank_out, bank);
  r.sr = res.sr;
  r.bank_updates = res.bank_updates;
  r.report = evaluate(unstack(r.sr), unstack(r.hr));
  r.digest = digest(r.sr);
  return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blurring-ResShift video super-resolution engine"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "key = value run configuration")->check(CLI::ExistingFile);
  std::optional<std::size_t> workers;
  app.add_option("-j,--workers", workers, "worker threads (overrides config)");

  std::string hr, lr, out_dir, oracle, frames_dir, out_csv, a_dir, b_dir, weights;
  std::size_t t = 0, demo_frames = 5, demo_size = 64;
  bool rgb = false;

  auto* fwd = app.add_subcommand("forward", "sample u_t from the forward chain");
  fwd->add_option("--hr", hr, "HR frame directory")->required();
  fwd->add_option("--lr", lr, "LR frame directory")->required();
  fwd->add_option("-t,--step", t, "diffusion step")->required();
  fwd->add_option("-o,--out", out_dir, "output directory")->required();

  auto* smp = app.add_subcommand("sample", "super-resolve LR frames");
  smp->add_option("--lr", lr, "LR frame directory")->required();
  smp->add_option("-o,--out", out_dir, "output directory")->required();
  smp->add_option("--hr", hr, "HR frames for metrics");
  smp->add_option("--oracle", oracle, "HR frames used as the oracle denoiser");
  smp->add_option("--weights", weights, "weights file (overrides config)");

  auto* psd = app.add_subcommand("psd", "radial power spectra of frames");
  psd->add_option("--frames", frames_dir, "frame directory")->required();
  psd->add_option("-o,--out", out_csv, "output CSV")->required();

  auto* met = app.add_subcommand("metrics", "PSNR / SSIM / Charbonnier of two frame sets");
  met->add_option("--a", a_dir, "first directory")->required();
  met->add_option("--b", b_dir, "second directory")->required();
  met->add_option("-o,--out", out_csv, "output CSV")->required();
  met->add_flag("--rgb", rgb, "PSNR over RGB instead of Y");

  auto* demo = app.add_subcommand("demo", "synthesize a moving-shapes clip and run the full pipeline");
  demo->add_option("-o,--out", out_dir, "output directory (optional)");
  demo->add_option("--frames", demo_frames, "clip length")->check(CLI::PositiveNumber);
  demo->add_option("--size", demo_size, "LR side length")->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    RunConfig cfg = resolve_config(config_path);
    if (workers) cfg.workers = std::max<std::size_t>(1, *workers);
    if (!weights.empty()) cfg.weights = weights;
    if (*fwd) return cmd_forward(cfg, hr, lr, t, out_dir, out);
    if (*smp) return cmd_sample(cfg, lr, out_dir, hr, oracle, out);
    if (*psd) return cmd_psd(frames_dir, out_csv, out);
    if (*met) return cmd_metrics(a_dir, b_dir, out_csv, rgb, out);
    if (*demo) return cmd_demo(cfg, out_dir, demo_frames, demo_size, out);
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DimensionError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ScheduleError& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::domain_error& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  }
  return kUsage;
}

}  // namespace seeclear::cli
