#include "retune_cli/commands.hpp"

#include "retune/bilevel.hpp"
#include "retune/data.hpp"
#include "retune/io.hpp"
#include "retune/pnp.hpp"
#include "retune/wavelet.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <ostream>

namespace retune::cli {

namespace {

namespace fs = std::filesystem;

PriorKind parse_prior(const std::string& s) {
  if (s == "b") return PriorKind::Bands;
  if (s == "bc") return PriorKind::BandsChannels;
  throw UsageError("--prior must be b or bc");
}

Estimator parse_estimator(const std::string& s) {
  if (s == "retune") return Estimator::ReTune;
  if (s == "trunc") return Estimator::Trunc;
  if (s == "jfb") return Estimator::JFB;
  if (s == "deq") return Estimator::DEQ;
  throw UsageError("--estimator must be one of retune, trunc, jfb, deq");
}

void validate_common(const TrainOptions& o) {
  if (o.k < 1 || o.t < 1) throw UsageError("--k and --t must be >= 1");
  if (o.levels < 1) throw UsageError("--levels must be >= 1");
  if (o.size < 2 || o.size % (1 << o.levels) != 0) {
    throw UsageError("--size must be a positive multiple of 2^levels = " + std::to_string(1 << o.levels));
  }
  if (o.n_train < 1 || o.n_test < 1) throw UsageError("--n-train and --n-test must be >= 1");
  if (o.batch < 1 || o.batch > o.n_train) throw UsageError("--batch must be in [1, n-train]");
  if (o.epochs < 0) throw UsageError("--epochs must be >= 0");
  if (!(o.eta > 0.0)) throw UsageError("--eta must be positive");
}

TrainConfig make_config(const TrainOptions& o) {
  TrainConfig cfg;
  cfg.K = o.k;
  cfg.T = o.t;
  cfg.eta = o.eta;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.seed = o.seed;
  cfg.estimator = parse_estimator(o.estimator);
  cfg.threads = o.threads;
  cfg.timing = o.timing;
  return cfg;
}

// Clean train and test images: synthetic unless a directory is given.
std::pair<std::vector<Signal>, std::vector<Signal>> clean_images(const TrainOptions& o) {
  std::vector<Signal> train, test;
  if (o.data_dir.empty()) {
    const Shape shape{o.size, o.size, 3};
    for (int i = 0; i < o.n_train + o.n_test; ++i) {
      Rng rng(Rng::mix(o.seed, 2 * static_cast<std::uint64_t>(i)));
      (i < o.n_train ? train : test).push_back(synth_image(shape, rng));
    }
  } else {
    const auto all = load_image_dir(o.data_dir, o.size);
    if (static_cast<int>(all.size()) < o.n_train + o.n_test) {
      throw UsageError("--data-dir holds " + std::to_string(all.size()) + " usable images; need " +
                       std::to_string(o.n_train + o.n_test));
    }
    train.assign(all.begin(), all.begin() + o.n_train);
    test.assign(all.begin() + o.n_train, all.begin() + o.n_train + o.n_test);
  }
  return {train, test};
}

void write_history(const TrainResult& r, const std::string& path) {
  CsvTable t({"outer_step", "train_loss", "test_psnr_mean", "delta_K", "wall_ms"});
  for (const auto& h : r.history) {
    t.add_row({std::to_string(h.outer_step), format_double(h.train_loss),
               format_double(h.test_psnr_mean), format_double(h.delta_K), format_double(h.wall_ms)});
  }
  t.write(path);
}

void write_summary(const TrainSummary& s, const std::string& path) {
  CsvTable t({"key", "value"});
  t.add_row({"input_psnr", format_double(s.input_psnr)});
  t.add_row({"initial_test_psnr", format_double(s.initial_test_psnr)});
  t.add_row({"final_test_psnr", format_double(s.final_test_psnr)});
  t.add_row({"final_train_loss", format_double(s.final_train_loss)});
  t.add_row({"final_outer_objective", format_double(s.final_outer_objective)});
  t.add_row({"inner_steps_per_outer_step", std::to_string(s.inner_steps_per_outer_step)});
  t.add_row({"outer_steps", std::to_string(s.outer_steps)});
  for (std::size_t i = 0; i < s.s_final.size(); ++i) {
    t.add_row({"s_" + std::to_string(i), format_double(s.s_final[i])});
  }
  t.write(path);
}

Signal reconstruct(const TrainConfig& cfg, const StepFactory& make_step, const Vec& s,
                   const Sample& item) {
  const StepPtr step = make_step(item.observed.data(), s);
  const SchemeSpec spec{step, cfg.K, cfg.T};
  return Signal(item.clean.shape(),
                step->readout(restart_T(spec, step->initial_state(s), s).x_last, s));
}

// Mean loss over a dataset at the fixed point of each item's step.
double outer_objective(const TrainConfig& cfg, const TrainProblem& problem, const Vec& s,
                       const Dataset& data) {
  std::vector<double> loss(data.size(), 0.0);
  std::atomic<bool> certified{true};
  parallel_for(static_cast<int>(data.size()), cfg.threads, [&](int i) {
    const Sample& item = data.pairs[static_cast<std::size_t>(i)];
    const StepPtr step = problem.make_step(item.observed.data(), s);
    const SchemeSpec spec{step, 1, 1};
    if (!certificate(spec, s).contractive()) {
      certified = false;
      return;
    }
    const Vec x_hat = fixed_point_solve(spec, s, step->initial_state(s), 1e-10).x;
    loss[static_cast<std::size_t>(i)] = mse_loss(step->readout(x_hat, s), item.clean.data());
  });
  if (!certified) return std::nan("");
  double sum = 0.0;
  for (double l : loss) sum += l;
  return sum / static_cast<double>(loss.size());
}

TrainSummary finish(const TrainConfig& cfg, const TrainProblem& problem, const Vec& s0,
                    const TrainResult& r, double input_psnr, const std::string& out_dir) {
  TrainSummary sum;
  sum.input_psnr = input_psnr;
  sum.initial_test_psnr = r.initial_test_psnr;
  sum.final_test_psnr = r.history.empty() ? r.initial_test_psnr : r.history.back().test_psnr_mean;
  sum.final_train_loss = evaluate(cfg, problem, r.s_final, problem.train).mean_loss;
  sum.final_outer_objective = outer_objective(cfg, problem, r.s_final, problem.train);
  sum.inner_steps_per_outer_step = cfg.K * cfg.T;
  sum.outer_steps = static_cast<int>(r.history.size());
  sum.s_final.assign(r.s_final.data(), r.s_final.data() + r.s_final.size());

  fs::create_directories(out_dir);
  write_history(r, (fs::path(out_dir) / "history.csv").string());
  write_summary(sum, (fs::path(out_dir) / "summary.csv").string());
  const Sample& probe = problem.test.pairs.front();
  write_pnm((fs::path(out_dir) / "clean.ppm").string(), probe.clean);
  write_pnm((fs::path(out_dir) / "observed.ppm").string(), probe.observed);
  write_pnm((fs::path(out_dir) / "before.ppm").string(), reconstruct(cfg, problem.make_step, s0, probe));
  write_pnm((fs::path(out_dir) / "after.ppm").string(),
            reconstruct(cfg, problem.make_step, r.s_final, probe));
  return sum;
}

void report(std::ostream& out, const char* name, const char* input_label, const TrainSummary& s,
            const std::string& out_dir) {
  out << name << ": " << s.outer_steps << " outer steps, " << s.inner_steps_per_outer_step
      << " inner steps each\n"
      << "  " << input_label << " PSNR " << format_double(s.input_psnr) << " dB\n"
      << "  test PSNR " << format_double(s.initial_test_psnr) << " -> "
      << format_double(s.final_test_psnr) << " dB\n"
      << "  wrote " << out_dir << "/history.csv, summary.csv and PPM images\n";
}

}  // namespace

int denoise_train(const TrainOptions& o, std::ostream& out, std::ostream& /*err*/,
                  TrainSummary* summary) {
  validate_common(o);
  const PriorKind kind = parse_prior(o.prior);
  if (o.noise_rgb.size() != 3) throw UsageError("--noise-rgb needs three values");
  if (!(o.lambda0 > 0.0 && o.Lambda0 > 0.0)) throw UsageError("--lambda0 and --Lambda0 must be positive");
  const TrainConfig cfg = make_config(o);

  auto [train_clean, test_clean] = clean_images(o);
  const Shape shape = train_clean.front().shape();
  if (shape.channels != 3) throw UsageError("denoise-train expects RGB images");
  TrainProblem problem;
  problem.train = make_pairs(train_clean, nullptr, o.noise_rgb, o.seed);
  problem.test = make_pairs(test_clean, nullptr, o.noise_rgb, Rng::mix(o.seed, 0x7e57));
  const WaveletLayout layout(shape, o.levels);
  problem.make_step = wavelet_step_factory(layout, kind);
  const Vec s0 = pack_weights(HyperParams::uniform(o.levels, 3, kind, o.lambda0, o.Lambda0));

  double input_psnr = 0.0;
  for (const auto& p : problem.test.pairs) input_psnr += psnr(p.observed, p.clean);
  input_psnr /= static_cast<double>(problem.test.size());

  const TrainResult r = retune_train(cfg, problem, s0);
  const TrainSummary sum = finish(cfg, problem, s0, r, input_psnr, o.out_dir);
  report(out, "denoise-train", "noisy input", sum, o.out_dir);
  if (summary) *summary = sum;
  return kOk;
}

int restore_train(const TrainOptions& o, std::ostream& out, std::ostream& /*err*/,
                  TrainSummary* summary) {
  validate_common(o);
  const PriorKind kind = parse_prior(o.prior);
  if (o.learn != "sigma-tau") throw UsageError("--learn supports only sigma-tau");
  if (o.noise < 0.0) throw UsageError("--noise must be >= 0");
  if (!(o.sigma0 > 0.0 && o.tau0 > 0.0)) throw UsageError("--sigma0 and --tau0 must be positive");
  TrainConfig cfg = make_config(o);
  // Masks and blurs give no contraction certificate; the trainer logs a sampled quotient instead.
  cfg.require_certificate = false;

  auto [train_clean, test_clean] = clean_images(o);
  const Shape shape = train_clean.front().shape();
  LinearOp A = LinearOp::identity(shape);
  if (o.task == "inpaint") {
    if (!(o.keep_prob > 0.0 && o.keep_prob <= 1.0)) throw UsageError("--keep-prob must be in (0, 1]");
    Rng rng(Rng::mix(o.seed, 0xa5c));
    A = make_inpainting_mask(shape, o.keep_prob, rng);
  } else if (o.task == "deblur") {
    if (o.kernel_width < 1) throw UsageError("--kernel-width must be >= 1");
    A = make_anisotropic_blur(shape, o.kernel_width);
  } else {
    throw UsageError("--task must be inpaint or deblur");
  }
  const std::vector<double> sig(static_cast<std::size_t>(shape.channels), o.noise);
  const Dataset train = make_pairs(train_clean, &A, sig, o.seed);
  const Dataset test = make_pairs(test_clean, &A, sig, Rng::mix(o.seed, 0x7e57));
  auto D = std::make_shared<WaveletThresholdDenoiser>(WaveletLayout(shape, o.levels), kind);

  TrainProblem problem;
  problem.train = train;
  problem.test = test;
  problem.make_step = [A, D](const Vec& y, const Vec&) -> StepPtr {
    return std::make_shared<PnPStep>(A, D, y);
  };

  double input_psnr = 0.0;
  for (const auto& p : test.pairs) input_psnr += psnr(A.adjoint(p.observed.data()), p.clean.data());
  input_psnr /= static_cast<double>(test.size());

  const TrainResult r = learn_sigma_tau(cfg, train, test, A, D, o.sigma0, o.tau0);
  const TrainSummary sum = finish(cfg, problem, pack_sigma_tau(o.sigma0, o.tau0), r, input_psnr, o.out_dir);
  report(out, "restore-train", "A^T y baseline", sum, o.out_dir);
  if (summary) *summary = sum;
  return kOk;
}

}  // namespace retune::cli
