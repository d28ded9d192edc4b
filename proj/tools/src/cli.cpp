#include "retune_cli/commands.hpp"

#include "retune/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <thread>

namespace retune::cli {

namespace {

int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void add_config(CLI::App* sub) {
  sub->add_option("--config", "Read `key = value` settings from a file (flags take precedence)")
      ->check(CLI::ExistingFile);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Fills options not given on the command line from the subcommand's config
// file. Keys are long flag names without dashes; '#' starts a comment.
void apply_config(CLI::App* sub) {
  const CLI::Option* cfg = sub->get_option("--config");
  if (cfg->count() == 0) return;
  const std::string path = cfg->as<std::string>();
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

void add_train_flags(CLI::App* sub, TrainOptions& o) {
  sub->add_option("--prior", o.prior, "Weight grouping: b (bands) or bc (bands and channels)")
      ->check(CLI::IsMember({"b", "bc"}))
      ->capture_default_str();
  sub->add_option("--k", o.k, "Elementary steps per block")->capture_default_str();
  sub->add_option("--t", o.t, "Restarted blocks")->capture_default_str();
  sub->add_option("--size", o.size, "Image side (multiple of 2^levels)")->capture_default_str();
  sub->add_option("--levels", o.levels, "Wavelet levels")->capture_default_str();
  sub->add_option("--n-train", o.n_train, "Training images")->capture_default_str();
  sub->add_option("--n-test", o.n_test, "Test images")->capture_default_str();
  sub->add_option("--epochs", o.epochs, "Epochs")->capture_default_str();
  sub->add_option("--batch", o.batch, "Batch size")->capture_default_str();
  sub->add_option("--eta", o.eta, "Outer learning rate")->capture_default_str();
  sub->add_option("--seed", o.seed, "Seed for data and batching")->capture_default_str();
  sub->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--data-dir", o.data_dir, "Directory of PPM/PGM images instead of synthetic data");
  sub->add_option("--estimator", o.estimator, "Hypergradient: retune, trunc, jfb or deq")
      ->check(CLI::IsMember({"retune", "trunc", "jfb", "deq"}))
      ->capture_default_str();
  sub->add_flag("--timing", o.timing, "Record wall-clock milliseconds in the history");
  sub->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  add_config(sub);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"retune: restarted truncated unrolling for hyperparameter learning"};
  app.require_subcommand(1);

  BoundsCheckOptions bc;
  bc.threads = default_threads();
  auto* bsub = app.add_subcommand("bounds-check", "Check the hypergradient error bounds on random instances");
  bsub->add_option("--k", bc.k, "Elementary steps per block")->capture_default_str();
  bsub->add_option("--t-max", bc.t_max, "Largest number of restarts")->capture_default_str();
  bsub->add_option("--n", bc.n, "Pixels per instance (square, side a multiple of 4)")->capture_default_str();
  bsub->add_option("--instances", bc.instances, "Number of random instances")->capture_default_str();
  bsub->add_option("--seed", bc.seed, "Seed")->capture_default_str();
  bsub->add_option("--out", bc.out, "Report CSV")->capture_default_str();
  bsub->add_option("--threads", bc.threads, "Worker threads")->capture_default_str();
  add_config(bsub);

  TrainOptions dn;
  dn.threads = default_threads();
  auto* dsub = app.add_subcommand("denoise-train", "Learn wavelet weights for color denoising");
  add_train_flags(dsub, dn);
  dsub->add_option("--noise-rgb", dn.noise_rgb, "Noise standard deviation per channel")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();
  dsub->add_option("--lambda0", dn.lambda0, "Initial scale weights")->capture_default_str();
  dsub->add_option("--Lambda0", dn.Lambda0, "Initial band weights")->capture_default_str();

  TrainOptions rs;
  rs.threads = default_threads();
  rs.k = 10;
  rs.t = 10;
  auto* rsub = app.add_subcommand("restore-train", "Learn PnP sigma and tau for inpainting or deblurring");
  add_train_flags(rsub, rs);
  rsub->add_option("--task", rs.task, "inpaint or deblur")
      ->check(CLI::IsMember({"inpaint", "deblur"}))
      ->capture_default_str();
  rsub->add_option("--keep-prob", rs.keep_prob, "Fraction of observed pixels")->capture_default_str();
  rsub->add_option("--kernel-width", rs.kernel_width, "Blur width")->capture_default_str();
  rsub->add_option("--learn", rs.learn, "Learned parameters")
      ->check(CLI::IsMember({"sigma-tau"}))
      ->capture_default_str();
  rsub->add_option("--noise", rs.noise, "Noise standard deviation")->capture_default_str();
  rsub->add_option("--sigma0", rs.sigma0, "Initial denoiser strength")->capture_default_str();
  rsub->add_option("--tau0", rs.tau0, "Initial stepsize")->capture_default_str();

  HypergradCompareOptions hc;
  auto* hsub = app.add_subcommand("hypergrad-compare", "Compare hypergradient estimators at one point");
  hsub->add_option("--model", hc.model, "scalar, quadratic or wavelet")
      ->check(CLI::IsMember({"scalar", "quadratic", "wavelet"}))
      ->capture_default_str();
  hsub->add_option("--k", hc.k, "Elementary steps per block")->capture_default_str();
  hsub->add_option("--t", hc.t, "Restarted blocks")->capture_default_str();
  hsub->add_option("--p-neumann", hc.p_neumann, "Neumann series order")->capture_default_str();
  hsub->add_option("--seed", hc.seed, "Seed")->capture_default_str();
  hsub->add_option("--out", hc.out, "CSV output")->capture_default_str();
  add_config(hsub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    for (auto* sub : app.get_subcommands()) out << sub->help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }

  try {
    for (auto* sub : app.get_subcommands()) apply_config(sub);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (bsub->parsed()) return bounds_check(bc, out, err);
    if (dsub->parsed()) return denoise_train(dn, out, err);
    if (rsub->parsed()) return restore_train(rs, out, err);
    if (hsub->parsed()) return hypergrad_compare(hc, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kAssertionFailed;
  }
  return kUsage;
}

}  // namespace retune::cli
