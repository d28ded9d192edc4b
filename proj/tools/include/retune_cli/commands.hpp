#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace retune::cli {

enum ExitCode : int { kOk = 0, kAssertionFailed = 1, kUsage = 2 };

/// Bad flag values detected after parsing (mapped to exit code 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BoundsCheckOptions {
  int k = 4;
  int t_max = 10;
  int n = 64;
  int instances = 100;
  std::uint64_t seed = 1;
  std::string out = "bounds.csv";
  int threads = 1;
};

struct TrainOptions {
  std::string prior = "bc";
  int k = 10;
  int t = 10;
  int size = 32;
  int levels = 2;
  int n_train = 24;
  int n_test = 8;
  int epochs = 4;
  int batch = 4;
  double eta = 5e-2;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string data_dir;
  std::string estimator = "retune";
  bool timing = false;
  int threads = 1;

  // denoise-train
  std::vector<double> noise_rgb{0.1, 0.25, 0.5};
  double lambda0 = 0.3;
  double Lambda0 = 1.0;

  // restore-train
  std::string task = "inpaint";
  double keep_prob = 0.1;
  int kernel_width = 5;
  std::string learn = "sigma-tau";
  double noise = 0.05;
  double sigma0 = 0.05;
  double tau0 = 1.0;
};

struct HypergradCompareOptions {
  std::string model = "scalar";
  int k = 2;
  int t = 2;
  int p_neumann = 2;
  std::uint64_t seed = 0;
  std::string out = "hypergrad.csv";
};

/// Summary values of a training run, also written to summary.csv.
struct TrainSummary {
  double input_psnr = 0.0;    // noisy input (denoising) or A^T y (restoration), test mean
  double initial_test_psnr = 0.0;
  double final_test_psnr = 0.0;
  double final_train_loss = 0.0;  // mean loss of the K-step, T-restart estimate over the training set
  /// Mean training loss at the certified fixed point (the bilevel objective); NaN without a certificate.
  double final_outer_objective = 0.0;
  int inner_steps_per_outer_step = 0;
  int outer_steps = 0;
  std::vector<double> s_final;
};

int bounds_check(const BoundsCheckOptions& opt, std::ostream& out, std::ostream& err);
int denoise_train(const TrainOptions& opt, std::ostream& out, std::ostream& err,
                  TrainSummary* summary = nullptr);
int restore_train(const TrainOptions& opt, std::ostream& out, std::ostream& err,
                  TrainSummary* summary = nullptr);
int hypergrad_compare(const HypergradCompareOptions& opt, std::ostream& out, std::ostream& err);

/// Parses argv-style arguments (without the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace retune::cli
