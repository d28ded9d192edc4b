#pragma once

#include "retune/core.hpp"
#include "retune/scheme.hpp"
#include "retune/wavelet.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace retune {

enum class Estimator { ReTune, Trunc, JFB, DEQ };
enum class Optimizer { GD, Adam };

const char* to_string(Estimator e);

struct TrainConfig {
  int K = 10;
  int T = 10;
  double eta = 5e-2;
  int epochs = 4;
  int batch_size = 4;
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::ReTune;
  /// Refuse updates that leave the contraction region. Off for operators without a certificate.
  bool require_certificate = true;
  int threads = 1;
  /// Record wall-clock milliseconds in the history (otherwise 0, keeping output reproducible).
  bool timing = false;
  /// Fixed-point accuracy for the JFB and DEQ estimators.
  double solve_tol = 1e-10;

  void validate() const;
};

struct AdamState {
  Vec m;
  Vec v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam step; returns the updated parameters.
Vec adam_update(AdamState& state, const Vec& params, const Vec& grad, double eta);

/// Deterministic seeded batches: shuffle once per epoch, drop a trailing partial batch.
std::vector<std::vector<int>> run_epoch_protocol(const TrainConfig& cfg, std::size_t items);

/// Builds the elementary step bound to one observation at parameters s.
using StepFactory = std::function<StepPtr(const Vec& observed, const Vec& s)>;

/// Wavelet forward-backward steps on observations of one layout; the stepsize
/// is re-derived from the weights each time a step is built.
StepFactory wavelet_step_factory(const WaveletLayout& layout, PriorKind kind);

struct TrainProblem {
  StepFactory make_step;
  Dataset train;
  Dataset test;
};

struct HistoryRow {
  int outer_step = 0;
  double train_loss = 0.0;
  double test_psnr_mean = 0.0;
  double delta_K = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  Vec s_final;
  std::vector<HistoryRow> history;
  double initial_test_psnr = 0.0;
};

class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Evaluation {
  double mean_loss = 0.0;
  double mean_psnr = 0.0;
};

/// Mean loss and PSNR of the K-step, T-restart estimate over a dataset.
Evaluation evaluate(const TrainConfig& cfg, const TrainProblem& problem, const Vec& s,
                    const Dataset& data);

/// Gradient of the batch-mean loss at s using the configured estimator, with the mean loss.
std::pair<Vec, double> batch_gradient(const TrainConfig& cfg, const TrainProblem& problem,
                                      const Vec& s, const std::vector<int>& batch);

/// The restarted training loop with the configured outer optimizer.
TrainResult retune_train(const TrainConfig& cfg, const TrainProblem& problem, const Vec& s0);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once; callers write results into per-index slots.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace retune
