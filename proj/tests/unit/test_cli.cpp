#include "retune_cli/commands.hpp"

#include "retune/forward_models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace retune::cli {
namespace {

namespace fs = std::filesystem;

std::string scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "retune_cli_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_quiet(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run(args, out, err);
}

std::vector<std::string> csv_column(const std::string& csv, std::size_t col) {
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> out;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t c = 0; c <= col; ++c) std::getline(ls, cell, ',');
    out.push_back(cell);
  }
  return out;
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run_quiet({}), kUsage);
  EXPECT_EQ(run_quiet({"no-such-command"}), kUsage);
  EXPECT_EQ(run_quiet({"bounds-check", "--instances", "0", "--out", scratch("x.csv")}), kUsage);
  EXPECT_EQ(run_quiet({"bounds-check", "--n", "60", "--out", scratch("x.csv")}), kUsage);
  EXPECT_EQ(run_quiet({"denoise-train", "--size", "30"}), kUsage);
  EXPECT_EQ(run_quiet({"denoise-train", "--prior", "z"}), kUsage);
  EXPECT_EQ(run_quiet({"hypergrad-compare", "--k", "0"}), kUsage);
  EXPECT_EQ(run_quiet({"hypergrad-compare", "--config", scratch("missing.ini")}), kUsage);
  EXPECT_EQ(run_quiet({"--help"}), kOk);
}

TEST(Cli, HypergradCompareScalarTable) {
  const std::string path = scratch("hg.csv");
  ASSERT_EQ(run_quiet({"hypergrad-compare", "--model", "scalar", "--k", "2", "--t", "2", "--out", path}), kOk);
  const std::string csv = slurp(path);
  const auto names = csv_column(csv, 4);
  const auto grads = csv_column(csv, 6);
  ASSERT_EQ(names.size(), 5u);
  const double expected[] = {2.0, 1.96875, 1.5, 1.125, 1.40625};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(std::stod(grads[i]), expected[i], 1e-12) << names[i];
}

TEST(Cli, NeumannOrderZeroEqualsJfb) {
  const std::string path = scratch("hg0.csv");
  ASSERT_EQ(run_quiet({"hypergrad-compare", "--model", "wavelet", "--k", "3", "--t", "2", "--p-neumann",
                       "0", "--out", path}),
            kOk);
  const std::string csv = slurp(path);
  const auto names = csv_column(csv, 4);
  const auto grads = csv_column(csv, 6);
  std::vector<std::string> neumann, jfb;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "neumann") neumann.push_back(grads[i]);
    if (names[i] == "jfb") jfb.push_back(grads[i]);
  }
  EXPECT_FALSE(jfb.empty());
  EXPECT_EQ(neumann, jfb);
}

TEST(Cli, ConfigFileBelowFlags) {
  const std::string cfg = scratch("hg.ini");
  std::ofstream(cfg) << "# settings\nmodel = quadratic\nk = 3\nt = 5\n";
  const std::string a = scratch("a.csv"), b = scratch("b.csv");
  ASSERT_EQ(run_quiet({"hypergrad-compare", "--config", cfg, "--t", "2", "--out", a}), kOk);
  ASSERT_EQ(run_quiet({"hypergrad-compare", "--model", "quadratic", "--k", "3", "--t", "2", "--out", b}), kOk);
  EXPECT_EQ(slurp(a), slurp(b));
  std::ofstream(cfg) << "colour = red\n";
  EXPECT_EQ(run_quiet({"hypergrad-compare", "--config", cfg, "--out", a}), kUsage);
}

TEST(Cli, BoundsCheckDeterministicCsv) {
  const std::string a = scratch("b1.csv"), b = scratch("b2.csv");
  const std::vector<std::string> base{"bounds-check", "--k", "2", "--t-max", "6", "--instances", "6", "--seed", "3"};
  auto with_out = [&](const std::string& p, const std::string& threads) {
    auto v = base;
    v.insert(v.end(), {"--out", p, "--threads", threads});
    return v;
  };
  ASSERT_EQ(run_quiet(with_out(a, "1")), kOk);
  ASSERT_EQ(run_quiet(with_out(b, "3")), kOk);
  const std::string csv = slurp(a);
  EXPECT_EQ(csv, slurp(b));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "instance_id,K,T,delta_K,err_jfb,err_retune,bound_lemma1,bound_th2_term1,bound_th2_term2,"
            "bound_th2_term3,bound_th2_term4,L_theta_hat,slope,r2");
  EXPECT_EQ(csv_column(csv, 0).size(), 36u);
}

TEST(Cli, DenoiseTrainRecordsInnerSteps) {
  TrainOptions o;
  o.size = 16;
  o.n_train = 4;
  o.n_test = 2;
  o.epochs = 1;
  o.threads = 1;
  o.k = 1;
  o.t = 1;
  o.out_dir = scratch("dn11");
  std::ostringstream out, err;
  TrainSummary fast, slow;
  ASSERT_EQ(denoise_train(o, out, err, &fast), kOk);
  o.k = 3;
  o.t = 2;
  o.out_dir = scratch("dn32");
  ASSERT_EQ(denoise_train(o, out, err, &slow), kOk);
  EXPECT_EQ(fast.inner_steps_per_outer_step, 1);
  EXPECT_EQ(slow.inner_steps_per_outer_step, 6);
  EXPECT_EQ(fast.outer_steps, 1);
  for (const char* f : {"history.csv", "summary.csv", "clean.ppm", "observed.ppm", "before.ppm", "after.ppm"}) {
    EXPECT_TRUE(fs::exists(fs::path(o.out_dir) / f)) << f;
  }
  const std::string hist = slurp((fs::path(o.out_dir) / "history.csv").string());
  EXPECT_EQ(hist.substr(0, hist.find('\n')), "outer_step,train_loss,test_psnr_mean,delta_K,wall_ms");
}

TEST(Cli, DeblurWithDiracKernelIsDenoising) {
  const Shape sh{8, 8, 3};
  Vec x(static_cast<Eigen::Index>(sh.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 0.01 * static_cast<double>(i % 17);
  EXPECT_EQ(make_anisotropic_blur(sh, 1).apply(x), x);

  TrainOptions o;
  o.size = 16;
  o.n_train = 4;
  o.n_test = 2;
  o.epochs = 1;
  o.threads = 1;
  o.k = 2;
  o.t = 2;
  o.task = "deblur";
  o.kernel_width = 1;
  o.noise = 0.0;
  o.out_dir = scratch("dirac");
  std::ostringstream out, err;
  TrainSummary s;
  ASSERT_EQ(restore_train(o, out, err, &s), kOk);
  // Without noise and with A = I the A^T y baseline is the clean image itself.
  EXPECT_TRUE(std::isinf(s.input_psnr));
}

TEST(Cli, RestoreTrainDeterministic) {
  TrainOptions o;
  o.size = 16;
  o.n_train = 4;
  o.n_test = 2;
  o.epochs = 1;
  o.k = 2;
  o.t = 2;
  o.keep_prob = 0.5;
  o.threads = 1;
  std::ostringstream out, err;
  o.out_dir = scratch("rt1");
  ASSERT_EQ(restore_train(o, out, err), kOk);
  o.out_dir = scratch("rt2");
  o.threads = 2;
  ASSERT_EQ(restore_train(o, out, err), kOk);
  for (const char* f : {"history.csv", "summary.csv", "after.ppm"}) {
    EXPECT_EQ(slurp(scratch("rt1") + "/" + f), slurp(scratch("rt2") + "/" + f)) << f;
  }
}

}  // namespace
}  // namespace retune::cli
