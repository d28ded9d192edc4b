#include "retune_cli/commands.hpp"

#include "retune/bilevel.hpp"
#include "retune/bounds_lab.hpp"
#include "retune/diff.hpp"
#include "retune/instances.hpp"
#include "retune/io.hpp"
#include "retune/random.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

namespace retune::cli {

namespace {

struct InstanceOutcome {
  std::vector<std::vector<std::string>> rows;
  std::optional<std::string> violation;
};

// Square side for n pixels; wavelet levels need a side divisible by 4.
int side_for(int n) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (n <= 0 || side * side != n || side % 4 != 0) {
    throw UsageError("--n must be a square number whose side is a multiple of 4 (e.g. 64)");
  }
  return side;
}

// Least-squares decay rate of ||g^JF - g^R|| over T, ignoring values at rounding level.
RateFit restart_rate(const std::vector<Theorem2Row>& rows) {
  std::vector<double> e, t;
  const double floor = 1e-11 * std::max(rows.front().err_jf_r, 1e-300);
  for (const auto& r : rows) {
    if (r.err_jf_r > floor) {
      e.push_back(r.err_jf_r);
      t.push_back(r.T);
    }
  }
  if (e.size() < 4) return {std::nan(""), std::nan(""), std::nan("")};
  try {
    return rate_fit(e, t);
  } catch (const std::invalid_argument&) {
    return {std::nan(""), std::nan(""), std::nan("")};
  }
}

InstanceOutcome check_instance(const BoundsCheckOptions& opt, int side, int id) {
  WaveletInstanceOptions wopt;
  wopt.shape = Shape{side, side, 1};
  const Instance inst = wavelet_instance(Rng::mix(opt.seed, static_cast<std::uint64_t>(id)), opt.k, 1, wopt);
  const SchemeSpec& spec = inst.spec;
  const Vec x_hat = fixed_point_solve(spec, inst.s, inst.x0, 1e-13).x;
  InstanceOutcome res;
  auto fail = [&](const std::string& what) {
    if (!res.violation) res.violation = "instance " + std::to_string(id) + ": " + what;
  };

  const Lemma1Check l1 = lemma1_bound(spec, inst.s, inst.xbar, x_hat);
  if (!l1.holds(1e-9)) {
    fail("Lemma 1 violated: ||g - g^JF|| = " + format_double(l1.err) + " > " + format_double(l1.bound));
  }

  if (spec.step->state_size() <= 512) {
    const MatrixBoundCheck a1 = lemma_a1_check(dense_state_jacobian(spec, x_hat, inst.s));
    if (!a1.holds(1e-9)) {
      fail("Lemma A.1 violated: ||I - (I - J)^-1|| = " + format_double(a1.lhs) + " > " +
           format_double(a1.bound));
    }
  }

  const SchemeSpec path_spec{spec.step, spec.K, opt.t_max};
  const auto path = restart_path(path_spec, inst.x0, inst.s);
  const double dist0 = (inst.x0 - x_hat).norm();
  for (std::size_t t = 0; t < path.size(); ++t) {
    const double lhs = (path[t] - x_hat).norm();
    const double rhs = std::pow(l1.delta_K, static_cast<double>(t)) * dist0;
    if (lhs > rhs + 1e-9) {
      fail("Theorem 1 violated at t = " + std::to_string(t) + ": " + format_double(lhs) + " > " +
           format_double(rhs));
    }
  }

  std::vector<int> Ts;
  for (int T = 1; T <= opt.t_max; ++T) Ts.push_back(T);
  const Theorem2Report rep = theorem2_report(spec, inst.s, inst.xbar, inst.x0, x_hat, Ts);
  const RateFit fit = restart_rate(rep.rows);
  // delta_K is a worst-case rate: the measured decay may be faster, never markedly slower.
  if (std::isfinite(fit.slope) && fit.r2 >= 0.99 && fit.slope > 0.9 * std::log(rep.delta_K)) {
    fail("restart error decays at rate " + format_double(fit.slope) + ", slower than 0.9 log delta_K = " +
         format_double(0.9 * std::log(rep.delta_K)));
  }
  for (const auto& r : rep.rows) {
    res.rows.push_back({std::to_string(id), std::to_string(opt.k), std::to_string(r.T),
                        format_double(rep.delta_K), format_double(l1.err), format_double(r.err),
                        format_double(l1.bound), format_double(r.term1), format_double(r.term2),
                        format_double(r.term3), format_double(r.term4), format_double(rep.L_theta),
                        format_double(fit.slope), format_double(fit.r2)});
  }
  return res;
}

}  // namespace

int bounds_check(const BoundsCheckOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.instances < 1) throw UsageError("--instances must be >= 1");
  if (opt.k < 1) throw UsageError("--k must be >= 1");
  if (opt.t_max < 1) throw UsageError("--t-max must be >= 1");
  const int side = side_for(opt.n);

  std::vector<InstanceOutcome> results(static_cast<std::size_t>(opt.instances));
  parallel_for(opt.instances, opt.threads,
               [&](int i) { results[static_cast<std::size_t>(i)] = check_instance(opt, side, i); });

  CsvTable table({"instance_id", "K", "T", "delta_K", "err_jfb", "err_retune", "bound_lemma1",
                  "bound_th2_term1", "bound_th2_term2", "bound_th2_term3", "bound_th2_term4",
                  "L_theta_hat", "slope", "r2"});
  std::optional<std::string> first;
  for (const auto& r : results) {
    for (const auto& row : r.rows) table.add_row(row);
    if (r.violation && !first) first = r.violation;
  }
  table.write(opt.out);
  if (first) {
    err << "bounds-check: " << *first << '\n';
    return kAssertionFailed;
  }
  out << "bounds-check: " << opt.instances << " instances, K = " << opt.k << ", T <= " << opt.t_max
      << ": all checks hold; wrote " << opt.out << '\n';
  return kOk;
}

}  // namespace retune::cli
