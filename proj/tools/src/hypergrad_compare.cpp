#include "retune_cli/commands.hpp"

#include "retune/bounds_lab.hpp"
#include "retune/instances.hpp"
#include "retune/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace retune::cli {

namespace {

Instance make_instance(const HypergradCompareOptions& opt) {
  if (opt.model == "scalar") return scalar_instance(opt.k, opt.t);
  if (opt.model == "quadratic") return quadratic_instance(opt.seed, 16, 3, opt.k, opt.t);
  if (opt.model == "wavelet") return wavelet_instance(opt.seed, opt.k, opt.t);
  throw UsageError("--model must be one of scalar, quadratic, wavelet");
}

std::string fixed(double v, int prec = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

}  // namespace

int hypergrad_compare(const HypergradCompareOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.k < 1 || opt.t < 1) throw UsageError("--k and --t must be >= 1");
  if (opt.p_neumann < 0) throw UsageError("--p-neumann must be >= 0");
  const Instance inst = make_instance(opt);
  if (inst.spec.step->state_size() > 512) {
    throw UsageError("DEQ-exact needs a dense Jacobian; state size " +
                     std::to_string(inst.spec.step->state_size()) + " exceeds 512");
  }
  const double tol = opt.model == "scalar" ? 1e-15 : 1e-13;
  const HypergradReport rep =
      hypergrad_report(inst.spec, inst.s, inst.xbar, inst.x0, opt.p_neumann, {}, tol);
  const double delta = certificate(inst.spec, inst.s).delta_K;
  const double bound_neumann = rep.bound_lemma1 * std::pow(delta, opt.p_neumann);
  const double nan = std::nan("");

  struct Entry {
    const char* name;
    const Vec* grad;
    double err;
    double bound;
  };
  const double err_trunc =
      (rep.g_deq.implicit_theta(inst.s) - rep.g_trunc.implicit_theta(inst.s)).norm();
  const Entry entries[] = {
      {"deq", &rep.theta_deq, 0.0, nan},
      {"neumann", &rep.theta_neumann, rep.err_neumann, bound_neumann},
      {"jfb", &rep.theta_jfb, rep.err_jfb, rep.bound_lemma1},
      {"trunc", &rep.theta_trunc, err_trunc, nan},
      {"retune", &rep.theta_retune, rep.err_retune, rep.bound_theorem2},
  };

  CsvTable table({"model", "K", "T", "P", "estimator", "param", "grad_theta", "err_implicit", "bound"});
  out << "model " << opt.model << ", K = " << opt.k << ", T = " << opt.t << ", P = " << opt.p_neumann
      << ", delta_K = " << fixed(delta) << '\n';
  out << "estimator  err_implicit      bound             grad_theta\n";
  for (const Entry& e : entries) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10s %-17s %-17s", e.name, fixed(e.err).c_str(),
                  std::isnan(e.bound) ? "-" : fixed(e.bound).c_str());
    out << line;
    for (Eigen::Index i = 0; i < e.grad->size(); ++i) {
      out << (i ? " " : "") << fixed((*e.grad)[i]);
      table.add_row({opt.model, std::to_string(opt.k), std::to_string(opt.t),
                     std::to_string(opt.p_neumann), e.name, std::to_string(i),
                     format_double((*e.grad)[i]), format_double(e.err), format_double(e.bound)});
    }
    out << '\n';
  }
  table.write(opt.out);

  const double slack = 1e-9;
  if (rep.err_jfb > rep.bound_lemma1 * (1 + slack) + 1e-12) {
    err << "hypergrad-compare: JFB error " << format_double(rep.err_jfb) << " exceeds its bound "
        << format_double(rep.bound_lemma1) << '\n';
    return kAssertionFailed;
  }
  if (rep.err_neumann > bound_neumann * (1 + slack) + 1e-12) {
    err << "hypergrad-compare: Neumann error " << format_double(rep.err_neumann)
        << " exceeds its bound " << format_double(bound_neumann) << '\n';
    return kAssertionFailed;
  }
  return kOk;
}

}  // namespace retune::cli
