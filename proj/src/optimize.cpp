#include "nla/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "nla/errors.hpp"
#include "nla/metrics.hpp"

namespace nla {

namespace {

constexpr double kGoldenRatio = 0.6180339887498949;

std::optional<double> try_entanglement(double r, double lambda, double pi, int n, Method method) {
  try {
    return entanglement_at(r, lambda, pi, n, method);
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

bool feasible(double r, double lambda, double pi, int n) {
  try {
    (void)eta_from_pi(ChannelParams(r, lambda), n, pi);
    return true;
  } catch (const InfeasibleError&) {
    return false;
  }
}

/// Feasibility boundary between a feasible `in` and an infeasible `out`.
double feasibility_edge(double in, double out, double lambda, double pi, int n) {
  for (int i = 0; i < 200 && std::abs(out - in) > 1e-13 * std::max(1.0, std::abs(in)); ++i) {
    const double mid = 0.5 * (in + out);
    (feasible(mid, lambda, pi, n) ? in : out) = mid;
  }
  return in;
}

void check_inputs(double lambda, double pi, int n) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument(fmt::format("loss lambda = {} outside [0, 1)", lambda));
  if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument(fmt::format("success probability {} outside (0, 1]", pi));
  if (n < 1) throw std::invalid_argument("stage count must be >= 1");
}

struct GridScan {
  std::vector<double> r;
  std::vector<std::optional<double>> eps;
};

GridScan scan(double lambda, double pi, int n, const OptimizeOptions& o) {
  GridScan g;
  g.r = log_grid(o.r_min, o.r_max, o.grid_points);
  g.eps.reserve(g.r.size());
  for (double r : g.r) g.eps.push_back(try_entanglement(r, lambda, pi, n, o.method));
  return g;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) throw std::invalid_argument("log grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / (points - 1);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + step * i);
  g.front() = lo;
  g.back() = hi;
  return g;
}

Minimum golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a > b) std::swap(a, b);
  double c = b - kGoldenRatio * (b - a);
  double d = a + kGoldenRatio * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGoldenRatio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGoldenRatio * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

double eta_from_pi(double r, double lambda, double pi) {
  const ChannelParams ch(r, lambda);
  if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument("success probability must lie in (0, 1]");
  const double t2 = ch.chi() * ch.chi();
  const double c2 = std::cosh(r) * std::cosh(r);
  const double d = 1.0 - lambda * t2;
  // 1 − tanh²r = sech²r
  const double eta = (d - pi * d * d * c2) * c2;
  if (!(eta > 0.0 && eta < 1.0))
    throw InfeasibleError(fmt::format("success probability {} unreachable at r = {}, lambda = {} (eta = {})", pi, r, lambda, eta));
  return eta;
}

double eta_from_pi(const ChannelParams& channel, int n_stages, double pi) {
  if (n_stages == 1) return eta_from_pi(channel.r(), channel.lambda(), pi);
  if (n_stages < 1) throw std::invalid_argument("stage count must be >= 1");
  if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument("success probability must lie in (0, 1]");
  // Π(η) at the open ends of (0, 1).
  double lo = 0.0;
  double hi = 1.0;
  auto prob = [&](double eta) {
    if (eta <= 0.0) return success_prob_nstage(channel, n_stages, std::numeric_limits<double>::min());
    if (eta >= 1.0) return success_prob_nstage(channel, n_stages, 1.0 - std::numeric_limits<double>::epsilon() / 2);
    return success_prob_nstage(channel, n_stages, eta);
  };
  if (!(pi < prob(lo) && pi > prob(hi)))
    throw InfeasibleError(fmt::format("success probability {} unreachable with {} stages at r = {}, lambda = {}", pi,
                                      n_stages, channel.r(), channel.lambda()));
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    (prob(mid) > pi ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double entanglement_at(double r, double lambda, double pi, int n_stages, Method method) {
  check_inputs(lambda, pi, n_stages);
  const ChannelParams ch(r, lambda);
  const double eta = eta_from_pi(ch, n_stages, pi);
  if (r == 0.0) return 1.0;
  if (method == Method::ClosedForm && n_stages == 1) return eps_opt_formula(r, lambda, pi);
  return measure_closed_form(n_stages, ch, eta).eps_b_given_a;
}

DistillationResult evaluate_at(double r, double lambda, double pi, int n_stages, Method method) {
  check_inputs(lambda, pi, n_stages);
  const ChannelParams ch(r, lambda);
  const double eta = eta_from_pi(ch, n_stages, pi);
  DistillationResult out = measure_closed_form(n_stages, ch, eta);
  if (r == 0.0) {
    out.eps_b_given_a = out.eps_a_given_b = out.purity = 1.0;
  } else if (method == Method::ClosedForm && n_stages == 1) {
    out.eps_b_given_a = eps_opt_formula(r, lambda, pi);
  }
  return out;
}

DistillationResult optimize_entanglement(double lambda, double pi, int n_stages, const OptimizeOptions& options) {
  check_inputs(lambda, pi, n_stages);
  const GridScan g = scan(lambda, pi, n_stages, options);
  std::size_t best = g.r.size();
  for (std::size_t i = 0; i < g.r.size(); ++i)
    if (g.eps[i] && (best == g.r.size() || *g.eps[i] < *g.eps[best])) best = i;
  if (best == g.r.size())
    throw InfeasibleError(fmt::format("no r in [{}, {}] reaches success probability {} at lambda = {}", options.r_min,
                                      options.r_max, pi, lambda));

  // Bracket by the neighbouring grid points, stopping at feasibility edges.
  double lo = g.r[best];
  double hi = g.r[best];
  if (best > 0) lo = g.eps[best - 1] ? g.r[best - 1] : feasibility_edge(g.r[best], g.r[best - 1], lambda, pi, n_stages);
  if (best + 1 < g.r.size())
    hi = g.eps[best + 1] ? g.r[best + 1] : feasibility_edge(g.r[best], g.r[best + 1], lambda, pi, n_stages);

  auto objective = [&](double r) {
    const auto e = try_entanglement(r, lambda, pi, n_stages, options.method);
    return e ? *e : std::numeric_limits<double>::infinity();
  };
  Minimum m{g.r[best], *g.eps[best]};
  if (hi > lo) {
    const Minimum refined = golden_section(objective, lo, hi, options.r_tolerance);
    if (refined.f <= m.f) m = refined;
  }
  DistillationResult out = evaluate_at(m.x, lambda, pi, n_stages, options.method);

  if (options.method == Method::Simulate && n_stages <= 2) {
    const double f = validate_with_circuit(out, lambda, options);
    if (f >= 0.0 && f < 1.0 - 1e-8)
      throw std::runtime_error(fmt::format("circuit check failed at the optimum: fidelity {}", f));
  }
  return out;
}

TargetResult purity_for_target_entanglement(double eps_target, double lambda, double pi, int n_stages,
                                            const OptimizeOptions& options) {
  check_inputs(lambda, pi, n_stages);
  const DistillationResult opt = optimize_entanglement(lambda, pi, n_stages, options);
  if (eps_target < opt.eps_b_given_a - 1e-12)
    throw UnachievableError(fmt::format("target {} is below the optimum {} at lambda = {}, success probability {}",
                                        eps_target, opt.eps_b_given_a, lambda, pi));

  std::vector<double> rs{0.0};
  const auto grid = log_grid(options.r_min, options.r_max, options.grid_points);
  rs.insert(rs.end(), grid.begin(), grid.end());
  // The optimum splits the curve into monotone branches.
  rs.push_back(opt.r_opt);
  std::sort(rs.begin(), rs.end());

  std::vector<std::optional<double>> f;
  f.reserve(rs.size());
  for (double r : rs) {
    const auto e = try_entanglement(r, lambda, pi, n_stages, options.method);
    f.push_back(e ? std::optional<double>(*e - eps_target) : std::nullopt);
  }

  std::vector<double> roots;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (!f[i]) continue;
    if (*f[i] == 0.0) {
      roots.push_back(rs[i]);
      continue;
    }
    if (i + 1 >= rs.size() || !f[i + 1] || *f[i + 1] == 0.0) continue;
    if ((*f[i] < 0.0) == (*f[i + 1] < 0.0)) continue;
    double a = rs[i], b = rs[i + 1];
    double fa = *f[i];
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, b); ++it) {
      const double mid = 0.5 * (a + b);
      const auto fm = try_entanglement(mid, lambda, pi, n_stages, options.method);
      if (!fm) break;
      const double v = *fm - eps_target;
      if ((v < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = v;
      } else {
        b = mid;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  if (roots.empty())
    throw UnachievableError(fmt::format("no feasible r gives entanglement {} at lambda = {}, success probability {}",
                                        eps_target, lambda, pi));

  TargetResult out{opt, {}, opt.eps_b_given_a};
  for (double r : roots) out.roots.push_back(evaluate_at(r, lambda, pi, n_stages, options.method));
  out.best = *std::max_element(out.roots.begin(), out.roots.end(),
                               [](const auto& x, const auto& y) { return x.purity < y.purity; });
  return out;
}

double validate_with_circuit(const DistillationResult& point, double lambda, const OptimizeOptions& options) {
  const int n = point.n_stages;
  if (n < 1 || n > 2) return -1.0;
  const ChannelParams ch(point.r_opt, lambda);
  // Source tail χ^(2(c+1)) below 1e-10.
  const double chi = ch.chi();
  int cutoff = 1;
  if (chi > 0.0) cutoff = std::max(1, static_cast<int>(std::ceil(std::log(1e-10) / (2.0 * std::log(chi)))) - 1);
  const int limit = n == 1 ? options.validation_cutoff_1stage : options.validation_cutoff_2stage;
  if (cutoff > limit) return -1.0;
  CircuitOptions co;
  co.cutoff = cutoff;
  co.max_tail_mass = 1e-9;
  const HeraldedState circuit = n == 1 ? single_stage_circuit(ch, point.eta_opt, co) : dual_stage_circuit(ch, point.eta_opt, co);
  const HeraldedState closed = closed_form_state(n, ch, point.eta_opt, cutoff);
  return fidelity(circuit.state, closed.state);
}

StageOptimum best_entanglement_for_stages(int n_stages) {
  if (n_stages < 1) throw std::invalid_argument("stage count must be >= 1");
  auto eps = [&](double kappa) { return epr_criterion(truncated_epr_family(n_stages, kappa), labels::A, labels::B).eps_b_given_a; };
  constexpr int kPoints = 200;
  const double step = kKappaMax / kPoints;
  int best = 1;
  double best_f = eps(step);
  for (int i = 2; i <= kPoints; ++i) {
    const double v = eps(step * i);
    if (v < best_f) {
      best_f = v;
      best = i;
    }
  }
  const double lo = step * (best - 1);
  const double hi = std::min(kKappaMax, step * (best + 1));
  const Minimum m = golden_section(eps, std::max(lo, 1e-12), hi, 1e-10);
  return m.f <= best_f ? StageOptimum{n_stages, m.f, m.x} : StageOptimum{n_stages, best_f, step * best};
}

std::vector<StageOptimum> best_entanglement_vs_stages(int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  std::vector<StageOptimum> out;
  for (int n = 1; n <= n_max; ++n) out.push_back(best_entanglement_for_stages(n));
  return out;
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep has no values");
  bool up = true, down = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    up = up && values[i] > values[i - 1];
    down = down && values[i] < values[i - 1];
  }
  if (values.size() > 1 && !up && !down) throw std::invalid_argument("sweep values must be strictly monotone");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("sweep values must be finite");
}

}  // namespace nla
