#include "nla/analytic.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "nla/errors.hpp"

namespace nla {

ChannelParams::ChannelParams(double r, double lambda) : r_(r), lambda_(lambda) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument(fmt::format("squeezing r = {} must be >= 0", r));
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument(fmt::format("loss lambda = {} outside [0, 1)", lambda));
}

double ChannelParams::chi() const { return std::tanh(r_); }

NlaParams::NlaParams(const ChannelParams& channel, int n_stages, double eta) : n_stages_(n_stages), eta_(eta) {
  if (n_stages < 1) throw std::invalid_argument("stage count must be >= 1");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument(fmt::format("transmissivity eta = {} outside (0, 1)", eta));
  g_ = std::sqrt(eta / (1.0 - eta));
  const double t = channel.chi();
  kappa_ = g_ * std::sqrt(1.0 - channel.lambda()) * t;
  tanh_rho_ = std::sqrt(channel.lambda()) * t;
  const double cosh_rho = 1.0 / std::sqrt(1.0 - tanh_rho_ * tanh_rho_);
  xi_ = cosh_rho / std::cosh(channel.r()) * (1.0 - eta) / 2.0;
}

double NlaParams::rho() const { return std::atanh(tanh_rho_); }

double loss_from_db(double db) { return 1.0 - std::pow(10.0, -db / 10.0); }

double db_from_loss(double lambda) { return -10.0 * std::log10(1.0 - lambda); }

double r_from_squeezing_db(double db) { return db * std::log(10.0) / 20.0; }

double squeezing_db_from_r(double r) { return r * 20.0 / std::log(10.0); }

EprResult eps_no_nla(const ChannelParams& params) {
  const double l = params.lambda();
  const double sech2r = 1.0 / std::cosh(2.0 * params.r());
  const double base = l + (1.0 - l) * sech2r;
  const double eps_ba = base * base;
  const double d = 1.0 - l * (1.0 - sech2r);
  return {eps_ba, eps_ba / (d * d)};
}

double eps_infinity(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("loss lambda outside [0, 1)");
  return lambda * lambda;
}

double purity_no_nla(const ChannelParams& params) {
  return 1.0 / (1.0 + params.lambda() * (std::cosh(2.0 * params.r()) - 1.0));
}

double purity_tradeoff(double eps, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("loss lambda outside [0, 1)");
  if (!(eps >= lambda * lambda))
    throw UnachievableError(fmt::format("entanglement {} is below the infinite-squeezing limit {}", eps, lambda * lambda));
  if (eps == lambda * lambda) return 0.0;
  return std::max(0.0, (1.0 - lambda / std::sqrt(eps)) / (1.0 - lambda));
}

double success_prob_1stage(const ChannelParams& params, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument(fmt::format("transmissivity eta = {} outside (0, 1)", eta));
  const double l = params.lambda();
  const double t2 = params.chi() * params.chi();
  const double c = std::cosh(params.r());
  const double d = 1.0 - l * t2;
  return (1.0 - eta + (eta - l) * t2) / (d * d * c * c);
}

double success_prob_nstage(const ChannelParams& params, int n_stages, double eta) {
  if (n_stages < 1) throw std::invalid_argument("stage count must be >= 1");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument(fmt::format("transmissivity eta = {} outside (0, 1)", eta));
  const double l = params.lambda();
  const double t2 = params.chi() * params.chi();
  const double cosh2_rho = 1.0 / (1.0 - l * t2);
  const double x = (1.0 - l) * t2 * cosh2_rho;
  const double c = std::cosh(params.r());
  const int n = n_stages;
  // Σ_k [N!/((N−k)! N^k)]² x^k (1−η)^(N−k) η^k
  double sum = 0.0;
  double falling = 1.0;  // N!/((N−k)! N^k)
  for (int k = 0; k <= n; ++k) {
    if (k > 0) falling *= static_cast<double>(n - k + 1) / n;
    sum += falling * falling * std::pow(x * eta, k) * std::pow(1.0 - eta, n - k);
  }
  return cosh2_rho / (c * c) * sum;
}

double eps_opt_formula(double r, double lambda, double pi) {
  if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument("success probability must lie in (0, 1]");
  const double l = lambda;
  const double P = pi;
  const double ch = std::cosh(r);
  const double sh = std::sinh(r);
  const double th = std::tanh(r);
  const double ch2r = std::cosh(2.0 * r);
  const double ch4r = std::cosh(4.0 * r);
  const double sech = 1.0 / ch;

  const double d1 = (1.0 + l) * P + (1.0 - l) * P * ch2r;
  const double d2 = -4.0 + 3.0 * P + l * (4.0 + 2.0 * P + 3.0 * l * P) + 2.0 * (1.0 - l) * (2.0 + (1.0 - l) * P) * ch2r -
                    (1.0 - l) * (1.0 - l) * P * ch4r - 4.0 * l * l * P * sech * sech;
  if (std::abs(d1) < 1e-300 || std::abs(d2) < 1e-300)
    throw InfeasibleError(fmt::format("optimised-entanglement expression is singular at r = {}", r));

  const double num = 8.0 *
                     (1.0 + P * std::pow(ch, 4) + l * sh * sh + l * l * P * std::pow(sh, 4) -
                      ch * ch * (1.0 + 2.0 * l * P * sh * sh)) *
                     (1.0 + l * th * th);
  const double inner = 1.0 - 2.0 * l + 4.0 / P - 2.0 * (1.0 - l) * ch2r - 8.0 / d1 + num / d2;
  const double v = inner * inner;
  if (!std::isfinite(v)) throw InfeasibleError(fmt::format("optimised-entanglement expression overflows at r = {}", r));
  return v;
}

double purity_formula(double r, double lambda, double pi) {
  if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument("success probability must lie in (0, 1]");
  const double l = lambda;
  const double P = pi;
  const double ch = std::cosh(r);
  const double sh = std::sinh(r);
  const double th = std::tanh(r);
  auto pw = [](double x, int k) { return std::pow(x, k); };

  const double bracket =
      2.0 * sh * sh * (-2.0 * l + pw(l, 3) * pw(th, 4) + l * th * th + 1.0) +
      l * l * P * P * pw(sh, 8) *
          (5.0 * l * l - 8.0 * l + l * l * (2.0 * l * l - 2.0 * l + 1.0) * pw(th, 4) -
           2.0 * l * (3.0 * l * l - 3.0 * l + 1.0) * th * th + 2.0) +
      pw(ch, 4) * (2.0 * P - (4.0 * l * l - 2.0 * l - 1.0) * P * P * pw(sh, 4) - 2.0 * (l - 2.0) * P * sh * sh + 1.0) +
      2.0 * ch * ch *
          (l * (l * l + 2.0 * l - 1.0) * P * P * pw(sh, 6) + (3.0 * l * l - 1.0) * P * pw(sh, 4) +
           (l - 1.0) * (P + 1.0) * sh * sh - 1.0) +
      2.0 * l * P * pw(sh, 6) *
          (l * l - 4.0 * l + l * l * (2.0 * l * l - 2.0 * l + 1.0) * pw(th, 4) -
           (1.0 - 2.0 * l) * (1.0 - 2.0 * l) * l * th * th + 1.0) +
      pw(sh, 4) * (-l * l * (4.0 * P + 1.0) - 2.0 * l + l * l * (2.0 * l * l * (P + 1.0) - 2.0 * l + 1.0) * pw(th, 4) -
                   2.0 * (l - 1.0) * l * l * (P + 1.0) * th * th + 1.0) +
      pw(l * th * th + 1.0, 2) + P * P * pw(ch, 8) - 2.0 * P * pw(ch, 6) * (P * sh * sh + 1.0);
  const double num = (1.0 - l * th * th) * bracket;

  const double inner = l * P * pw(sh, 4) * (-l + (l - 1.0) * l * th * th + 2.0) - ch * ch * ((l + 1.0) * P * sh * sh + 1.0) +
                       sh * sh * ((l - 1.0) * l * th * th + 1.0) + P * pw(ch, 4) + 1.0;
  const double den = pw(l * th * th + 1.0, 3) * inner * inner;
  if (!(std::abs(den) > 1e-300)) throw InfeasibleError(fmt::format("purity expression denominator vanishes at r = {}", r));
  return num / den;
}

namespace {

/// Linear form Σ coefficients over (m, m†, n, n†).
using Linear = std::array<double, 4>;
enum : std::size_t { kM = 0, kMd = 1, kN = 2, kNd = 3 };

/// ⟨0| L_i L_j |0⟩: only annihilators on the left meeting creators on the right survive.
double contraction(const Linear& a, const Linear& b) { return a[kM] * b[kMd] + a[kN] * b[kNd]; }

double wick(const std::vector<Linear>& ops, std::vector<bool>& used) {
  std::size_t first = 0;
  while (first < ops.size() && used[first]) ++first;
  if (first == ops.size()) return 1.0;
  used[first] = true;
  double total = 0.0;
  for (std::size_t j = first + 1; j < ops.size(); ++j) {
    if (used[j]) continue;
    const double c = contraction(ops[first], ops[j]);
    if (c == 0.0) continue;
    used[j] = true;
    total += c * wick(ops, used);
    used[j] = false;
  }
  used[first] = false;
  return total;
}

}  // namespace

double two_mode_squeezed_moment(double rho, int m_cre, int m_ann, int n_cre, int n_ann) {
  if (m_cre < 0 || m_ann < 0 || n_cre < 0 || n_ann < 0) throw std::invalid_argument("negative ladder power");
  const double c = std::cosh(rho);
  const double s = std::sinh(rho);
  const Linear m{c, 0.0, 0.0, s};
  const Linear md{0.0, c, s, 0.0};
  const Linear n{0.0, s, c, 0.0};
  const Linear nd{s, 0.0, 0.0, c};
  std::vector<Linear> ops;
  ops.insert(ops.end(), static_cast<std::size_t>(m_cre), md);
  ops.insert(ops.end(), static_cast<std::size_t>(m_ann), m);
  ops.insert(ops.end(), static_cast<std::size_t>(n_cre), nd);
  ops.insert(ops.end(), static_cast<std::size_t>(n_ann), n);
  if (ops.size() % 2 != 0) return 0.0;
  std::vector<bool> used(ops.size(), false);
  return wick(ops, used);
}

}  // namespace nla
