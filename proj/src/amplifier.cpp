#include "nla/amplifier.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "nla/errors.hpp"
#include "nla/metrics.hpp"

namespace nla {

namespace {

using labels::A;
using labels::A_prime;
using labels::B;
using labels::L;
using labels::V_L;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

/// Coefficients of scale · (1 + (κ/N) a†b†)^N σ(ρ)|0⟩ at |m+k, k, m⟩.
class AmplifiedEpr {
 public:
  AmplifiedEpr(int n_stages, double kappa, double tanh_rho, double scale) : n_(n_stages) {
    if (n_stages < 1) throw std::invalid_argument("stage count must be >= 1");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be finite and >= 0");
    if (!(tanh_rho >= 0.0 && tanh_rho < 1.0)) throw std::invalid_argument("tanh rho must lie in [0, 1)");
    log_prefactor_ = safe_log(scale) + 0.5 * std::log1p(-tanh_rho * tanh_rho);
    log_t_ = safe_log(tanh_rho);
    log_k_ = safe_log(kappa / n_stages);
    kappa_ = kappa;
    tanh_rho_ = tanh_rho;
    scale_ = scale;
  }

  int n() const { return n_; }

  double coef(int m, int k) const {
    if (m > 0 && log_t_ == kNegInf) return 0.0;
    if (k > 0 && log_k_ == kNegInf) return 0.0;
    if (log_prefactor_ == kNegInf) return 0.0;
    const double lc = log_prefactor_ + (m > 0 ? m * log_t_ : 0.0) + log_binomial(n_, k) + (k > 0 ? k * log_k_ : 0.0) +
                      0.5 * (std::lgamma(m + k + 1.0) - std::lgamma(m + 1.0) + std::lgamma(k + 1.0));
    return std::exp(lc);
  }

  double norm_sq() const {
    const double cosh2 = 1.0 / (1.0 - tanh_rho_ * tanh_rho_);
    double sum = 0.0;
    for (int k = 0; k <= n_; ++k) {
      if (k > 0 && kappa_ == 0.0) break;
      const double lt = 2.0 * log_binomial(n_, k) + (k > 0 ? 2.0 * k * log_k_ : 0.0) + 2.0 * std::lgamma(k + 1.0) +
                        k * std::log(cosh2);
      sum += std::exp(lt);
    }
    return scale_ * scale_ * sum;
  }

  /// Population at n_A = level.
  double level_mass(int level) const {
    double s = 0.0;
    for (int k = 0; k <= std::min(n_, level); ++k) {
      const double c = coef(level - k, k);
      s += c * c;
    }
    return s;
  }

 private:
  int n_;
  double log_prefactor_;
  double log_t_;
  double log_k_;
  double kappa_;
  double tanh_rho_;
  double scale_;
};

double branch_scale(int n_stages, const ChannelParams& channel, const NlaParams& nla) {
  const double cosh_rho = 1.0 / std::sqrt(1.0 - nla.tanh_rho() * nla.tanh_rho());
  return cosh_rho / std::cosh(channel.r()) * std::pow((1.0 - nla.eta()) / 2.0, n_stages / 2.0);
}

int pow2(int n) { return 1 << n; }

void check_tail(const PureState& s, double max_tail) {
  if (s.tail_mass() > max_tail)
    throw TruncationError(fmt::format("truncated population {:.3g} exceeds the allowed {:.3g}; raise the cutoff",
                                      s.tail_mass(), max_tail));
}

/// One scissor acting on `input`. The ancilla photon's output becomes `output`.
PureState scissor(PureState s, const ModeLabel& input, const ModeLabel& output, double eta, ScissorClick click,
                  const std::string& tag) {
  const ModeLabel p{"P" + tag};
  const ModeLabel v{"V" + tag};
  const ModeLabel d1{"D1" + tag};
  const ModeLabel d2{"D2" + tag};
  s = append_mode(s, p, 1, 1);
  s = append_mode(s, v, 1, 0);
  s = apply_beamsplitter(s, p, v, eta);
  const int room = s.cutoff(input) + 1;
  s = with_cutoff(s, input, room);
  s = with_cutoff(s, v, room);
  s = apply_beamsplitter(s, input, v, 0.5);
  s = rename_mode(s, input, d1);
  s = rename_mode(s, v, d2);
  if (click == ScissorClick::D1) {
    s = project_fock(project_fock(s, d1, 1), d2, 0);
    s = apply_number_phase(s, p, std::numbers::pi);
  } else {
    s = project_fock(project_fock(s, d1, 0), d2, 1);
  }
  s = scaled(s, -1.0);
  return rename_mode(s, p, output);
}

HeraldedState make_heralded(PureState s, int patterns, int n_stages, const ChannelParams& channel, double eta) {
  const double prob = patterns * s.norm_sq();
  return {std::move(s), prob, patterns, n_stages, channel.r(), channel.lambda(), eta};
}

}  // namespace

PureState lossy_epr_state(const ChannelParams& channel, int cutoff) {
  PureState s = epr_state(channel.chi(), A, A_prime, cutoff);
  s = append_mode(s, V_L, cutoff);
  s = apply_beamsplitter(s, V_L, A_prime, 1.0 - channel.lambda());
  s = rename_mode(s, A_prime, B);
  s = rename_mode(s, V_L, L);
  return permute_modes(s, {A, B, L});
}

HeraldedState single_stage_circuit(const ChannelParams& channel, double eta, const CircuitOptions& options) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("transmissivity eta outside (0, 1)");
  PureState s = lossy_epr_state(channel, options.cutoff);
  s = rename_mode(s, B, "B_in");
  s = scissor(std::move(s), "B_in", B, eta, options.clicks[0], "");
  s = permute_modes(s, {A, B, L});
  check_tail(s, options.max_tail_mass);
  return make_heralded(std::move(s), 2, 1, channel, eta);
}

HeraldedState dual_stage_circuit(const ChannelParams& channel, double eta, const CircuitOptions& options) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("transmissivity eta outside (0, 1)");
  if (options.cutoff > 12)
    std::fprintf(stderr, "warning: dual-stage circuit at cutoff %d needs a large state vector\n", options.cutoff);
  PureState s = lossy_epr_state(channel, options.cutoff);
  const ModeLabel in1{"B1"};
  const ModeLabel in2{"B2"};
  const ModeLabel out1{"O1"};
  const ModeLabel out2{"O2"};
  s = rename_mode(s, B, in1);
  s = append_mode(s, in2, options.cutoff);
  s = apply_beamsplitter(s, in1, in2, 0.5);
  s = scissor(std::move(s), in1, out1, eta, options.clicks[0], "1");
  s = scissor(std::move(s), in2, out2, eta, options.clicks[1], "2");
  s = with_cutoff(s, out1, 2);
  s = with_cutoff(s, out2, 2);
  s = apply_beamsplitter(s, out1, out2, 0.5);
  s = project_fock(s, out1, 0);
  s = rename_mode(s, out2, B);
  s = apply_number_phase(s, B, std::numbers::pi);
  s = permute_modes(s, {A, B, L});
  check_tail(s, options.max_tail_mass);
  return make_heralded(std::move(s), 4, 2, channel, eta);
}

PureState amplified_epr_state(int n_stages, double kappa, double tanh_rho, int cutoff, double scale) {
  const AmplifiedEpr f(n_stages, kappa, tanh_rho, scale);
  if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
  std::vector<Mode> modes{{A, cutoff}, {B, n_stages}, {L, cutoff}};
  const auto dim_b = static_cast<std::size_t>(n_stages + 1);
  const auto dim_l = static_cast<std::size_t>(cutoff + 1);
  std::vector<Complex> amps(static_cast<std::size_t>(cutoff + 1) * dim_b * dim_l);
  double kept = 0.0;
  for (int na = 0; na <= cutoff; ++na) {
    for (int k = 0; k <= std::min(n_stages, na); ++k) {
      const int m = na - k;
      const double c = f.coef(m, k);
      amps[(static_cast<std::size_t>(na) * dim_b + static_cast<std::size_t>(k)) * dim_l + static_cast<std::size_t>(m)] = c;
      kept += c * c;
    }
  }
  const double tail = std::max(0.0, f.norm_sq() - kept);
  return {std::move(modes), std::move(amps), tail};
}

double amplified_epr_norm_sq(int n_stages, double kappa, double tanh_rho, double scale) {
  return AmplifiedEpr(n_stages, kappa, tanh_rho, scale).norm_sq();
}

int amplified_epr_cutoff(int n_stages, double kappa, double tanh_rho, double tail) {
  if (!(tail > 0.0)) throw std::invalid_argument("tail tolerance must be positive");
  const AmplifiedEpr f(n_stages, kappa, tanh_rho, 1.0);
  const double total = f.norm_sq();
  double kept = 0.0;
  for (int level = 0;; ++level) {
    const double mass = f.level_mass(level);
    kept += mass;
    const bool converged = total - kept <= tail * total || (mass == 0.0 && level >= n_stages);
    if (converged) return std::max(level, 1);
    if (level > 10'000'000) throw TruncationError("closed-form branch does not converge");
  }
}

HeraldedState closed_form_state(int n_stages, const ChannelParams& channel, double eta, int cutoff) {
  const NlaParams nla(channel, n_stages, eta);
  const double scale = branch_scale(n_stages, channel, nla);
  PureState s = amplified_epr_state(n_stages, nla.kappa(), nla.tanh_rho(), cutoff, scale);
  return make_heralded(std::move(s), pow2(n_stages), n_stages, channel, eta);
}

HeraldedState closed_form_state_auto(int n_stages, const ChannelParams& channel, double eta, double tail,
                                     int max_cutoff) {
  const NlaParams nla(channel, n_stages, eta);
  const int cutoff = amplified_epr_cutoff(n_stages, nla.kappa(), nla.tanh_rho(), tail);
  if (cutoff > max_cutoff)
    throw TruncationError(fmt::format("closed-form branch needs cutoff {} (limit {})", cutoff, max_cutoff));
  return closed_form_state(n_stages, channel, eta, cutoff);
}

PureState truncated_epr_family(int n_stages, double kappa) {
  if (n_stages < 1) throw std::invalid_argument("stage count must be >= 1");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  const int n = n_stages;
  std::vector<Mode> modes{{A, n}, {B, n}};
  std::vector<Complex> amps(static_cast<std::size_t>((n + 1) * (n + 1)));
  // C(N,k) (κ/N)^k k! on |k,k⟩
  std::vector<double> c(static_cast<std::size_t>(n + 1));
  double norm = 0.0;
  c[0] = 1.0;
  for (int k = 1; k <= n; ++k)
    c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] * (n - k + 1) * (kappa / n);
  for (double v : c) norm += v * v;
  norm = std::sqrt(norm);
  for (int k = 0; k <= n; ++k) amps[static_cast<std::size_t>(k * (n + 2))] = c[static_cast<std::size_t>(k)] / norm;
  return {std::move(modes), std::move(amps)};
}

DistillationResult distill_and_measure(const HeraldedState& heralded) {
  const DensityMatrix rho = partial_trace(heralded.state, {A, B});
  const EprResult eps = epr_criterion(rho, A, B);
  return {eps.eps_b_given_a, eps.eps_a_given_b, purity(rho), heralded.success_prob,
          heralded.r,        heralded.eta,       heralded.n_stages};
}

DistillationResult measure_closed_form(int n_stages, const ChannelParams& channel, double eta) {
  const NlaParams nla(channel, n_stages, eta);
  // Observables are scale-free; the scale only enters Π.
  const AmplifiedEpr f(n_stages, nla.kappa(), nla.tanh_rho(), 1.0);
  const double total = f.norm_sq();
  const int n = n_stages;
  std::vector<double> c(static_cast<std::size_t>(n + 1));
  double norm = 0.0, n_a = 0.0, n_b = 0.0, ab = 0.0, w_sq = 0.0;
  double prev_w = std::numeric_limits<double>::infinity();
  for (int m = 0;; ++m) {
    double w = 0.0;
    for (int k = 0; k <= n; ++k) {
      c[static_cast<std::size_t>(k)] = f.coef(m, k);
      const double p = c[static_cast<std::size_t>(k)] * c[static_cast<std::size_t>(k)];
      w += p;
      n_a += p * (m + k);
      n_b += p * k;
      if (k > 0)
        ab += c[static_cast<std::size_t>(k - 1)] * c[static_cast<std::size_t>(k)] * std::sqrt(static_cast<double>(m + k) * k);
    }
    norm += w;
    w_sq += w * w;
    if (w <= 1e-18 * total && w <= prev_w) break;
    prev_w = w;
    if (m > 10'000'000) throw TruncationError("closed-form branch does not converge");
  }
  n_a /= norm;
  n_b /= norm;
  ab /= norm;
  // Δ²X±_A = 2⟨n_A⟩ + 1, Δ²X±_B = 2⟨n_B⟩ + 1, C± = ±2⟨ab⟩; first moments vanish.
  const double var_a = 2.0 * n_a + 1.0;
  const double var_b = 2.0 * n_b + 1.0;
  const double cov2 = 4.0 * ab * ab;
  const double v_ba = std::max(0.0, var_b - cov2 / var_a);
  const double v_ab = std::max(0.0, var_a - cov2 / var_b);
  const double scale = branch_scale(n_stages, channel, nla);
  return {v_ba * v_ba, v_ab * v_ab, w_sq / (norm * norm), pow2(n_stages) * scale * scale * total,
          channel.r(), eta,         n_stages};
}

}  // namespace nla
