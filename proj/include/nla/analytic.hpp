#pragma once

// Closed-form expressions for the lossy EPR channel and the heralded
// amplifier outputs.

#include <span>

#include "nla/fock.hpp"
#include "nla/metrics.hpp"

namespace nla {

inline constexpr double kRecordSqueezingDb = 12.7;

/// Source squeezing r ≥ 0 and channel-loss reflectivity λ ∈ [0, 1).
class ChannelParams {
 public:
  ChannelParams(double r, double lambda);

  double r() const { return r_; }
  double lambda() const { return lambda_; }
  /// EPR strength χ = tanh r.
  double chi() const;

 private:
  double r_;
  double lambda_;
};

/// Stage count N and scissor transmissivity η, with the derived quantities
/// that parametrise the heralded output.
class NlaParams {
 public:
  NlaParams(const ChannelParams& channel, int n_stages, double eta);

  int n_stages() const { return n_stages_; }
  double eta() const { return eta_; }
  /// Amplitude gain √(η/(1−η)).
  double g() const { return g_; }
  /// g·√(1−λ)·tanh r.
  double kappa() const { return kappa_; }
  /// √λ·tanh r.
  double tanh_rho() const { return tanh_rho_; }
  double rho() const;
  /// (cosh ρ / cosh r)·(1−η)/2, the overall scale of the two-stage branch.
  double xi() const { return xi_; }

 private:
  int n_stages_;
  double eta_;
  double g_;
  double kappa_;
  double tanh_rho_;
  double xi_;
};

double loss_from_db(double db);
double db_from_loss(double lambda);
/// Squeezing in dB to r, so that the squeezed quadrature variance is 10^(−dB/10).
double r_from_squeezing_db(double db);
double squeezing_db_from_r(double r);

/// Reid criterion of the lossy EPR state, both directions.
EprResult eps_no_nla(const ChannelParams& params);

/// Infinite-squeezing limit λ².
double eps_infinity(double lambda);

/// Purity of the lossy EPR state, 1/[1 + λ(cosh 2r − 1)].
double purity_no_nla(const ChannelParams& params);

/// Best purity of a lossy EPR state with ε_{B|A} = eps. Throws
/// UnachievableError for eps < λ².
double purity_tradeoff(double eps, double lambda);

/// Heralding probability of the single-stage amplifier, both detection
/// patterns included.
double success_prob_1stage(const ChannelParams& params, double eta);

/// Heralding probability of the N-stage amplifier, 2^N detection patterns
/// included. Equals success_prob_1stage for N = 1.
double success_prob_nstage(const ChannelParams& params, int n_stages, double eta);

/// Optimised-entanglement integrand at a given r (before minimisation over r).
/// Throws InfeasibleError when a denominator vanishes.
double eps_opt_formula(double r, double lambda, double pi);

/// Purity of the single-stage output at (r, λ, Π).
/// Throws InfeasibleError when the denominator underflows.
double purity_formula(double r, double lambda, double pi);

/// ⟨0| σ†(ρ) Π m†^p m^q σ(ρ) |0⟩ for the two-mode squeezer σ(ρ) acting on (M, N),
/// computed by pushing each ladder operator through σ
///   m → cosh ρ m + sinh ρ n†,   n → cosh ρ n + sinh ρ m†
/// and evaluating the vacuum expectation by Wick pairing. The operator order
/// is m†^{m_cre} m^{m_ann} n†^{n_cre} n^{n_ann}.
double two_mode_squeezed_moment(double rho, int m_cre, int m_ann, int n_cre, int n_ann);

}  // namespace nla
