#pragma once

#include "nla/fock.hpp"

namespace nla {

struct ConditionalVariancePair {
  double v_plus;
  double v_minus;
  double gamma_plus;
  double gamma_minus;
};

/// Reid criterion values. Below 1 signals entanglement.
struct EprResult {
  double eps_b_given_a;
  double eps_a_given_b;
};

/// V± = Δ²X±_target − (C±)² / Δ²X±_conditioner with the minimising gain
/// γ± = C± / Δ²X±_conditioner. C± is the covariance (first moments subtracted).
/// Throws DegenerateConditionerError when a conditioner variance vanishes.
ConditionalVariancePair conditional_variances(const PureState& state, const ModeLabel& target,
                                              const ModeLabel& conditioner);
ConditionalVariancePair conditional_variances(const DensityMatrix& rho, const ModeLabel& target,
                                              const ModeLabel& conditioner);

EprResult epr_criterion(const PureState& state, const ModeLabel& a, const ModeLabel& b);
EprResult epr_criterion(const DensityMatrix& rho, const ModeLabel& a, const ModeLabel& b);

/// Δ²(X_target − γ X_conditioner) for an arbitrary gain γ.
double estimator_variance(const PureState& state, const ModeLabel& target, const ModeLabel& conditioner,
                          QuadratureSign sign, double gamma);

}  // namespace nla
