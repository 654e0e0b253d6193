#include "nla/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "nla/errors.hpp"

namespace nla {

namespace {

struct SecondMoments {
  double var_target;
  double var_conditioner;
  double covariance;
};

template <class State>
SecondMoments second_moments(const State& s, const ModeLabel& target, const ModeLabel& conditioner,
                             QuadratureSign sign) {
  if (target == conditioner) throw std::invalid_argument("target and conditioner must be different modes");
  const QuadratureFactor t{target, sign};
  const QuadratureFactor c{conditioner, sign};
  const QuadratureFactor tt[] = {t, t};
  const QuadratureFactor cc[] = {c, c};
  const QuadratureFactor tc[] = {t, c};
  const QuadratureFactor t1[] = {t};
  const QuadratureFactor c1[] = {c};
  const double mt = quadrature_moment(s, t1);
  const double mc = quadrature_moment(s, c1);
  return {quadrature_moment(s, tt) - mt * mt, quadrature_moment(s, cc) - mc * mc, quadrature_moment(s, tc) - mt * mc};
}

template <class State>
ConditionalVariancePair conditional_impl(const State& s, const ModeLabel& target, const ModeLabel& conditioner) {
  ConditionalVariancePair out{};
  for (auto sign : {QuadratureSign::Plus, QuadratureSign::Minus}) {
    const auto m = second_moments(s, target, conditioner, sign);
    if (!(m.var_conditioner > 1e-14))
      throw DegenerateConditionerError("conditioner quadrature variance vanishes on mode '" + conditioner.name() + "'");
    const double gamma = m.covariance / m.var_conditioner;
    const double v = std::max(0.0, m.var_target - m.covariance * m.covariance / m.var_conditioner);
    if (sign == QuadratureSign::Plus) {
      out.v_plus = v;
      out.gamma_plus = gamma;
    } else {
      out.v_minus = v;
      out.gamma_minus = gamma;
    }
  }
  return out;
}

template <class State>
EprResult epr_impl(const State& s, const ModeLabel& a, const ModeLabel& b) {
  const auto ba = conditional_impl(s, b, a);
  const auto ab = conditional_impl(s, a, b);
  return {ba.v_plus * ba.v_minus, ab.v_plus * ab.v_minus};
}

}  // namespace

ConditionalVariancePair conditional_variances(const PureState& state, const ModeLabel& target,
                                              const ModeLabel& conditioner) {
  return conditional_impl(state, target, conditioner);
}

ConditionalVariancePair conditional_variances(const DensityMatrix& rho, const ModeLabel& target,
                                              const ModeLabel& conditioner) {
  return conditional_impl(rho, target, conditioner);
}

EprResult epr_criterion(const PureState& state, const ModeLabel& a, const ModeLabel& b) {
  return epr_impl(state, a, b);
}

EprResult epr_criterion(const DensityMatrix& rho, const ModeLabel& a, const ModeLabel& b) {
  return epr_impl(rho, a, b);
}

double estimator_variance(const PureState& state, const ModeLabel& target, const ModeLabel& conditioner,
                          QuadratureSign sign, double gamma) {
  const auto m = second_moments(state, target, conditioner, sign);
  return m.var_target - 2.0 * gamma * m.covariance + gamma * gamma * m.var_conditioner;
}

}  // namespace nla
