#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nla/amplifier.hpp"
#include "nla/analytic.hpp"
#include "nla/errors.hpp"
#include "nla/metrics.hpp"
#include "nla/optimize.hpp"
#include "nla/verify.hpp"

using namespace nla;
using labels::A;
using labels::B;

namespace {

double sech2(double x) { return 1.0 / std::pow(std::cosh(x), 2); }

}  // namespace

TEST(Conversions, LossDecibels) {
  EXPECT_NEAR(loss_from_db(10.0), 0.9, 1e-15);
  EXPECT_NEAR(loss_from_db(0.0), 0.0, 1e-15);
  EXPECT_NEAR(db_from_loss(0.99), 20.0, 1e-12);
  for (double db : {0.5, 3.0, 17.0, 40.0}) EXPECT_NEAR(db_from_loss(loss_from_db(db)), db, 1e-10);
}

TEST(Conversions, SqueezingDecibels) {
  EXPECT_NEAR(r_from_squeezing_db(20.0), std::log(10.0), 1e-14);
  // Squeezed variance e^{−2r} equals 10^{−dB/10}.
  EXPECT_NEAR(std::exp(-2 * r_from_squeezing_db(kRecordSqueezingDb)), std::pow(10.0, -1.27), 1e-14);
  EXPECT_NEAR(squeezing_db_from_r(r_from_squeezing_db(6.0)), 6.0, 1e-12);
}

TEST(Params, DomainChecks) {
  EXPECT_THROW(ChannelParams(-0.1, 0.2), std::invalid_argument);
  EXPECT_THROW(ChannelParams(0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(NlaParams(ChannelParams(0.1, 0.2), 0, 0.5), std::invalid_argument);
  EXPECT_THROW(NlaParams(ChannelParams(0.1, 0.2), 1, 1.0), std::invalid_argument);
}

TEST(Params, DerivedQuantities) {
  const ChannelParams ch(0.5, 0.3);
  const NlaParams p(ch, 2, 0.8);
  EXPECT_NEAR(p.g(), 2.0, 1e-15);
  EXPECT_NEAR(p.kappa(), 2.0 * std::sqrt(0.7) * std::tanh(0.5), 1e-15);
  EXPECT_NEAR(p.tanh_rho(), std::sqrt(0.3) * std::tanh(0.5), 1e-15);
  EXPECT_NEAR(std::tanh(p.rho()), p.tanh_rho(), 1e-15);
  EXPECT_NEAR(p.xi(), std::cosh(p.rho()) / std::cosh(0.5) * 0.1, 1e-15);
}

TEST(EpsNoNla, ZeroLossIsSech2) {
  for (double r : {0.1, 0.6, 1.5}) {
    const auto e = eps_no_nla(ChannelParams(r, 0.0));
    EXPECT_NEAR(e.eps_b_given_a, sech2(2 * r), 1e-14);
    EXPECT_NEAR(e.eps_a_given_b, sech2(2 * r), 1e-14);
  }
}

TEST(EpsNoNla, ZeroSqueezingIsOne) {
  for (double l : {0.0, 0.4, 0.9}) {
    const auto e = eps_no_nla(ChannelParams(0.0, l));
    EXPECT_DOUBLE_EQ(e.eps_b_given_a, 1.0);
    EXPECT_DOUBLE_EQ(e.eps_a_given_b, 1.0);
  }
}

TEST(EpsNoNla, InfiniteSqueezingLimit) {
  EXPECT_NEAR(eps_no_nla(ChannelParams(10.0, 0.4)).eps_b_given_a, 0.16, 1e-8);
  EXPECT_DOUBLE_EQ(eps_infinity(0.0), 0.0);
  EXPECT_DOUBLE_EQ(eps_infinity(0.5), 0.25);
}

TEST(EpsNoNla, MonotoneInSqueezingAndLoss) {
  for (double l : {0.1, 0.5, 0.9}) {
    double prev = 2.0;
    for (double r = 0.05; r < 3.0; r += 0.05) {
      const double e = eps_no_nla(ChannelParams(r, l)).eps_b_given_a;
      EXPECT_LT(e, prev);
      prev = e;
    }
  }
  for (double r : {0.2, 0.8}) {
    double prev = -1.0;
    for (double l = 0.0; l < 0.99; l += 0.03) {
      const double e = eps_no_nla(ChannelParams(r, l)).eps_b_given_a;
      EXPECT_GT(e, prev);
      prev = e;
    }
  }
}

TEST(PurityNoNla, Limits) {
  EXPECT_DOUBLE_EQ(purity_no_nla(ChannelParams(0.7, 0.0)), 1.0);
  EXPECT_DOUBLE_EQ(purity_no_nla(ChannelParams(0.0, 0.6)), 1.0);
}

TEST(PurityTradeoff, BoundaryValues) {
  EXPECT_NEAR(purity_tradeoff(1.0, 0.5), 1.0, 1e-14);
  EXPECT_NEAR(purity_tradeoff(0.25, 0.5), 0.0, 1e-14);
  EXPECT_THROW(purity_tradeoff(0.2, 0.5), UnachievableError);
}

TEST(PurityTradeoff, EliminantOfEntanglementAndPurity) {
  std::mt19937 gen(21);
  std::uniform_real_distribution<double> r(0.01, 2.5), l(0.01, 0.98);
  for (int i = 0; i < 200; ++i) {
    const ChannelParams ch(r(gen), l(gen));
    EXPECT_NEAR(purity_tradeoff(eps_no_nla(ch).eps_b_given_a, ch.lambda()), purity_no_nla(ch), 1e-12);
  }
}

TEST(LossyClosedForms, MatchSimulation) {
  for (double r : {0.2, 0.5, 0.9}) {
    for (double l : {0.1, 0.5, 0.9}) {
      const ChannelParams ch(r, l);
      const PureState s = lossy_epr_state(ch, epr_cutoff_for_tail(ch.chi(), 1e-12));
      const DensityMatrix rho = partial_trace(s, {A, B});
      const auto e = epr_criterion(rho, A, B);
      const auto ref = eps_no_nla(ch);
      EXPECT_NEAR(e.eps_b_given_a, ref.eps_b_given_a, 1e-6) << r << " " << l;
      EXPECT_NEAR(e.eps_a_given_b, ref.eps_a_given_b, 1e-6) << r << " " << l;
      EXPECT_NEAR(purity(rho), purity_no_nla(ch), 1e-6) << r << " " << l;
    }
  }
}

TEST(SuccessProbability, ZeroSqueezing) {
  for (double eta : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(success_prob_1stage(ChannelParams(0.0, 0.3), eta), 1.0 - eta, 1e-15);
    EXPECT_NEAR(success_prob_nstage(ChannelParams(0.0, 0.3), 3, eta), std::pow(1.0 - eta, 3), 1e-15);
  }
}

TEST(SuccessProbability, VanishesAtFullTransmission) {
  EXPECT_LT(success_prob_1stage(ChannelParams(1e-4, 0.3), 1.0 - 1e-9), 1e-7);
}

TEST(SuccessProbability, NStageReducesToSingleStage) {
  std::mt19937 gen(22);
  std::uniform_real_distribution<double> r(0.0, 2.0), l(0.0, 0.99), eta(0.01, 0.99);
  for (int i = 0; i < 100; ++i) {
    const ChannelParams ch(r(gen), l(gen));
    const double e = eta(gen);
    EXPECT_NEAR(success_prob_nstage(ch, 1, e), success_prob_1stage(ch, e), 1e-13);
  }
}

TEST(SuccessProbability, LinearAndDecreasingInEta) {
  const ChannelParams ch(0.7, 0.4);
  const double p0 = success_prob_1stage(ch, 0.2), p1 = success_prob_1stage(ch, 0.5), p2 = success_prob_1stage(ch, 0.8);
  EXPECT_NEAR(p1 - p0, p2 - p1, 1e-14);
  EXPECT_LT(p2, p0);
  for (int n : {2, 3, 5}) {
    double prev = 2.0;
    for (double e = 0.05; e < 1.0; e += 0.05) {
      const double p = success_prob_nstage(ch, n, e);
      EXPECT_LT(p, prev);
      EXPECT_GT(p, 0.0);
      prev = p;
    }
  }
}

TEST(SuccessProbability, MatchesCircuitOnGrid) {
  for (double r : {0.2, 0.5, 0.9}) {
    for (double l : {0.1, 0.5, 0.9}) {
      for (double eta : {0.3, 0.7, 0.95}) {
        const ChannelParams ch(r, l);
        CircuitOptions co;
        co.cutoff = epr_cutoff_for_tail(ch.chi(), 1e-10);
        co.max_tail_mass = 1e-10;
        const HeraldedState h = single_stage_circuit(ch, eta, co);
        EXPECT_NEAR(success_prob_1stage(ch, eta), h.success_prob, 1e-6);
      }
    }
  }
}

TEST(EpsOptFormula, VanishingSqueezingGivesOne) {
  for (double l : {0.2, 0.9})
    for (double pi : {0.1, 1e-3}) EXPECT_NEAR(eps_opt_formula(1e-7, l, pi), 1.0, 1e-6);
}

TEST(EpsOptFormula, LargeLossMinimumAboveSingleStageFloor) {
  const double l = 1.0 - 1e-3, pi = 1e-4;
  double best = 2.0;
  for (double r : log_grid(1e-4, 3.0, 400)) {
    try {
      best = std::min(best, eps_opt_formula(r, l, pi));
    } catch (const InfeasibleError&) {
    }
  }
  EXPECT_GT(best, 0.808);
  EXPECT_LT(best, 1.0);
}

TEST(EpsOptFormula, AgreesWithHeraldedStateAlongConstraint) {
  std::mt19937 gen(23);
  std::uniform_real_distribution<double> r(0.05, 1.0), l(0.0, 0.95);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const double rr = r(gen), ll = l(gen), pi = 0.05;
    double eta;
    try {
      eta = eta_from_pi(rr, ll, pi);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++checked;
    EXPECT_NEAR(eps_opt_formula(rr, ll, pi), measure_closed_form(1, ChannelParams(rr, ll), eta).eps_b_given_a, 1e-10);
  }
  EXPECT_GT(checked, 10);
}

TEST(PurityFormula, LosslessOutputIsPure) {
  for (double r : {0.1, 0.3, 0.6})
    for (double pi : {0.1, 0.01}) {
      try {
        eta_from_pi(r, 0.0, pi);
      } catch (const InfeasibleError&) {
        continue;
      }
      EXPECT_NEAR(purity_formula(r, 0.0, pi), 1.0, 1e-9);
    }
}

TEST(PurityFormula, WithinUnitInterval) {
  for (double r : {0.1, 0.3, 0.6})
    for (double l : {0.2, 0.6})
      for (double pi : {0.1, 0.01}) {
        try {
          eta_from_pi(r, l, pi);
        } catch (const InfeasibleError&) {
          continue;
        }
        const double p = purity_formula(r, l, pi);
        EXPECT_GT(p, 0.0);
        EXPECT_LE(p, 1.0 + 1e-9);
      }
}

TEST(SqueezedMoments, LowOrder) {
  for (double rho : {0.0, 0.3, 1.1}) {
    const double s2 = std::pow(std::sinh(rho), 2);
    EXPECT_NEAR(two_mode_squeezed_moment(rho, 1, 1, 0, 0), s2, 1e-13);
    EXPECT_NEAR(two_mode_squeezed_moment(rho, 0, 0, 1, 1), s2, 1e-13);
    EXPECT_NEAR(two_mode_squeezed_moment(rho, 0, 1, 0, 1), std::sinh(rho) * std::cosh(rho), 1e-13);
    EXPECT_NEAR(two_mode_squeezed_moment(rho, 1, 0, 0, 1), 0.0, 1e-13);
    EXPECT_NEAR(two_mode_squeezed_moment(rho, 0, 0, 0, 0), 1.0, 1e-15);
  }
}

TEST(SqueezedMoments, MatchFockExpectation) {
  const double rho = 0.4;
  const PureState s = epr_state(std::tanh(rho), "M", "N", 70);
  for (int mc = 0; mc <= 2; ++mc)
    for (int ma = 0; ma <= 2; ++ma)
      for (int nc = 0; nc <= 2; ++nc)
        for (int na = 0; na <= 2; ++na) {
          const LadderPower p[] = {{"M", mc, ma}, {"N", nc, na}};
          EXPECT_NEAR(ladder_moment(s, p).real() / s.norm_sq(), two_mode_squeezed_moment(rho, mc, ma, nc, na), 1e-10)
              << mc << ma << nc << na;
        }
}
