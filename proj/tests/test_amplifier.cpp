#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nla/amplifier.hpp"
#include "nla/errors.hpp"
#include "nla/metrics.hpp"
#include "nla/verify.hpp"

using namespace nla;
using labels::A;
using labels::B;
using labels::L;

namespace {

CircuitOptions tail_rule(const ChannelParams& ch, double tail = 1e-12) {
  CircuitOptions co;
  co.cutoff = epr_cutoff_for_tail(ch.chi(), tail);
  co.max_tail_mass = tail;
  return co;
}

Complex amp(const PureState& s, int a, int b, int l) {
  const int occ[] = {a, b, l};
  return s.amplitude(occ);
}

}  // namespace

TEST(LossyEpr, ModesAndNorm) {
  const PureState s = lossy_epr_state(ChannelParams(0.4, 0.3), 20);
  ASSERT_EQ(s.num_modes(), 3u);
  EXPECT_EQ(s.modes()[0].label, A);
  EXPECT_EQ(s.modes()[1].label, B);
  EXPECT_EQ(s.modes()[2].label, L);
  EXPECT_NEAR(norm_sq(s) + s.tail_mass(), 1.0, 1e-13);
}

TEST(SingleStage, VacuumInputReflectsPhoton) {
  for (double eta : {0.2, 0.7}) {
    const HeraldedState h = single_stage_circuit(ChannelParams(0.0, 0.0), eta, {.cutoff = 2});
    EXPECT_NEAR(h.success_prob, 1.0 - eta, 1e-14);
    EXPECT_NEAR(std::abs(amp(h.state, 0, 0, 0)), std::sqrt((1.0 - eta) / 2.0), 1e-14);
    EXPECT_NEAR(norm_sq(h.state), std::norm(amp(h.state, 0, 0, 0)), 1e-14);
  }
}

TEST(SingleStage, MatchesClosedFormAndSuccessProbability) {
  const ChannelParams ch(0.5, 0.3);
  const auto co = tail_rule(ch);
  const HeraldedState h = single_stage_circuit(ch, 0.8, co);
  EXPECT_GE(fidelity(h.state, closed_form_state(1, ch, 0.8, co.cutoff).state), 1.0 - 1e-10);
  EXPECT_NEAR(h.success_prob, success_prob_1stage(ch, 0.8), 1e-10);
  EXPECT_EQ(h.pattern_count, 2);
  EXPECT_NEAR(h.success_prob, h.pattern_count * norm_sq(h.state), 1e-12);
}

TEST(SingleStage, AmplitudesEqualClosedFormBranch) {
  const ChannelParams ch(0.3, 0.6);
  const auto co = tail_rule(ch);
  const PureState c = single_stage_circuit(ch, 0.4, co).state;
  const PureState f = closed_form_state(1, ch, 0.4, co.cutoff).state;
  for (int a = 0; a <= 4; ++a)
    for (int l = 0; l <= 3; ++l)
      for (int b = 0; b <= 1; ++b) EXPECT_NEAR(std::abs(amp(c, a, b, l) - amp(f, a, b, l)), 0.0, 1e-12);
}

TEST(SingleStage, DetectionPatternsAgree) {
  const ChannelParams ch(0.6, 0.2);
  auto co = tail_rule(ch);
  const HeraldedState d1 = single_stage_circuit(ch, 0.4, co);
  co.clicks[0] = ScissorClick::D2;
  const HeraldedState d2 = single_stage_circuit(ch, 0.4, co);
  EXPECT_NEAR(norm_sq(d1.state), norm_sq(d2.state), 1e-14);
  EXPECT_NEAR(fidelity(d1.state, d2.state), 1.0, 1e-13);
}

TEST(SingleStage, TailViolationThrows) {
  EXPECT_THROW(single_stage_circuit(ChannelParams(0.8, 0.3), 0.5, {.cutoff = 5, .max_tail_mass = 1e-8}),
               TruncationError);
}

TEST(SingleStage, GridMatchesClosedForm) {
  for (double r : {0.3, 0.6})
    for (double l : {0.2, 0.6})
      for (double eta : {0.4, 0.8}) {
        const ChannelParams ch(r, l);
        const auto co = tail_rule(ch);
        const HeraldedState h = single_stage_circuit(ch, eta, co);
        EXPECT_GE(fidelity(h.state, closed_form_state(1, ch, eta, co.cutoff).state), 1.0 - 1e-10);
        EXPECT_NEAR(success_prob_1stage(ch, eta), 2.0 * norm_sq(h.state), 1e-10);
      }
}

TEST(DualStage, MatchesClosedForm) {
  const ChannelParams ch(0.3, 0.3);
  const HeraldedState h = dual_stage_circuit(ch, 0.7, {.cutoff = 8, .max_tail_mass = 1e-8});
  EXPECT_GE(fidelity(h.state, closed_form_state(2, ch, 0.7, 8).state), 1.0 - 1e-8);
  EXPECT_EQ(h.pattern_count, 4);
  EXPECT_NEAR(h.success_prob, success_prob_nstage(ch, 2, 0.7), 1e-8);
  EXPECT_NEAR(h.success_prob, h.pattern_count * norm_sq(h.state), 1e-12);
}

TEST(DualStage, VacuumInput) {
  const double eta = 0.6;
  const HeraldedState h = dual_stage_circuit(ChannelParams(0.0, 0.0), eta, {.cutoff = 2});
  EXPECT_NEAR(h.success_prob, (1 - eta) * (1 - eta), 1e-14);
  EXPECT_NEAR(norm_sq(h.state), std::norm(amp(h.state, 0, 0, 0)), 1e-14);
}

TEST(DualStage, AllClickPatternsAgree) {
  const ChannelParams ch(0.2, 0.4);
  const double eta = 0.5;
  CircuitOptions co{.cutoff = 6, .max_tail_mass = 1e-6};
  const HeraldedState ref = dual_stage_circuit(ch, eta, co);
  for (auto c0 : {ScissorClick::D1, ScissorClick::D2})
    for (auto c1 : {ScissorClick::D1, ScissorClick::D2}) {
      co.clicks = {c0, c1};
      const HeraldedState h = dual_stage_circuit(ch, eta, co);
      EXPECT_NEAR(norm_sq(h.state), norm_sq(ref.state), 1e-13);
      EXPECT_NEAR(fidelity(h.state, ref.state), 1.0, 1e-12);
    }
}

TEST(ClosedForm, SingleStageLossless) {
  const ChannelParams ch(0.4, 0.0);
  const double eta = 0.6;
  const NlaParams p(ch, 1, eta);
  const PureState s = closed_form_state(1, ch, eta, 5).state;
  const Complex a0 = amp(s, 0, 0, 0);
  EXPECT_NEAR(std::abs(amp(s, 1, 1, 0) / a0 - p.kappa()), 0.0, 1e-14);
  EXPECT_NEAR(norm_sq(s), std::norm(a0) * (1 + p.kappa() * p.kappa()), 1e-14);
}

TEST(ClosedForm, TwoStageOperatorCoefficients) {
  const double kappa = 0.7;
  const PureState s = amplified_epr_state(2, kappa, 0.0, 4, 1.0 / std::sqrt(amplified_epr_norm_sq(2, kappa, 0.0)));
  const Complex a0 = amp(s, 0, 0, 0);
  EXPECT_NEAR((amp(s, 1, 1, 0) / a0).real(), kappa, 1e-14);
  // a†²b†²|00⟩ = 2|22⟩, so the κ²/4 operator coefficient shows up as κ²/2.
  EXPECT_NEAR((amp(s, 2, 2, 0) / a0).real() / 2.0, kappa * kappa / 4.0, 1e-14);
  EXPECT_NEAR((amp(s, 2, 2, 0) / amp(s, 1, 1, 0)).real() / 2.0, kappa / 4.0, 1e-14);
}

TEST(ClosedForm, NormMatchesAnalyticSum) {
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> k(0.05, 2.0), t(0.0, 0.7);
  for (int n : {1, 2, 3, 5}) {
    const double kappa = k(gen), tr = t(gen);
    const int c = amplified_epr_cutoff(n, kappa, tr, 1e-15);
    const double scale = 0.5 / std::sqrt(amplified_epr_norm_sq(n, kappa, tr));
    EXPECT_NEAR(amplified_epr_norm_sq(n, kappa, tr, scale), 0.25, 1e-14);
    EXPECT_NEAR(norm_sq(amplified_epr_state(n, kappa, tr, c, scale)), 0.25, 1e-14);
  }
}

TEST(ClosedForm, SuccessProbabilityMatchesAnalytic) {
  for (int n : {1, 2, 3}) {
    const ChannelParams ch(0.4, 0.5);
    const HeraldedState h = closed_form_state_auto(n, ch, 0.7);
    EXPECT_EQ(h.pattern_count, 1 << n);
    EXPECT_NEAR(h.success_prob, success_prob_nstage(ch, n, 0.7), 1e-12);
  }
}

TEST(ClosedForm, AutoCutoffRefusesHugeStates) {
  EXPECT_THROW(closed_form_state_auto(1, ChannelParams(2.5, 0.9), 0.5, 1e-13, 20), TruncationError);
  EXPECT_THROW(closed_form_state(0, ChannelParams(0.1, 0.1), 0.5, 5), std::invalid_argument);
}

TEST(ClosedForm, ManyStagesApproachEprState) {
  const double kappa = 0.3;
  const double scale = 1.0 / std::sqrt(amplified_epr_norm_sq(64, kappa, 0.0));
  const PureState s = project_fock(amplified_epr_state(64, kappa, 0.0, 64, scale), L, 0);
  EXPECT_GE(fidelity(s, epr_state(kappa, A, B, 64)), 0.999);
}

TEST(ClosedForm, FidelityWithEprGrowsWithStages) {
  const double kappa = 0.5;
  double prev = 0.0;
  for (int n : {1, 2, 4, 8, 16}) {
    const double f = fidelity(truncated_epr_family(n, kappa), epr_state(kappa, A, B, 40));
    EXPECT_GT(f, prev);
    prev = f;
  }
}

TEST(TruncatedFamily, StageFloorValues) {
  EXPECT_NEAR(epr_criterion(truncated_epr_family(1, 0.36), A, B).eps_b_given_a, 0.81, 0.005);
  EXPECT_NEAR(epr_criterion(truncated_epr_family(2, 0.59), A, B).eps_b_given_a, 0.57, 0.005);
}

TEST(Measure, VacuumBranch) {
  const auto m = measure_closed_form(1, ChannelParams(0.0, 0.4), 0.5);
  EXPECT_NEAR(m.eps_b_given_a, 1.0, 1e-14);
  EXPECT_NEAR(m.purity, 1.0, 1e-14);
}

TEST(Measure, BlockFormMatchesDensePipeline) {
  for (int n : {1, 2, 3})
    for (double r : {0.2, 0.7})
      for (double l : {0.1, 0.6})
        for (double eta : {0.3, 0.8}) {
          const ChannelParams ch(r, l);
          const auto dense = distill_and_measure(closed_form_state_auto(n, ch, eta));
          const auto block = measure_closed_form(n, ch, eta);
          EXPECT_NEAR(dense.eps_b_given_a, block.eps_b_given_a, 1e-9);
          EXPECT_NEAR(dense.eps_a_given_b, block.eps_a_given_b, 1e-9);
          EXPECT_NEAR(dense.purity, block.purity, 1e-9);
          EXPECT_NEAR(dense.success_prob, block.success_prob, 1e-12);
        }
}

TEST(Measure, CircuitAndClosedFormObservablesAgree) {
  const ChannelParams ch(0.5, 0.3);
  const auto co = tail_rule(ch);
  const auto sim = distill_and_measure(single_stage_circuit(ch, 0.8, co));
  const auto cf = measure_closed_form(1, ch, 0.8);
  EXPECT_NEAR(sim.eps_b_given_a, cf.eps_b_given_a, 1e-8);
  EXPECT_NEAR(sim.eps_a_given_b, cf.eps_a_given_b, 1e-8);
  EXPECT_NEAR(sim.purity, cf.purity, 1e-8);
}

TEST(Measure, LosslessOutputIsPure) {
  for (int n : {1, 2, 4}) EXPECT_NEAR(measure_closed_form(n, ChannelParams(0.5, 0.0), 0.6).purity, 1.0, 1e-12);
}

TEST(Measure, HeraldedEntanglementAboveStageFloor) {
  std::mt19937 gen(32);
  std::uniform_real_distribution<double> r(0.01, 2.0), l(0.0, 0.95), eta(0.05, 0.95);
  for (int i = 0; i < 100; ++i) {
    const ChannelParams ch(r(gen), l(gen));
    const double e = eta(gen);
    EXPECT_GT(measure_closed_form(1, ch, e).eps_b_given_a, 0.808);
    EXPECT_GT(measure_closed_form(2, ch, e).eps_b_given_a, 0.5728);
  }
}
