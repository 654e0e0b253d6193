#pragma once

// Heralded outputs of quantum-scissor amplifiers acting on the B half of a
// lossy EPR pair. States are on modes (A, B, L): A is kept by the sender, B
// is the amplified output and L the environment.

#include <array>

#include "nla/analytic.hpp"
#include "nla/fock.hpp"

namespace nla {

/// Unnormalised heralded branch for one detection pattern.
struct HeraldedState {
  PureState state;
  double success_prob;  // pattern_count × norm_sq(state)
  int pattern_count;
  int n_stages;
  double r;
  double lambda;
  double eta;
};

struct DistillationResult {
  double eps_b_given_a;
  double eps_a_given_b;
  double purity;
  double success_prob;
  double r_opt;
  double eta_opt;
  int n_stages;
};

/// Which scissor detector clicks: D1 = (1, 0), D2 = (0, 1).
enum class ScissorClick { D1, D2 };

struct CircuitOptions {
  int cutoff = 20;
  double max_tail_mass = 1e-8;
  std::array<ScissorClick, 2> clicks{ScissorClick::D1, ScissorClick::D1};
};

/// EPR pair on (A, A′) with A′ sent through a beamsplitter of reflectivity λ;
/// the transmitted part is B and the reflected part L.
PureState lossy_epr_state(const ChannelParams& channel, int cutoff);

/// Full one-scissor circuit with explicit ancillas and detectors.
/// Throws TruncationError when the source tail exceeds options.max_tail_mass.
HeraldedState single_stage_circuit(const ChannelParams& channel, double eta, const CircuitOptions& options = {});

/// Two scissors on a 50:50 split of B, recombined on a 50:50 beamsplitter whose
/// second output is projected on vacuum. Memory grows as cutoff⁶.
HeraldedState dual_stage_circuit(const ChannelParams& channel, double eta, const CircuitOptions& options = {});

/// scale · (1 + (κ/N) a†b†)^N σ_AL(ρ)|0⟩ with tanh ρ given. Cutoffs: A and L at
/// `cutoff`, B at N; only terms with n_A ≤ cutoff are kept.
PureState amplified_epr_state(int n_stages, double kappa, double tanh_rho, int cutoff, double scale = 1.0);

/// Squared norm of amplified_epr_state without truncation.
double amplified_epr_norm_sq(int n_stages, double kappa, double tanh_rho, double scale = 1.0);

/// Smallest A cutoff whose discarded population is at most `tail` (relative).
int amplified_epr_cutoff(int n_stages, double kappa, double tanh_rho, double tail);

/// Closed-form N-stage heralded branch at an explicit cutoff.
HeraldedState closed_form_state(int n_stages, const ChannelParams& channel, double eta, int cutoff);

/// As above with the cutoff chosen so the relative tail is below `tail`.
/// Throws TruncationError when that needs more than `max_cutoff`.
HeraldedState closed_form_state_auto(int n_stages, const ChannelParams& channel, double eta, double tail = 1e-13,
                                     int max_cutoff = 200);

/// (1 + (κ/N) a†b†)^N |00⟩ on (A, B), normalised, cutoff N.
PureState truncated_epr_family(int n_stages, double kappa);

/// Traces out L and evaluates both Reid criteria and the purity of ρ_AB.
DistillationResult distill_and_measure(const HeraldedState& heralded);

/// Same observables as distill_and_measure for the closed-form branch, computed
/// from its block structure: the branch is Σ c_{m,k} |m+k, k, m⟩, so blocks with
/// different m are orthogonal after tracing out L. Exact and O(cutoff·N).
DistillationResult measure_closed_form(int n_stages, const ChannelParams& channel, double eta);

}  // namespace nla
