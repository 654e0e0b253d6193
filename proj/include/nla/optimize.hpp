#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nla/amplifier.hpp"
#include "nla/analytic.hpp"

namespace nla {

enum class Method {
  ClosedForm,  // printed optimised-entanglement expression for N = 1, closed-form state otherwise
  Simulate,    // heralded-state observables, circuit check at the optimum for N ≤ 2
};

struct OptimizeOptions {
  Method method = Method::ClosedForm;
  int grid_points = 200;
  double r_min = 1e-4;
  double r_max = 3.0;
  double r_tolerance = 1e-8;
  /// Largest circuit cutoff used for the check at the optimum (Simulate only).
  int validation_cutoff_1stage = 60;
  int validation_cutoff_2stage = 10;
};

/// Single-stage transmissivity realising success probability Π at (r, λ).
/// Throws InfeasibleError unless the result lies in (0, 1).
double eta_from_pi(double r, double lambda, double pi);

/// N-stage version; closed form for N = 1, bisection otherwise (Π decreases
/// strictly in η).
double eta_from_pi(const ChannelParams& channel, int n_stages, double pi);

/// ε_{B|A} at a fixed r along the constant-Π constraint. Throws InfeasibleError
/// off the feasible set. r = 0 is the vacuum branch (ε = 1).
double entanglement_at(double r, double lambda, double pi, int n_stages, Method method);

/// All observables at a fixed r along the constant-Π constraint.
DistillationResult evaluate_at(double r, double lambda, double pi, int n_stages, Method method);

/// Minimum of ε_{B|A} over r. Throws InfeasibleError when no grid point is feasible.
DistillationResult optimize_entanglement(double lambda, double pi, int n_stages, const OptimizeOptions& options = {});

struct TargetResult {
  DistillationResult best;                // maximal purity among the roots
  std::vector<DistillationResult> roots;  // increasing r
  double eps_opt;
};

/// Operating points with ε_{B|A} = eps_target. Throws UnachievableError when
/// the target is below the optimum or no feasible r reaches it.
TargetResult purity_for_target_entanglement(double eps_target, double lambda, double pi, int n_stages,
                                            const OptimizeOptions& options = {});

/// Fidelity between the circuit branch and the closed form at the optimum, or
/// a negative value when the needed cutoff exceeds the limits in `options`.
double validate_with_circuit(const DistillationResult& point, double lambda, const OptimizeOptions& options = {});

struct StageOptimum {
  int n_stages;
  double eps_best;
  double kappa_best;
};

inline constexpr double kKappaMax = 4.0;

/// Minimum of ε_{B|A} over κ ∈ (0, kKappaMax] for the normalised (1 + κ/N a†b†)^N|00⟩.
StageOptimum best_entanglement_for_stages(int n_stages);
std::vector<StageOptimum> best_entanglement_vs_stages(int n_max);

struct Minimum {
  double x;
  double f;
};

/// Golden-section minimisation of f on [a, b] until the bracket is below tol.
Minimum golden_section(const std::function<double(double)>& f, double a, double b, double tol);

/// Grid of `points` values from lo to hi, equally spaced in log.
std::vector<double> log_grid(double lo, double hi, int points);

struct SweepSpec {
  enum class Axis { LambdaDb, Pi, NStages, EpsTarget };
  Axis axis;
  std::vector<double> values;
  std::map<std::string, double> fixed;

  /// Throws std::invalid_argument unless values are non-empty and strictly monotone.
  void validate() const;
};

}  // namespace nla
