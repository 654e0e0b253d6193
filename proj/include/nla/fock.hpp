#pragma once

// Multimode bosonic states in a truncated Fock basis.
//
// Amplitudes are stored row-major over the mode list: the last mode varies
// fastest. Operations that remove a mode (projection, partial trace) keep the
// remaining modes in their original relative order.

#include <complex>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nla {

using Complex = std::complex<double>;

class ModeLabel {
 public:
  ModeLabel(std::string name);  // NOLINT(google-explicit-constructor)
  ModeLabel(const char* name);  // NOLINT(google-explicit-constructor)

  const std::string& name() const { return name_; }

  friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
  friend auto operator<=>(const ModeLabel&, const ModeLabel&) = default;

 private:
  std::string name_;
};

namespace labels {
inline const ModeLabel A{"A"};
inline const ModeLabel A_prime{"A'"};
inline const ModeLabel B{"B"};
inline const ModeLabel C{"C"};
inline const ModeLabel D{"D"};
inline const ModeLabel L{"L"};
inline const ModeLabel V{"V"};
inline const ModeLabel V_L{"V_L"};
inline const ModeLabel P{"P"};
inline const ModeLabel D1{"D1"};
inline const ModeLabel D2{"D2"};
}  // namespace labels

struct Mode {
  ModeLabel label;
  int cutoff;  // maximum photon number, inclusive

  friend bool operator==(const Mode&, const Mode&) = default;
};

class PureState {
 public:
  /// Throws std::invalid_argument when an invariant is violated: duplicate
  /// labels, cutoff < 1, wrong amplitude count, non-finite amplitudes, or a
  /// squared norm above 1 + 1e-12.
  PureState(std::vector<Mode> modes, std::vector<Complex> amplitudes, double tail_mass = 0.0);

  std::span<const Mode> modes() const { return modes_; }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  std::size_t num_modes() const { return modes_.size(); }
  std::size_t size() const { return amplitudes_.size(); }

  bool has_mode(const ModeLabel& label) const;
  /// Position of `label` in the mode list; throws std::out_of_range if absent.
  std::size_t index_of(const ModeLabel& label) const;
  int cutoff(const ModeLabel& label) const { return modes_[index_of(label)].cutoff; }
  std::vector<std::size_t> strides() const;

  /// Population known to be missing from this state because of Fock
  /// truncation (source tails, beamsplitter clipping, squeezer boundary).
  double tail_mass() const { return tail_mass_; }

  /// Amplitude at an occupation vector given in mode-list order; zero when
  /// any entry exceeds the corresponding cutoff.
  Complex amplitude(std::span<const int> occupation) const;
  double norm_sq() const;

 private:
  std::vector<Mode> modes_;
  std::vector<Complex> amplitudes_;
  double tail_mass_;
};

/// Hermitian operator over a joint truncated Fock basis (same layout as PureState).
///
/// The constructor checks hermiticity (1e-10 entrywise) and the trace range
/// (0, 1 + 1e-10]. Positivity is an O(d^3) check and is exposed separately via
/// min_eigenvalue().
class DensityMatrix {
 public:
  DensityMatrix(std::vector<Mode> modes, Eigen::MatrixXcd matrix);

  std::span<const Mode> modes() const { return modes_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  bool has_mode(const ModeLabel& label) const;
  std::size_t index_of(const ModeLabel& label) const;
  double trace() const;
  double min_eigenvalue() const;

 private:
  std::vector<Mode> modes_;
  Eigen::MatrixXcd matrix_;
};

enum class QuadratureSign { Plus, Minus };

/// One factor X^±_M of a quadrature product, with X^+ = m + m† and X^- = (m − m†)/i.
struct QuadratureFactor {
  ModeLabel mode;
  QuadratureSign sign;
};

/// Normally ordered ladder monomial m†^creation m^annihilation on one mode.
struct LadderPower {
  ModeLabel mode;
  int creation = 0;
  int annihilation = 0;
};

// -- construction ------------------------------------------------------------

PureState vacuum(const std::vector<ModeLabel>& modes, const std::vector<int>& cutoffs);

/// sqrt(1 − χ²) Σ_n χⁿ |n, n⟩ on (m, n), truncated at `cutoff`. The discarded
/// population χ^(2(cutoff+1)) is recorded as tail mass.
PureState epr_state(double chi, const ModeLabel& m, const ModeLabel& n, int cutoff);

/// Tensor product with a fresh mode holding `photons` photons.
PureState append_mode(const PureState& state, const ModeLabel& label, int cutoff, int photons = 0);

// -- unitaries ---------------------------------------------------------------

/// Smallest single-mode cutoff accepted by apply_single_mode_squeeze for |r|.
int squeeze_min_cutoff(double r);

/// exp[r(m² − m†²)/2] on `mode`, realised as the exponential of the truncated
/// generator. Requires |r| ≤ 3 and cutoff ≥ squeeze_min_cutoff(r).
PureState apply_single_mode_squeeze(const PureState& state, const ModeLabel& mode, double r);

/// Two-mode beamsplitter with Heisenberg action
///   m → √t m + √(1−t) n,   n → √t n − √(1−t) m.
/// Output population that would exceed a mode cutoff is dropped and added to
/// the tail mass.
PureState apply_beamsplitter(const PureState& state, const ModeLabel& m, const ModeLabel& n,
                             double transmissivity);

/// Multiplies every amplitude by exp(i·phase·n_mode).
PureState apply_number_phase(const PureState& state, const ModeLabel& mode, double phase);

PureState scaled(const PureState& state, Complex factor);

// -- restructuring -----------------------------------------------------------

/// ⟨n|_mode applied to the state. The squared norm of the result is the
/// probability of the outcome (times the input squared norm).
PureState project_fock(const PureState& state, const ModeLabel& mode, int n);

/// Grows or shrinks a mode's cutoff. Shrinking drops population into the tail mass.
PureState with_cutoff(const PureState& state, const ModeLabel& mode, int cutoff);

PureState rename_mode(const PureState& state, const ModeLabel& from, const ModeLabel& to);

/// Reorders modes; `order` must be a permutation of the state's labels.
PureState permute_modes(const PureState& state, const std::vector<ModeLabel>& order);

// -- reduction and observables -----------------------------------------------

DensityMatrix to_density_matrix(const PureState& state);

/// Reduced state on `keep` (kept modes stay in the input's order).
DensityMatrix partial_trace(const PureState& state, const std::vector<ModeLabel>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<ModeLabel>& keep);

double norm_sq(const PureState& state);

/// Tr(ρ²) / (Tr ρ)², i.e. the purity of the normalised state.
double purity(const DensityMatrix& rho);

/// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩). Modes are matched by label; occupations outside
/// either state's cutoffs contribute zero.
double fidelity(const PureState& a, const PureState& b);

/// Raw ⟨ψ| Π m†^p m^q |ψ⟩ (or Tr ρ Π m†^p m^q); no normalisation. Each mode may
/// appear at most once.
Complex ladder_moment(const PureState& state, std::span<const LadderPower> powers);
Complex ladder_moment(const DensityMatrix& rho, std::span<const LadderPower> powers);

/// Expectation (on the normalised state) of a product of one or two quadrature
/// factors. Products of opposite-sign quadratures on one mode are not
/// Hermitian and are rejected.
double quadrature_moment(const PureState& state, std::span<const QuadratureFactor> factors);
double quadrature_moment(const DensityMatrix& rho, std::span<const QuadratureFactor> factors);

/// One line per amplitude with |a| ≥ 1e-14, "n1,...,nk: re,im", in index order.
std::string to_debug_string(const PureState& state);

}  // namespace nla
