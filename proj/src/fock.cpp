#include "nla/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "nla/errors.hpp"
#include "nla/format.hpp"

namespace nla {

namespace {

constexpr double kNormSlack = 1e-12;

std::vector<std::size_t> strides_of(std::span<const Mode> modes) {
  std::vector<std::size_t> s(modes.size());
  std::size_t acc = 1;
  for (std::size_t i = modes.size(); i-- > 0;) {
    s[i] = acc;
    acc *= static_cast<std::size_t>(modes[i].cutoff + 1);
  }
  return s;
}

std::size_t total_size(std::span<const Mode> modes) {
  std::size_t n = 1;
  for (const auto& m : modes) n *= static_cast<std::size_t>(m.cutoff + 1);
  return n;
}

int occupation_of(std::size_t index, std::size_t stride, int cutoff) {
  return static_cast<int>((index / stride) % static_cast<std::size_t>(cutoff + 1));
}

std::size_t find_mode(std::span<const Mode> modes, const ModeLabel& label) {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].label == label) return i;
  throw std::out_of_range("mode '" + label.name() + "' is not part of the state");
}

/// Offsets of all basis states whose occupation is zero in every mode of `skip`.
std::vector<std::size_t> base_offsets(std::span<const Mode> modes, const std::vector<std::size_t>& strides,
                                      const std::vector<std::size_t>& skip) {
  std::vector<std::size_t> out;
  const std::size_t n = total_size(modes);
  for (std::size_t i = 0; i < n; ++i) {
    bool zero = true;
    for (auto k : skip) {
      if (occupation_of(i, strides[k], modes[k].cutoff) != 0) {
        zero = false;
        break;
      }
    }
    if (zero) out.push_back(i);
  }
  return out;
}

/// √(n!/(n−k)!) for n ≥ k.
double falling_sqrt(int n, int k) {
  double v = 1.0;
  for (int j = 0; j < k; ++j) v *= std::sqrt(static_cast<double>(n - j));
  return v;
}

/// Applies Π m^power (lowering only) to an amplitude array.
std::vector<Complex> lowered(std::span<const Complex> amps, std::span<const Mode> modes,
                             const std::vector<std::size_t>& strides, std::size_t mode, int power) {
  if (power == 0) return {amps.begin(), amps.end()};
  std::vector<Complex> out(amps.size());
  const int cut = modes[mode].cutoff;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const int n = occupation_of(i, strides[mode], cut);
    if (n < power || amps[i] == Complex{}) continue;
    out[i - static_cast<std::size_t>(power) * strides[mode]] = amps[i] * falling_sqrt(n, power);
  }
  return out;
}

void check_distinct(std::span<const LadderPower> powers) {
  std::set<ModeLabel> seen;
  for (const auto& p : powers) {
    if (p.creation < 0 || p.annihilation < 0) throw std::invalid_argument("negative ladder power");
    if (!seen.insert(p.mode).second)
      throw std::invalid_argument("ladder powers must name distinct modes (got '" + p.mode.name() + "' twice)");
  }
}

/// Linear ladder form α·m + β·m† for a quadrature.
struct LinearForm {
  Complex annihilation;
  Complex creation;
};

LinearForm quadrature_form(QuadratureSign sign) {
  if (sign == QuadratureSign::Plus) return {1.0, 1.0};
  return {Complex{0.0, -1.0}, Complex{0.0, 1.0}};
}

/// Expands a one- or two-factor quadrature product into normally ordered
/// monomials and evaluates them with `moment`.
template <class MomentFn>
Complex expand_quadrature(std::span<const QuadratureFactor> factors, MomentFn&& moment) {
  if (factors.empty() || factors.size() > 2)
    throw std::invalid_argument("quadrature product must have one or two factors");
  if (factors.size() == 1) {
    const auto f = quadrature_form(factors[0].sign);
    const LadderPower ann[] = {{factors[0].mode, 0, 1}};
    const LadderPower cre[] = {{factors[0].mode, 1, 0}};
    return f.annihilation * moment(std::span<const LadderPower>(ann)) + f.creation * moment(std::span<const LadderPower>(cre));
  }
  const auto f1 = quadrature_form(factors[0].sign);
  const auto f2 = quadrature_form(factors[1].sign);
  if (factors[0].mode == factors[1].mode) {
    if (factors[0].sign != factors[1].sign)
      throw std::invalid_argument("X+X- on a single mode is not Hermitian");
    const ModeLabel& m = factors[0].mode;
    const LadderPower mm[] = {{m, 0, 2}};
    const LadderPower dd[] = {{m, 2, 0}};
    const LadderPower dm[] = {{m, 1, 1}};
    // (a1 m + c1 m†)(a2 m + c2 m†) with m m† = m† m + 1
    const Complex n = moment(std::span<const LadderPower>(dm));
    const Complex one = moment(std::span<const LadderPower>{});
    return f1.annihilation * f2.annihilation * moment(std::span<const LadderPower>(mm)) +
           f1.creation * f2.creation * moment(std::span<const LadderPower>(dd)) +
           f1.annihilation * f2.creation * (n + one) + f1.creation * f2.annihilation * n;
  }
  const ModeLabel& m = factors[0].mode;
  const ModeLabel& k = factors[1].mode;
  Complex total{};
  const std::pair<Complex, std::pair<int, int>> t1[] = {{f1.annihilation, {0, 1}}, {f1.creation, {1, 0}}};
  const std::pair<Complex, std::pair<int, int>> t2[] = {{f2.annihilation, {0, 1}}, {f2.creation, {1, 0}}};
  for (const auto& [c1, p1] : t1) {
    for (const auto& [c2, p2] : t2) {
      const LadderPower pw[] = {{m, p1.first, p1.second}, {k, p2.first, p2.second}};
      total += c1 * c2 * moment(std::span<const LadderPower>(pw));
    }
  }
  return total;
}

/// Per-photon-number blocks of the two-mode beamsplitter. blocks[N](k, p) is
/// the amplitude of |k, N−k⟩ in U|p, N−p⟩, built by adding one photon at a time:
///   U m† U† = √t m† − √(1−t) n†,   U n† U† = √(1−t) m† + √t n†.
std::vector<Eigen::MatrixXd> beamsplitter_blocks(int max_total, double t) {
  const double c = std::sqrt(t);
  const double s = std::sqrt(1.0 - t);
  std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(max_total + 1));
  blocks[0] = Eigen::MatrixXd::Ones(1, 1);
  for (int N = 1; N <= max_total; ++N) {
    const auto& prev = blocks[static_cast<std::size_t>(N - 1)];
    Eigen::MatrixXd cur = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int p = 0; p <= N; ++p) {
      // Source column in block N−1 and the creation operator to apply.
      const bool add_m = p > 0;
      const int src = add_m ? p - 1 : 0;
      const double norm = 1.0 / std::sqrt(static_cast<double>(add_m ? p : N - p));
      const double cm = add_m ? c : s;
      const double cn = add_m ? -s : c;
      for (int k = 0; k <= N - 1; ++k) {
        const double v = prev(k, src);
        if (v == 0.0) continue;
        cur(k + 1, p) += cm * std::sqrt(static_cast<double>(k + 1)) * v * norm;
        cur(k, p) += cn * std::sqrt(static_cast<double>(N - k)) * v * norm;
      }
    }
    blocks[static_cast<std::size_t>(N)] = std::move(cur);
  }
  return blocks;
}

/// Applies a single-mode operator (given in the truncated basis) to `mode`.
/// Returns the population left in the top two levels, a proxy for boundary effects.
double apply_single_mode(std::vector<Complex>& amps, std::span<const Mode> modes,
                         const std::vector<std::size_t>& strides, std::size_t mode, const Eigen::MatrixXd& op) {
  const int dim = modes[mode].cutoff + 1;
  const auto bases = base_offsets(modes, strides, {mode});
  Eigen::VectorXcd in(dim);
  double edge = 0.0;
  for (auto b : bases) {
    for (int n = 0; n < dim; ++n) in(n) = amps[b + static_cast<std::size_t>(n) * strides[mode]];
    const Eigen::VectorXcd out = op * in;
    for (int n = 0; n < dim; ++n) {
      amps[b + static_cast<std::size_t>(n) * strides[mode]] = out(n);
      if (n >= dim - 2) edge += std::norm(out(n));
    }
  }
  return edge;
}

Eigen::MatrixXd expm_scaling_squaring(const Eigen::MatrixXd& g) {
  const double norm1 = g.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Eigen::MatrixXd a = g / std::ldexp(1.0, squarings);
  const auto n = g.rows();
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace

// -- ModeLabel ----------------------------------------------------------------

ModeLabel::ModeLabel(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw std::invalid_argument("mode label must be non-empty");
}

ModeLabel::ModeLabel(const char* name) : ModeLabel(std::string(name)) {}

// -- PureState ----------------------------------------------------------------

PureState::PureState(std::vector<Mode> modes, std::vector<Complex> amplitudes, double tail_mass)
    : modes_(std::move(modes)), amplitudes_(std::move(amplitudes)), tail_mass_(tail_mass) {
  std::set<ModeLabel> seen;
  for (const auto& m : modes_) {
    if (m.cutoff < 1) throw std::invalid_argument("cutoff of mode '" + m.label.name() + "' must be >= 1");
    if (!seen.insert(m.label).second) throw std::invalid_argument("duplicate mode label '" + m.label.name() + "'");
  }
  if (amplitudes_.size() != total_size(modes_))
    throw std::invalid_argument("amplitude count does not match the product of (cutoff+1)");
  double n = 0.0;
  for (const auto& a : amplitudes_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw std::invalid_argument("non-finite amplitude");
    n += std::norm(a);
  }
  if (n > 1.0 + kNormSlack) throw std::invalid_argument(fmt::format("squared norm {} exceeds 1", n));
  if (!(tail_mass_ >= 0.0)) throw std::invalid_argument("tail mass must be non-negative");
}

bool PureState::has_mode(const ModeLabel& label) const {
  return std::any_of(modes_.begin(), modes_.end(), [&](const Mode& m) { return m.label == label; });
}

std::size_t PureState::index_of(const ModeLabel& label) const { return find_mode(modes_, label); }

std::vector<std::size_t> PureState::strides() const { return strides_of(modes_); }

Complex PureState::amplitude(std::span<const int> occupation) const {
  if (occupation.size() != modes_.size()) throw std::invalid_argument("occupation length mismatch");
  const auto s = strides();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (occupation[i] < 0 || occupation[i] > modes_[i].cutoff) return {};
    idx += static_cast<std::size_t>(occupation[i]) * s[i];
  }
  return amplitudes_[idx];
}

double PureState::norm_sq() const {
  double n = 0.0;
  for (const auto& a : amplitudes_) n += std::norm(a);
  return n;
}

// -- DensityMatrix ------------------------------------------------------------

DensityMatrix::DensityMatrix(std::vector<Mode> modes, Eigen::MatrixXcd matrix)
    : modes_(std::move(modes)), matrix_(std::move(matrix)) {
  std::set<ModeLabel> seen;
  for (const auto& m : modes_) {
    if (m.cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
    if (!seen.insert(m.label).second) throw std::invalid_argument("duplicate mode label '" + m.label.name() + "'");
  }
  const auto d = static_cast<Eigen::Index>(total_size(modes_));
  if (matrix_.rows() != d || matrix_.cols() != d) throw std::invalid_argument("density matrix dimension mismatch");
  if (!matrix_.allFinite()) throw std::invalid_argument("non-finite density matrix entry");
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("density matrix is not Hermitian");
  const double tr = trace();
  if (!(tr > 0.0) || tr > 1.0 + 1e-10) throw std::invalid_argument(fmt::format("density matrix trace {} outside (0, 1]", tr));
}

bool DensityMatrix::has_mode(const ModeLabel& label) const {
  return std::any_of(modes_.begin(), modes_.end(), [&](const Mode& m) { return m.label == label; });
}

std::size_t DensityMatrix::index_of(const ModeLabel& label) const { return find_mode(modes_, label); }

double DensityMatrix::trace() const { return matrix_.trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// -- construction -------------------------------------------------------------

PureState vacuum(const std::vector<ModeLabel>& modes, const std::vector<int>& cutoffs) {
  if (modes.empty()) throw std::invalid_argument("vacuum needs at least one mode");
  if (modes.size() != cutoffs.size()) throw std::invalid_argument("one cutoff per mode required");
  std::vector<Mode> ms;
  for (std::size_t i = 0; i < modes.size(); ++i) ms.push_back({modes[i], cutoffs[i]});
  std::vector<Complex> amps(total_size(ms));
  amps[0] = 1.0;
  return {std::move(ms), std::move(amps)};
}

PureState epr_state(double chi, const ModeLabel& m, const ModeLabel& n, int cutoff) {
  if (!(chi >= 0.0) || !(chi < 1.0)) throw std::invalid_argument("EPR strength chi must lie in [0, 1)");
  if (m == n) throw std::invalid_argument("EPR modes must differ");
  if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
  std::vector<Mode> ms{{m, cutoff}, {n, cutoff}};
  std::vector<Complex> amps(total_size(ms));
  const double norm = std::sqrt(1.0 - chi * chi);
  double power = 1.0;
  for (int k = 0; k <= cutoff; ++k) {
    amps[static_cast<std::size_t>(k) * static_cast<std::size_t>(cutoff + 2)] = norm * power;
    power *= chi;
  }
  const double tail = std::pow(chi, 2.0 * (cutoff + 1));
  return {std::move(ms), std::move(amps), tail};
}

PureState append_mode(const PureState& state, const ModeLabel& label, int cutoff, int photons) {
  if (state.has_mode(label)) throw std::invalid_argument("mode '" + label.name() + "' already present");
  if (photons < 0 || photons > cutoff) throw std::invalid_argument("photon number outside the new mode's cutoff");
  std::vector<Mode> ms(state.modes().begin(), state.modes().end());
  ms.push_back({label, cutoff});
  std::vector<Complex> amps(total_size(ms));
  const auto dim = static_cast<std::size_t>(cutoff + 1);
  const auto src = state.amplitudes();
  for (std::size_t i = 0; i < src.size(); ++i) amps[i * dim + static_cast<std::size_t>(photons)] = src[i];
  return {std::move(ms), std::move(amps), state.tail_mass()};
}

// -- unitaries ----------------------------------------------------------------

int squeeze_min_cutoff(double r) { return 10 + static_cast<int>(std::ceil(8.0 * std::exp(2.0 * std::abs(r)))); }

PureState apply_single_mode_squeeze(const PureState& state, const ModeLabel& mode, double r) {
  if (!(std::abs(r) <= 3.0)) throw std::invalid_argument("squeezing parameter outside |r| <= 3");
  const std::size_t k = state.index_of(mode);
  const int cut = state.modes()[k].cutoff;
  if (r == 0.0) return state;
  if (cut < squeeze_min_cutoff(r))
    throw TruncationError(fmt::format("cutoff {} too small for squeezing r = {} (need {})", cut, r, squeeze_min_cutoff(r)));
  // Generator r(m² − m†²)/2 is real antisymmetric in the Fock basis.
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(cut + 1, cut + 1);
  for (int n = 2; n <= cut; ++n) {
    const double e = 0.5 * r * std::sqrt(static_cast<double>(n) * (n - 1));
    gen(n - 2, n) += e;
    gen(n, n - 2) -= e;
  }
  const Eigen::MatrixXd op = expm_scaling_squaring(gen);
  std::vector<Complex> amps(state.amplitudes().begin(), state.amplitudes().end());
  const double edge = apply_single_mode(amps, state.modes(), state.strides(), k, op);
  return {std::vector<Mode>(state.modes().begin(), state.modes().end()), std::move(amps), state.tail_mass() + edge};
}

PureState apply_beamsplitter(const PureState& state, const ModeLabel& m, const ModeLabel& n, double transmissivity) {
  if (m == n) throw std::invalid_argument("beamsplitter needs two distinct modes");
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
    throw std::invalid_argument("transmissivity must lie in [0, 1]");
  const std::size_t im = state.index_of(m);
  const std::size_t in = state.index_of(n);
  if (transmissivity == 1.0) return state;

  const auto modes = state.modes();
  const auto strides = state.strides();
  const int cm = modes[im].cutoff;
  const int cn = modes[in].cutoff;
  const auto blocks = beamsplitter_blocks(cm + cn, transmissivity);
  const auto src = state.amplitudes();
  std::vector<Complex> out(src.size());
  double clipped = 0.0;

  for (auto base : base_offsets(modes, strides, {im, in})) {
    for (int total = 0; total <= cm + cn; ++total) {
      const auto& u = blocks[static_cast<std::size_t>(total)];
      const int p_lo = std::max(0, total - cn);
      const int p_hi = std::min(cm, total);
      for (int k = 0; k <= total; ++k) {
        Complex acc{};
        for (int p = p_lo; p <= p_hi; ++p) {
          const double coef = u(k, p);
          if (coef == 0.0) continue;
          acc += coef * src[base + static_cast<std::size_t>(p) * strides[im] +
                            static_cast<std::size_t>(total - p) * strides[in]];
        }
        if (k <= cm && total - k <= cn) {
          out[base + static_cast<std::size_t>(k) * strides[im] + static_cast<std::size_t>(total - k) * strides[in]] = acc;
        } else {
          clipped += std::norm(acc);
        }
      }
    }
  }
  return {std::vector<Mode>(modes.begin(), modes.end()), std::move(out), state.tail_mass() + clipped};
}

PureState apply_number_phase(const PureState& state, const ModeLabel& mode, double phase) {
  const std::size_t k = state.index_of(mode);
  const auto strides = state.strides();
  const int cut = state.modes()[k].cutoff;
  std::vector<Complex> amps(state.amplitudes().begin(), state.amplitudes().end());
  std::vector<Complex> factor(static_cast<std::size_t>(cut + 1));
  for (int n = 0; n <= cut; ++n) factor[static_cast<std::size_t>(n)] = std::polar(1.0, phase * n);
  // Exact ±1 for π multiples keeps real states real.
  for (int n = 0; n <= cut; ++n) {
    auto& f = factor[static_cast<std::size_t>(n)];
    if (std::abs(f.imag()) < 1e-15) f = {std::round(f.real()), 0.0};
  }
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= factor[static_cast<std::size_t>(occupation_of(i, strides[k], cut))];
  return {std::vector<Mode>(state.modes().begin(), state.modes().end()), std::move(amps), state.tail_mass()};
}

PureState scaled(const PureState& state, Complex factor) {
  std::vector<Complex> amps(state.amplitudes().begin(), state.amplitudes().end());
  for (auto& a : amps) a *= factor;
  return {std::vector<Mode>(state.modes().begin(), state.modes().end()), std::move(amps), state.tail_mass()};
}

// -- restructuring ------------------------------------------------------------

PureState project_fock(const PureState& state, const ModeLabel& mode, int n) {
  const std::size_t k = state.index_of(mode);
  const auto modes = state.modes();
  if (n < 0 || n > modes[k].cutoff) throw std::invalid_argument("projection photon number outside the mode cutoff");
  const auto strides = state.strides();
  const auto dim = static_cast<std::size_t>(modes[k].cutoff + 1);
  std::vector<Mode> rest;
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (i != k) rest.push_back(modes[i]);
  std::vector<Complex> amps(total_size(rest));
  const auto src = state.amplitudes();
  const std::size_t stride = strides[k];
  for (std::size_t j = 0; j < amps.size(); ++j) {
    const std::size_t hi = j / stride;
    const std::size_t lo = j % stride;
    amps[j] = src[hi * stride * dim + static_cast<std::size_t>(n) * stride + lo];
  }
  return {std::move(rest), std::move(amps), state.tail_mass()};
}

PureState with_cutoff(const PureState& state, const ModeLabel& mode, int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
  const std::size_t k = state.index_of(mode);
  std::vector<Mode> ms(state.modes().begin(), state.modes().end());
  ms[k].cutoff = cutoff;
  const auto old_strides = state.strides();
  const auto new_strides = strides_of(ms);
  std::vector<Complex> amps(total_size(ms));
  double dropped = 0.0;
  const auto src = state.amplitudes();
  const auto old_modes = state.modes();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == Complex{}) continue;
    std::size_t j = 0;
    bool inside = true;
    for (std::size_t q = 0; q < ms.size(); ++q) {
      const int occ = occupation_of(i, old_strides[q], old_modes[q].cutoff);
      if (occ > ms[q].cutoff) {
        inside = false;
        break;
      }
      j += static_cast<std::size_t>(occ) * new_strides[q];
    }
    if (inside) {
      amps[j] = src[i];
    } else {
      dropped += std::norm(src[i]);
    }
  }
  return {std::move(ms), std::move(amps), state.tail_mass() + dropped};
}

PureState rename_mode(const PureState& state, const ModeLabel& from, const ModeLabel& to) {
  const std::size_t k = state.index_of(from);
  if (from != to && state.has_mode(to)) throw std::invalid_argument("mode '" + to.name() + "' already present");
  std::vector<Mode> ms(state.modes().begin(), state.modes().end());
  ms[k].label = to;
  return {std::move(ms), std::vector<Complex>(state.amplitudes().begin(), state.amplitudes().end()), state.tail_mass()};
}

PureState permute_modes(const PureState& state, const std::vector<ModeLabel>& order) {
  if (order.size() != state.num_modes()) throw std::invalid_argument("permutation must name every mode once");
  std::vector<std::size_t> perm;  // perm[new] = old
  std::vector<Mode> ms;
  for (const auto& l : order) {
    perm.push_back(state.index_of(l));
    ms.push_back(state.modes()[perm.back()]);
  }
  if (std::set<std::size_t>(perm.begin(), perm.end()).size() != perm.size())
    throw std::invalid_argument("permutation repeats a mode");
  const auto old_strides = state.strides();
  const auto new_strides = strides_of(ms);
  const auto src = state.amplitudes();
  std::vector<Complex> amps(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::size_t j = 0;
    for (std::size_t q = 0; q < ms.size(); ++q)
      j += static_cast<std::size_t>(occupation_of(i, old_strides[perm[q]], ms[q].cutoff)) * new_strides[q];
    amps[j] = src[i];
  }
  return {std::move(ms), std::move(amps), state.tail_mass()};
}

// -- reduction ----------------------------------------------------------------

namespace {

struct Split {
  std::vector<Mode> kept;
  std::vector<std::size_t> keep_index;   // per full basis index
  std::vector<std::size_t> trace_index;  // per full basis index
  std::size_t keep_dim = 1;
  std::size_t trace_dim = 1;
};

Split split_modes(std::span<const Mode> modes, const std::vector<ModeLabel>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial trace must keep at least one mode");
  std::vector<bool> is_kept(modes.size(), false);
  for (const auto& l : keep) is_kept[find_mode(modes, l)] = true;
  Split s;
  std::vector<Mode> traced;
  for (std::size_t i = 0; i < modes.size(); ++i) (is_kept[i] ? s.kept : traced).push_back(modes[i]);
  s.keep_dim = total_size(s.kept);
  s.trace_dim = total_size(traced);
  const auto strides = strides_of(modes);
  const auto ks = strides_of(s.kept);
  const auto ts = strides_of(traced);
  const std::size_t n = total_size(modes);
  s.keep_index.resize(n);
  s.trace_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ki = 0, ti = 0, kq = 0, tq = 0;
    for (std::size_t q = 0; q < modes.size(); ++q) {
      const auto occ = static_cast<std::size_t>(occupation_of(i, strides[q], modes[q].cutoff));
      if (is_kept[q]) {
        ki += occ * ks[kq++];
      } else {
        ti += occ * ts[tq++];
      }
    }
    s.keep_index[i] = ki;
    s.trace_index[i] = ti;
  }
  return s;
}

}  // namespace

DensityMatrix to_density_matrix(const PureState& state) {
  const auto amps = state.amplitudes();
  Eigen::Map<const Eigen::VectorXcd> v(amps.data(), static_cast<Eigen::Index>(amps.size()));
  return {std::vector<Mode>(state.modes().begin(), state.modes().end()), v * v.adjoint()};
}

DensityMatrix partial_trace(const PureState& state, const std::vector<ModeLabel>& keep) {
  const auto s = split_modes(state.modes(), keep);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(s.keep_dim), static_cast<Eigen::Index>(s.trace_dim));
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i)
    m(static_cast<Eigen::Index>(s.keep_index[i]), static_cast<Eigen::Index>(s.trace_index[i])) = amps[i];
  Eigen::MatrixXcd rho = m * m.adjoint();
  // Exact hermiticity; the product is Hermitian only up to rounding.
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {s.kept, std::move(rho)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<ModeLabel>& keep) {
  const auto s = split_modes(rho.modes(), keep);
  // Group full indices by traced index.
  std::vector<std::vector<std::size_t>> groups(s.trace_dim);
  for (std::size_t i = 0; i < s.trace_index.size(); ++i) groups[s.trace_index[i]].push_back(i);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(s.keep_dim), static_cast<Eigen::Index>(s.keep_dim));
  const auto& m = rho.matrix();
  for (const auto& g : groups)
    for (auto i : g)
      for (auto j : g)
        out(static_cast<Eigen::Index>(s.keep_index[i]), static_cast<Eigen::Index>(s.keep_index[j])) +=
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return {s.kept, std::move(out)};
}

double norm_sq(const PureState& state) { return state.norm_sq(); }

double purity(const DensityMatrix& rho) {
  const double tr = rho.trace();
  return rho.matrix().cwiseAbs2().sum() / (tr * tr);
}

double fidelity(const PureState& a, const PureState& b) {
  if (a.num_modes() != b.num_modes()) throw std::invalid_argument("fidelity needs states on the same modes");
  std::vector<std::size_t> b_pos;  // b_pos[i] = index in b of a's mode i
  for (const auto& m : a.modes()) b_pos.push_back(b.index_of(m.label));
  const auto as = a.strides();
  const auto bs = b.strides();
  const auto amps_a = a.amplitudes();
  const auto amps_b = b.amplitudes();
  Complex overlap{};
  for (std::size_t i = 0; i < amps_a.size(); ++i) {
    if (amps_a[i] == Complex{}) continue;
    std::size_t j = 0;
    bool inside = true;
    for (std::size_t q = 0; q < a.num_modes(); ++q) {
      const int occ = occupation_of(i, as[q], a.modes()[q].cutoff);
      if (occ > b.modes()[b_pos[q]].cutoff) {
        inside = false;
        break;
      }
      j += static_cast<std::size_t>(occ) * bs[b_pos[q]];
    }
    if (inside) overlap += std::conj(amps_a[i]) * amps_b[j];
  }
  const double na = a.norm_sq();
  const double nb = b.norm_sq();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("fidelity of a zero vector");
  return std::norm(overlap) / (na * nb);
}

Complex ladder_moment(const PureState& state, std::span<const LadderPower> powers) {
  check_distinct(powers);
  const auto modes = state.modes();
  const auto strides = state.strides();
  std::vector<Complex> left(state.amplitudes().begin(), state.amplitudes().end());
  std::vector<Complex> right = left;
  for (const auto& p : powers) {
    const std::size_t k = state.index_of(p.mode);
    left = lowered(left, modes, strides, k, p.creation);
    right = lowered(right, modes, strides, k, p.annihilation);
  }
  Complex acc{};
  for (std::size_t i = 0; i < left.size(); ++i) acc += std::conj(left[i]) * right[i];
  return acc;
}

Complex ladder_moment(const DensityMatrix& rho, std::span<const LadderPower> powers) {
  check_distinct(powers);
  const auto modes = rho.modes();
  const auto strides = strides_of(modes);
  std::vector<std::size_t> idx;
  std::vector<int> cre, ann;
  for (const auto& p : powers) {
    idx.push_back(rho.index_of(p.mode));
    cre.push_back(p.creation);
    ann.push_back(p.annihilation);
  }
  // Tr(ρ O) = Σ_i ⟨j(i)| ρ |i⟩^* ... written as Σ_i ρ(j, i) ⟨m^p j | m^q i⟩ where
  // j is the unique index whose p-lowering meets the q-lowering of i.
  const auto& m = rho.matrix();
  Complex acc{};
  for (std::size_t i = 0; i < rho.dimension(); ++i) {
    std::size_t j = i;
    double coef = 1.0;
    bool ok = true;
    for (std::size_t q = 0; q < idx.size() && ok; ++q) {
      const int occ = occupation_of(i, strides[idx[q]], modes[idx[q]].cutoff);
      const int lowered_occ = occ - ann[q];
      const int raised_occ = lowered_occ + cre[q];
      if (lowered_occ < 0 || raised_occ > modes[idx[q]].cutoff) {
        ok = false;
        break;
      }
      coef *= falling_sqrt(occ, ann[q]) * falling_sqrt(raised_occ, cre[q]);
      j = j - static_cast<std::size_t>(occ) * strides[idx[q]] + static_cast<std::size_t>(raised_occ) * strides[idx[q]];
    }
    if (ok) acc += m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * coef;
  }
  return acc;
}

double quadrature_moment(const PureState& state, std::span<const QuadratureFactor> factors) {
  for (const auto& f : factors) (void)state.index_of(f.mode);
  const double n = state.norm_sq();
  if (n == 0.0) throw std::invalid_argument("expectation on a zero-norm state");
  const Complex v = expand_quadrature(factors, [&](std::span<const LadderPower> p) { return ladder_moment(state, p); });
  return v.real() / n;
}

double quadrature_moment(const DensityMatrix& rho, std::span<const QuadratureFactor> factors) {
  for (const auto& f : factors) (void)rho.index_of(f.mode);
  const Complex v = expand_quadrature(factors, [&](std::span<const LadderPower> p) { return ladder_moment(rho, p); });
  return v.real() / rho.trace();
}

std::string to_debug_string(const PureState& state) {
  std::ostringstream out;
  const auto strides = state.strides();
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (std::abs(amps[i]) < 1e-14) continue;
    for (std::size_t q = 0; q < state.num_modes(); ++q) {
      if (q) out << ',';
      out << occupation_of(i, strides[q], state.modes()[q].cutoff);
    }
    out << ": " << format_number(amps[i].real()) << ',' << format_number(amps[i].imag()) << '\n';
  }
  return out.str();
}

}  // namespace nla
