#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace photostat {

enum class StateKind { Coherent, Thermal, SqueezedVacuum };

std::string_view to_string(StateKind kind);
std::optional<StateKind> parse_state_kind(std::string_view name);

/// One of the three benchmark single-mode states, fixed by its mean photon
/// number: |alpha|^2 for a coherent state, nbar for a thermal state and
/// sinh^2 r for a (real) squeezed vacuum.
struct StateSpec {
  StateKind kind = StateKind::Coherent;
  double mean_photon_number = 0.0;

  static StateSpec coherent(double alpha_sq) { return {StateKind::Coherent, alpha_sq}; }
  static StateSpec thermal(double nbar) { return {StateKind::Thermal, nbar}; }
  static StateSpec squeezed_vacuum(double mean) { return {StateKind::SqueezedVacuum, mean}; }
  static StateSpec vacuum() { return coherent(0.0); }

  double squeeze_parameter() const;
  void validate() const;
};

/// Fock-basis diagonal rho_nu for nu = 0..cutoff. `tail_bound` is the mass
/// dropped by the truncation.
struct PhotonDistribution {
  std::vector<double> probs;
  int cutoff = 0;
  double tail_bound = 0.0;

  double operator[](int nu) const {
    return nu >= 0 && nu <= cutoff ? probs[static_cast<std::size_t>(nu)] : 0.0;
  }
  double total() const;
  double mean() const;
};

inline constexpr double kMinTailTolerance = 1e-280;
inline constexpr double kMaxTailTolerance = 1e-6;

/// Closed-form photon statistics truncated at the smallest cutoff whose tail
/// mass is below `tail_tolerance` (accepted range [1e-280, 1e-6]).
PhotonDistribution photon_distribution(const StateSpec& spec, double tail_tolerance);

/// <Pi> = sum (-1)^nu rho_nu, summed until the remaining mass is below 1e-14.
double exact_parity(const StateSpec& spec);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Random-phase quadrature density p(x) = sum_nu rho_nu psi_nu(x)^2.
class QuadratureDensity {
 public:
  explicit QuadratureDensity(PhotonDistribution photons);

  double operator()(double x) const;
  const PhotonDistribution& photons() const { return photons_; }
  /// Symmetric interval outside which the density is below double resolution
  /// relative to its normalization.
  Interval support_hint() const { return support_; }

 private:
  PhotonDistribution photons_;
  Interval support_;
};

/// Density for `spec` truncated at `cutoff`. Throws InvalidArgument when the
/// truncation drops more than 1e-6 of the photon-number mass.
QuadratureDensity phase_averaged_density(const StateSpec& spec, int cutoff);
QuadratureDensity phase_averaged_density(const PhotonDistribution& photons);

}  // namespace photostat
