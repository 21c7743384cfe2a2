#include "photostat/states.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "photostat/error.hpp"
#include "photostat/oscillator.hpp"

namespace photostat {

namespace {

constexpr int kMaxPhotonIndex = 2'000'000;
constexpr double kDensityTailLimit = 1e-6;

// log rho_nu for the three closed forms. Returns -inf for exact zeros.
class LogTerms {
 public:
  explicit LogTerms(const StateSpec& spec) : spec_(spec) {
    const double m = spec.mean_photon_number;
    switch (spec.kind) {
      case StateKind::Coherent:
        log_mean_ = std::log(m);
        break;
      case StateKind::Thermal:
        log_ratio_ = std::log(m) - std::log1p(m);
        log_norm_ = -std::log1p(m);
        break;
      case StateKind::SqueezedVacuum:
        log_ratio_ = std::log(m) - std::log1p(m);  // tanh^2 r
        log_norm_ = -0.5 * std::log1p(m);          // 1 / cosh r
        break;
    }
  }

  double operator()(int nu) const {
    const double m = spec_.mean_photon_number;
    const double dnu = nu;
    switch (spec_.kind) {
      case StateKind::Coherent:
        return -m + dnu * log_mean_ - std::lgamma(dnu + 1.0);
      case StateKind::Thermal:
        return dnu * log_ratio_ + log_norm_;
      case StateKind::SqueezedVacuum: {
        if (nu % 2 != 0) return -std::numeric_limits<double>::infinity();
        const double k = nu / 2;
        return k * log_ratio_ + std::lgamma(2.0 * k + 1.0) - 2.0 * std::lgamma(k + 1.0) -
               k * std::log(4.0) + log_norm_;
      }
    }
    return -std::numeric_limits<double>::infinity();
  }

 private:
  StateSpec spec_;
  double log_mean_ = 0.0;
  double log_ratio_ = 0.0;
  double log_norm_ = 0.0;
};

PhotonDistribution vacuum_distribution() {
  return PhotonDistribution{{1.0}, 0, 0.0};
}

}  // namespace

std::string_view to_string(StateKind kind) {
  switch (kind) {
    case StateKind::Coherent:
      return "coherent";
    case StateKind::Thermal:
      return "thermal";
    case StateKind::SqueezedVacuum:
      return "squeezed_vacuum";
  }
  return "unknown";
}

std::optional<StateKind> parse_state_kind(std::string_view name) {
  if (name == "coherent") return StateKind::Coherent;
  if (name == "thermal") return StateKind::Thermal;
  if (name == "squeezed_vacuum" || name == "squeezed") return StateKind::SqueezedVacuum;
  return std::nullopt;
}

double StateSpec::squeeze_parameter() const {
  return kind == StateKind::SqueezedVacuum ? std::asinh(std::sqrt(mean_photon_number)) : 0.0;
}

void StateSpec::validate() const {
  if (!(mean_photon_number >= 0.0) || !std::isfinite(mean_photon_number)) {
    throw InvalidArgument("mean photon number must be finite and >= 0, got " +
                          std::to_string(mean_photon_number));
  }
}

double PhotonDistribution::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double PhotonDistribution::mean() const {
  double s = 0.0;
  for (std::size_t nu = 0; nu < probs.size(); ++nu) s += static_cast<double>(nu) * probs[nu];
  return s;
}

PhotonDistribution photon_distribution(const StateSpec& spec, double tail_tolerance) {
  spec.validate();
  if (!(tail_tolerance >= kMinTailTolerance && tail_tolerance <= kMaxTailTolerance)) {
    throw InvalidArgument("tail tolerance must lie in [1e-280, 1e-6]");
  }
  if (spec.mean_photon_number == 0.0) return vacuum_distribution();

  // Generate terms well past the point where the remainder is negligible
  // against the tolerance, then accumulate tails backwards so every tail mass
  // is a sum of positive terms.
  const LogTerms log_term(spec);
  const double stop_level = tail_tolerance * 1e-6;
  const double mode_guard = 2.0 * spec.mean_photon_number + 2.0;
  std::vector<double> terms;
  double remainder = 0.0;
  double previous = 0.0;
  for (int nu = 0;; ++nu) {
    if (nu > kMaxPhotonIndex) throw NumericalError("photon distribution did not converge");
    const double t = std::exp(log_term(nu));
    terms.push_back(t);
    if (t == 0.0 && spec.kind == StateKind::SqueezedVacuum && nu % 2 == 1) continue;
    if (nu > mode_guard && previous > 0.0) {
      // Ratio over the last step with a nonzero term (two steps for squeezed vacuum).
      const double ratio = t / previous;
      if (ratio < 1.0) {
        remainder = t * ratio / (1.0 - ratio);
        if (t < stop_level && remainder < stop_level) break;
      }
    }
    previous = t;
  }

  std::vector<double> tail(terms.size());
  double acc = remainder;
  for (std::size_t i = terms.size(); i-- > 0;) {
    tail[i] = acc;
    acc += terms[i];
  }

  std::size_t cutoff = 0;
  while (cutoff + 1 < terms.size() && !(tail[cutoff] < tail_tolerance)) ++cutoff;

  PhotonDistribution out;
  out.probs.assign(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(cutoff) + 1);
  out.cutoff = static_cast<int>(cutoff);
  out.tail_bound = tail[cutoff];
  return out;
}

double exact_parity(const StateSpec& spec) {
  const PhotonDistribution rho = photon_distribution(spec, 1e-14);
  double s = 0.0;
  // Smallest terms first.
  for (int nu = rho.cutoff; nu >= 0; --nu) s += (nu % 2 == 0 ? 1.0 : -1.0) * rho[nu];
  return s;
}

QuadratureDensity::QuadratureDensity(PhotonDistribution photons) : photons_(std::move(photons)) {
  const double half_width = turning_point(photons_.cutoff) + 7.0;
  support_ = Interval{-half_width, half_width};
}

double QuadratureDensity::operator()(double x) const {
  thread_local std::vector<double> psi;
  psi.resize(photons_.probs.size());
  hermite_functions(x, psi);
  double s = 0.0;
  for (std::size_t nu = 0; nu < psi.size(); ++nu) s += photons_.probs[nu] * psi[nu] * psi[nu];
  return s;
}

QuadratureDensity phase_averaged_density(const PhotonDistribution& photons) {
  if (photons.probs.empty()) throw InvalidArgument("empty photon distribution");
  if (photons.tail_bound > kDensityTailLimit) {
    throw InvalidArgument("photon cutoff leaves tail mass " + std::to_string(photons.tail_bound) +
                          " above 1e-6");
  }
  return QuadratureDensity(photons);
}

QuadratureDensity phase_averaged_density(const StateSpec& spec, int cutoff) {
  if (cutoff < 0) throw InvalidArgument("cutoff must be >= 0");
  PhotonDistribution full = photon_distribution(spec, 1e-16);
  PhotonDistribution out;
  out.cutoff = cutoff;
  out.probs.assign(static_cast<std::size_t>(cutoff) + 1, 0.0);
  out.tail_bound = full.tail_bound;
  for (int nu = 0; nu <= full.cutoff; ++nu) {
    if (nu <= cutoff) {
      out.probs[static_cast<std::size_t>(nu)] = full[nu];
    } else {
      out.tail_bound += full[nu];
    }
  }
  return phase_averaged_density(out);
}

}  // namespace photostat
