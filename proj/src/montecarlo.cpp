#include "photostat/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "photostat/error.hpp"
#include "photostat/oscillator.hpp"

namespace photostat {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 53 random bits in [0, 1); fixed here rather than left to the library.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void for_each_trial(std::size_t n_trials, unsigned threads,
                    const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_trials));
  if (threads <= 1) {
    for (std::size_t t = 0; t < n_trials; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < n_trials; t = next++) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n_trials;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void check_trial_options(const TrialOptions& options) {
  if (options.n_trials < 1) throw InvalidArgument("n_trials must be >= 1");
  if (options.n_runs < 1) throw InvalidArgument("number of runs N must be >= 1");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t setting) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ trial);
  h = splitmix64(h ^ (setting * 0xd1b54a32d192ed03ULL));
  return h;
}

Histogram sample_histogram(const OutcomeDistribution& dist, std::uint64_t n_runs,
                           std::uint64_t seed) {
  if (n_runs < 1) throw InvalidArgument("number of runs N must be >= 1");
  const std::size_t m = dist.probs.size();
  // suffix[j] = p_j + ... + p_{m-1} + leftover
  std::vector<double> suffix(m + 1);
  suffix[m] = std::max(0.0, dist.leftover);
  for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] + std::max(0.0, dist.probs[j]);

  Histogram h;
  h.counts.assign(m, 0);
  h.n_runs = n_runs;
  h.setting = dist.setting;
  h.seed = seed;

  std::mt19937_64 rng(seed);
  std::uint64_t remaining = n_runs;
  for (std::size_t j = 0; j < m && remaining > 0; ++j) {
    const double p = std::max(0.0, dist.probs[j]);
    if (p == 0.0) continue;
    const double q = suffix[j] > 0.0 ? std::min(1.0, p / suffix[j]) : 1.0;
    std::uint64_t k;
    if (q >= 1.0) {
      k = remaining;
    } else {
      std::binomial_distribution<std::uint64_t> draw(remaining, q);
      k = draw(rng);
    }
    h.counts[j] = k;
    remaining -= k;
  }
  return h;
}

HomodyneSampler::HomodyneSampler(const QuadratureDensity& density, const DetectorModel& model)
    : model_(model) {
  model_.validate();
  if (model_.kind != DetectorKind::RandomPhaseHomodyne) {
    throw InvalidArgument("homodyne event sampling needs a random-phase homodyne detector");
  }
  to_recorded_ = 1.0 / model_.recorded_to_oscillator();

  const PhotonDistribution& photons = density.photons();
  const std::size_t levels = static_cast<std::size_t>(photons.cutoff) + 1;
  photon_cdf_.resize(levels);
  double acc = 0.0;
  for (std::size_t nu = 0; nu < levels; ++nu) {
    acc += std::max(0.0, photons.probs[nu]);
    photon_cdf_[nu] = acc;
  }
  if (!(acc > 0.0)) throw InvalidArgument("photon-number distribution has no mass");

  const Interval support = density.support_hint();
  grid_.resize(kTablePoints);
  const double step = (support.hi - support.lo) / static_cast<double>(kTablePoints - 1);
  for (std::size_t i = 0; i < kTablePoints; ++i) grid_[i] = support.lo + step * static_cast<double>(i);

  cdf_.assign(levels, std::vector<double>(kTablePoints, 0.0));
  std::vector<double> psi(levels);
  std::vector<double> prev(levels, 0.0);
  for (std::size_t i = 0; i < kTablePoints; ++i) {
    hermite_functions(grid_[i], psi);
    for (std::size_t nu = 0; nu < levels; ++nu) {
      const double w = psi[nu] * psi[nu];
      cdf_[nu][i] = i == 0 ? 0.0 : cdf_[nu][i - 1] + 0.5 * step * (prev[nu] + w);
      prev[nu] = w;
    }
  }
  for (std::size_t nu = 0; nu < levels; ++nu) {
    auto& c = cdf_[nu];
    const double total = c.back();
    if (std::abs(total - 1.0) > 1e-6) {
      throw NumericalError("inverse-CDF table for nu = " + std::to_string(nu) +
                           " integrates to " + std::to_string(total) + " instead of 1");
    }
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i] < c[i - 1] - 1e-12) {
        throw NumericalError("inverse-CDF table for nu = " + std::to_string(nu) + " is not monotone");
      }
    }
    for (double& v : c) v /= total;
  }
}

double HomodyneSampler::draw_quadrature(std::mt19937_64& rng) const {
  const double u_level = uniform01(rng) * photon_cdf_.back();
  auto level_it = std::upper_bound(photon_cdf_.begin(), photon_cdf_.end(), u_level);
  if (level_it == photon_cdf_.end()) --level_it;
  const auto& c = cdf_[static_cast<std::size_t>(level_it - photon_cdf_.begin())];

  const double u = uniform01(rng);
  auto it = std::upper_bound(c.begin(), c.end(), u);
  std::size_t hi = static_cast<std::size_t>(it - c.begin());
  if (hi == 0) hi = 1;
  if (hi >= c.size()) hi = c.size() - 1;
  const std::size_t lo = hi - 1;
  const double span = c[hi] - c[lo];
  const double frac = span > 0.0 ? (u - c[lo]) / span : 0.5;
  const double x = grid_[lo] + frac * (grid_[hi] - grid_[lo]);
  return x * to_recorded_;
}

std::vector<double> HomodyneSampler::sample_quadratures(std::uint64_t count,
                                                        std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (auto& x : out) x = draw_quadrature(rng);
  return out;
}

Histogram HomodyneSampler::sample_events(std::uint64_t n_runs, std::uint64_t seed) const {
  if (n_runs < 1) throw InvalidArgument("number of homodyne events N must be >= 1");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(model_.bins.count), 0);
  h.n_runs = n_runs;
  h.setting = kHomodyneSetting;
  h.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::uint64_t e = 0; e < n_runs; ++e) {
    if (auto bin = model_.bins.locate(draw_quadrature(rng))) ++h.counts[static_cast<std::size_t>(*bin)];
  }
  return h;
}

Histogram sample_homodyne_events(const QuadratureDensity& density, const DetectorModel& model,
                                 std::uint64_t n_runs, std::uint64_t seed) {
  if (n_runs < 1) throw InvalidArgument("number of homodyne events N must be >= 1");
  return HomodyneSampler(density, model).sample_events(n_runs, seed);
}

double TrialEnsemble::mean() const {
  if (estimates.empty()) return 0.0;
  double s = 0.0;
  for (double v : estimates) s += v;
  return s / static_cast<double>(estimates.size());
}

double TrialEnsemble::variance() const {
  if (estimates.size() < 2) return 0.0;
  const double m = mean();
  double s = 0.0;
  for (double v : estimates) s += (v - m) * (v - m);
  return s / static_cast<double>(estimates.size() - 1);
}

std::optional<double> sample_correlation(const TrialEnsemble& a, const TrialEnsemble& b) {
  if (a.n_trials() != b.n_trials()) {
    throw InvalidArgument("ensembles to correlate must have the same number of trials");
  }
  if (a.n_trials() < 2) return std::nullopt;
  const double ma = a.mean();
  const double mb = b.mean();
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t t = 0; t < a.n_trials(); ++t) {
    const double da = a.estimates[t] - ma;
    const double db = b.estimates[t] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<TrialEnsemble> run_trials(const std::vector<KernelSet>& kernels,
                                      const DistributionSet& dists, const TrialOptions& options) {
  check_trial_options(options);
  if (dists.empty()) throw InvalidArgument("no outcome distributions to sample from");
  std::vector<TrialEnsemble> out(kernels.size());
  for (auto& e : out) e.estimates.assign(options.n_trials, 0.0);

  for_each_trial(options.n_trials, options.threads, [&](std::size_t trial) {
    HistogramSet histograms;
    std::uint64_t setting_index = 0;
    for (const auto& [label, dist] : dists) {
      histograms.emplace(label, sample_histogram(dist, options.n_runs,
                                                 derive_seed(options.seed, trial, setting_index++)));
    }
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      out[k].estimates[trial] = estimate_from_histograms(kernels[k], histograms);
    }
  });
  return out;
}

TrialEnsemble run_trials(const KernelSet& kernels, const DistributionSet& dists,
                         std::uint64_t n_runs, std::size_t n_trials, std::uint64_t seed) {
  TrialOptions options;
  options.n_runs = n_runs;
  options.n_trials = n_trials;
  options.seed = seed;
  return std::move(run_trials(std::vector<KernelSet>{kernels}, dists, options).front());
}

std::vector<TrialEnsemble> run_event_trials(const std::vector<KernelSet>& kernels,
                                            const HomodyneSampler& sampler,
                                            const TrialOptions& options) {
  check_trial_options(options);
  std::vector<TrialEnsemble> out(kernels.size());
  for (auto& e : out) e.estimates.assign(options.n_trials, 0.0);

  for_each_trial(options.n_trials, options.threads, [&](std::size_t trial) {
    HistogramSet histograms;
    histograms.emplace(kHomodyneSetting,
                       sampler.sample_events(options.n_runs, derive_seed(options.seed, trial, 0)));
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      out[k].estimates[trial] = estimate_from_histograms(kernels[k], histograms);
    }
  });
  return out;
}

}  // namespace photostat
