#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace photostat {

/// Identifier of an experimental setting theta_i.
using SettingLabel = std::string;

inline const SettingLabel kPhotocountSetting = "photocount";
inline const SettingLabel kHomodyneSetting = "random_phase";

/// Counts k_n from N runs at one setting. Runs whose outcome fell outside the
/// recorded set are part of `n_runs` but absent from `counts`.
struct Histogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t n_runs = 0;
  SettingLabel setting = kPhotocountSetting;
  std::uint64_t seed = 0;

  std::uint64_t recorded() const {
    std::uint64_t s = 0;
    for (auto k : counts) s += k;
    return s;
  }
};

using HistogramSet = std::map<SettingLabel, Histogram>;

}  // namespace photostat
