#include "photostat/cli/experiment.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "photostat/oscillator.hpp"

namespace photostat::cli {

namespace {

using FailFn = std::function<void(const std::string& pointer, const std::string& message)>;

struct TaskName {
  Task task;
  const char* name;
};

constexpr TaskName kTaskNames[] = {
    {Task::ReconstructPhotonDist, "reconstruct_photon_dist"},
    {Task::Correlations, "correlations"},
    {Task::ParityVsMeanPhoton, "parity_vs_mean_photon"},
    {Task::TruncatedParityVsK, "truncated_parity_vs_k"},
    {Task::PatternTableExport, "pattern_table_export"},
    {Task::Simulate, "simulate"},
    {Task::Estimate, "estimate"},
};

// Best effort: follow the pointer's keys through the raw text in order.
int locate_line(std::string_view text, const std::string& pointer) {
  if (text.empty()) return 0;
  std::size_t pos = 0;
  bool found_any = false;
  std::size_t start = 1;
  while (start <= pointer.size()) {
    std::size_t end = pointer.find('/', start);
    if (end == std::string::npos) end = pointer.size();
    const std::string token = pointer.substr(start, end - start);
    start = end + 1;
    if (token.empty() || token.find_first_not_of("0123456789") == std::string::npos) continue;
    const std::size_t hit = text.find("\"" + token + "\"", pos);
    if (hit == std::string_view::npos) break;
    pos = hit;
    found_any = true;
  }
  if (!found_any) return 0;
  int line = 1;
  for (std::size_t i = 0; i < pos; ++i) line += text[i] == '\n';
  return line;
}

class Reader {
 public:
  Reader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    std::ostringstream os;
    os << source_;
    if (int line = locate_line(text_, pointer); line > 0) os << ':' << line;
    os << ": " << (pointer.empty() ? "/" : pointer) << ": " << message;
    throw ConfigError(os.str());
  }

  FailFn failer() const {
    return [this](const std::string& p, const std::string& m) { fail(p, m); };
  }

  void only_keys(const Json& obj, const std::string& pointer, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(pointer, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) fail(pointer + "/" + key, "unknown field");
    }
  }

  double number(const Json& v, const std::string& pointer) const {
    if (!v.is_number()) fail(pointer, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(pointer, "must be finite");
    return x;
  }

  long long integer(const Json& v, const std::string& pointer) const {
    if (!v.is_number_integer()) fail(pointer, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) {
      fail(pointer, "integer out of range");
    }
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const Json& v, const std::string& pointer) const {
    if (!v.is_number_integer()) fail(pointer, "expected a non-negative integer");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const long long x = v.get<long long>();
    if (x < 0) fail(pointer, "expected a non-negative integer");
    return static_cast<std::uint64_t>(x);
  }

  std::string string(const Json& v, const std::string& pointer) const {
    if (!v.is_string()) fail(pointer, "expected a string");
    return v.get<std::string>();
  }

 private:
  std::string_view text_;
  std::string_view source_;
};

std::vector<double> default_sweep(Task task) {
  std::vector<double> out;
  if (task == Task::ParityVsMeanPhoton) {
    for (int i = 0; i <= 30; ++i) out.push_back(i / 10.0);
  } else if (task == Task::TruncatedParityVsK) {
    for (int k = 0; k <= 20; ++k) out.push_back(k);
  }
  return out;
}

bool task_needs_state(Task task) { return task != Task::PatternTableExport && task != Task::Estimate; }

bool task_uses_sweep(Task task) {
  return task == Task::ParityVsMeanPhoton || task == Task::TruncatedParityVsK;
}

void validate_impl(const ExperimentConfig& c, const FailFn& fail) {
  if (task_needs_state(c.task) && !c.state) fail("/state", "required for task " + std::string(to_string(c.task)));
  if (c.state) {
    if (!(c.state->mean_photon_number >= 0.0) || !std::isfinite(c.state->mean_photon_number)) {
      fail("/state/mean_photon_number", "must be a finite number >= 0");
    }
  }
  const DetectorModel& d = c.detector;
  if (!(d.efficiency > 0.0 && d.efficiency <= 1.0)) fail("/detector/efficiency", "must lie in (0, 1]");
  const bool homodyne = d.kind == DetectorKind::RandomPhaseHomodyne;
  if (homodyne) {
    if (d.efficiency != 1.0) {
      fail("/detector/efficiency", "random-phase homodyne is modelled at unit efficiency only");
    }
    if (d.bins.count < 2) fail("/detector/bins", "need at least 2 bins");
    if (!(d.bins.lo < d.bins.hi)) fail("/detector/range", "lower edge must be below upper edge");
    if (!(d.vacuum_variance > 0.0) || !std::isfinite(d.vacuum_variance)) {
      fail("/detector/vacuum_variance", "must be a finite number > 0");
    }
  }
  if (c.task == Task::PatternTableExport && !homodyne) {
    fail("/detector/kind", "pattern tables need a random_phase_homodyne detector");
  }
  if (c.n_runs < 1) fail("/n_runs", "must be >= 1");
  if (c.nu_max < 0 || c.nu_max > 2000) fail("/nu_max", "must lie in [0, 2000]");
  if (c.parity_cutoff && (*c.parity_cutoff < 0 || *c.parity_cutoff > 100000)) {
    fail("/parity_cutoff", "must lie in [0, 100000]");
  }
  if (!(c.tail_tolerance >= kMinTailTolerance && c.tail_tolerance <= kMaxTailTolerance)) {
    fail("/tail_tolerance", "must lie in [1e-280, 1e-6]");
  }
  if (c.n_trials < 1 || c.n_trials > 10000000) fail("/n_trials", "must lie in [1, 10000000]");

  for (std::size_t i = 0; i < c.sweep.size(); ++i) {
    const double v = c.sweep[i];
    const std::string p = "/sweep/" + std::to_string(i);
    if (!std::isfinite(v) || v < 0.0) fail(p, "sweep values must be finite and >= 0");
    if (c.task == Task::TruncatedParityVsK && (v != std::floor(v) || v > 100000)) {
      fail(p, "cut-off K must be an integer in [0, 100000]");
    }
  }
  if (task_uses_sweep(c.task) && c.sweep.empty()) fail("/sweep", "must not be empty");

  if (homodyne) {
    const double reach = std::max(std::abs(d.bins.lo), std::abs(d.bins.hi)) * std::sqrt(0.5 / d.vacuum_variance);
    auto check_reach = [&](int nu, const std::string& pointer) {
      if (turning_point(nu) > reach) {
        fail(pointer, "order " + std::to_string(nu) + " has its turning point outside the detector range");
      }
    };
    if (c.task != Task::ParityVsMeanPhoton && c.task != Task::TruncatedParityVsK) check_reach(c.nu_max, "/nu_max");
    if (c.parity_cutoff) check_reach(*c.parity_cutoff, "/parity_cutoff");
    if (c.task == Task::TruncatedParityVsK) {
      for (std::size_t i = 0; i < c.sweep.size(); ++i) {
        check_reach(static_cast<int>(c.sweep[i]), "/sweep/" + std::to_string(i));
      }
    }
  }
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& t : kTaskNames) {
    if (t.task == task) return t.name;
  }
  return "unknown";
}

std::optional<Task> parse_task(std::string_view name) {
  for (const auto& t : kTaskNames) {
    if (name == t.name) return t.task;
  }
  return std::nullopt;
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["task"] = std::string(cli::to_string(task));
  if (state) {
    j["state"] = {{"kind", std::string(photostat::to_string(state->kind))},
                  {"mean_photon_number", state->mean_photon_number}};
  }
  Json det;
  det["kind"] = std::string(photostat::to_string(detector.kind));
  det["efficiency"] = detector.efficiency;
  if (detector.kind == DetectorKind::RandomPhaseHomodyne) {
    det["bins"] = detector.bins.count;
    det["range"] = Json::array({detector.bins.lo, detector.bins.hi});
    det["vacuum_variance"] = detector.vacuum_variance;
  }
  j["detector"] = det;
  j["n_runs"] = n_runs;
  j["nu_max"] = nu_max;
  if (parity_cutoff) j["parity_cutoff"] = *parity_cutoff;
  if (!sweep.empty()) j["sweep"] = sweep;
  j["tail_tolerance"] = tail_tolerance;
  j["seed"] = seed;
  j["n_trials"] = n_trials;
  return j;
}

ExperimentConfig config_from_json(const Json& doc, std::optional<Task> implied_task,
                                  std::string_view source_text, std::string_view source_name) {
  const Reader r(source_text, source_name);
  r.only_keys(doc, "", {"schema_version", "task", "state", "detector", "n_runs", "nu_max", "parity_cutoff",
                        "sweep", "tail_tolerance", "seed", "n_trials"});

  if (!doc.contains("schema_version")) r.fail("/schema_version", "missing; expected 1");
  if (r.integer(doc["schema_version"], "/schema_version") != kSchemaVersion) {
    r.fail("/schema_version", "unsupported schema version (this build reads version 1)");
  }

  ExperimentConfig c;
  if (doc.contains("task")) {
    const auto name = r.string(doc["task"], "/task");
    const auto task = parse_task(name);
    if (!task) r.fail("/task", "unknown task '" + name + "'");
    if (implied_task && *implied_task != *task &&
        !(*implied_task == Task::ParityVsMeanPhoton && *task == Task::TruncatedParityVsK)) {
      r.fail("/task", "task '" + name + "' does not belong to this subcommand (expected '" +
                          std::string(to_string(*implied_task)) + "')");
    }
    c.task = *task;
  } else if (implied_task) {
    c.task = *implied_task;
  } else {
    r.fail("/task", "missing");
  }

  if (doc.contains("state")) {
    const Json& s = doc["state"];
    r.only_keys(s, "/state", {"kind", "mean_photon_number"});
    if (!s.contains("kind")) r.fail("/state/kind", "missing");
    const auto name = r.string(s["kind"], "/state/kind");
    const auto kind = parse_state_kind(name);
    if (!kind) r.fail("/state/kind", "unknown state '" + name + "' (coherent, thermal, squeezed_vacuum)");
    double mean = 0.0;
    if (s.contains("mean_photon_number")) {
      mean = r.number(s["mean_photon_number"], "/state/mean_photon_number");
    } else if (c.task != Task::ParityVsMeanPhoton) {
      r.fail("/state/mean_photon_number", "missing");
    }
    c.state = StateSpec{*kind, mean};
  }

  DetectorKind kind = c.task == Task::PatternTableExport ? DetectorKind::RandomPhaseHomodyne
                                                          : DetectorKind::PhotonCounting;
  const Json empty = Json::object();
  const Json& d = doc.contains("detector") ? doc["detector"] : empty;
  r.only_keys(d, "/detector", {"kind", "efficiency", "bins", "range", "vacuum_variance"});
  if (d.contains("kind")) {
    const auto name = r.string(d["kind"], "/detector/kind");
    const auto k = parse_detector_kind(name);
    if (!k) r.fail("/detector/kind", "unknown detector '" + name + "' (photon_counting, random_phase_homodyne)");
    kind = *k;
  }
  if (kind == DetectorKind::PhotonCounting) {
    for (const char* key : {"bins", "range", "vacuum_variance"}) {
      if (d.contains(key)) r.fail(std::string("/detector/") + key, "only meaningful for a homodyne detector");
    }
    c.detector = DetectorModel{};
    c.detector.kind = DetectorKind::PhotonCounting;
    c.detector.efficiency = d.contains("efficiency") ? r.number(d["efficiency"], "/detector/efficiency") : 0.8;
  } else {
    int bins = 1200;
    double lo = -6.0, hi = 6.0, vv = 0.25;
    if (d.contains("bins")) {
      const long long b = r.integer(d["bins"], "/detector/bins");
      if (b < 2 || b > 10000000) r.fail("/detector/bins", "must lie in [2, 10000000]");
      bins = static_cast<int>(b);
    }
    if (d.contains("range")) {
      const Json& range = d["range"];
      if (!range.is_array() || range.size() != 2) r.fail("/detector/range", "expected [lo, hi]");
      lo = r.number(range[0], "/detector/range/0");
      hi = r.number(range[1], "/detector/range/1");
    }
    if (d.contains("vacuum_variance")) vv = r.number(d["vacuum_variance"], "/detector/vacuum_variance");
    c.detector = DetectorModel{};
    c.detector.kind = DetectorKind::RandomPhaseHomodyne;
    c.detector.bins = BinGrid{bins, lo, hi};
    c.detector.vacuum_variance = vv;
    c.detector.efficiency = d.contains("efficiency") ? r.number(d["efficiency"], "/detector/efficiency") : 1.0;
  }

  c.n_runs = doc.contains("n_runs") ? r.unsigned_integer(doc["n_runs"], "/n_runs")
                                    : (kind == DetectorKind::PhotonCounting ? 4000 : 40000);
  if (doc.contains("nu_max")) {
    const long long v = r.integer(doc["nu_max"], "/nu_max");
    if (v < 0 || v > 2000) r.fail("/nu_max", "must lie in [0, 2000]");
    c.nu_max = static_cast<int>(v);
  }
  if (doc.contains("parity_cutoff")) {
    const long long v = r.integer(doc["parity_cutoff"], "/parity_cutoff");
    if (v < 0 || v > 100000) r.fail("/parity_cutoff", "must lie in [0, 100000]");
    c.parity_cutoff = static_cast<int>(v);
  }
  if (doc.contains("sweep")) {
    const Json& s = doc["sweep"];
    if (!s.is_array()) r.fail("/sweep", "expected an array of numbers");
    if (!task_uses_sweep(c.task)) r.fail("/sweep", "not used by task " + std::string(to_string(c.task)));
    for (std::size_t i = 0; i < s.size(); ++i) c.sweep.push_back(r.number(s[i], "/sweep/" + std::to_string(i)));
  } else {
    c.sweep = default_sweep(c.task);
  }
  if (doc.contains("tail_tolerance")) c.tail_tolerance = r.number(doc["tail_tolerance"], "/tail_tolerance");
  if (doc.contains("seed")) c.seed = r.unsigned_integer(doc["seed"], "/seed");
  if (doc.contains("n_trials")) c.n_trials = r.unsigned_integer(doc["n_trials"], "/n_trials");

  validate_impl(c, r.failer());
  return c;
}

ExperimentConfig parse_config(std::string_view text, std::optional<Task> implied_task,
                              std::string_view source_name) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) line += text[i] == '\n';
    throw ConfigError(std::string(source_name) + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  return config_from_json(doc, implied_task, text, source_name);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_metadata(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (!text.empty() && text[0] == '#') {
    std::istringstream in(text);
    std::string line, block;
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
      block += line.size() >= 2 && line[1] == ' ' ? line.substr(2) : line.substr(1);
      block += '\n';
    }
    try {
      return Json::parse(block);
    } catch (const Json::parse_error& e) {
      throw ConfigError(path.string() + ": metadata block is not valid JSON: " + e.what());
    }
  }
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": not a result file: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("metadata")) {
    throw ConfigError(path.string() + ": no metadata block found");
  }
  return doc["metadata"];
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Task> implied_task) {
  const std::string text = read_file(path);
  if (!text.empty() && text[0] == '#') {
    const Json meta = read_metadata(path);
    if (!meta.contains("config")) throw ConfigError(path.string() + ": metadata block has no config");
    return config_from_json(meta["config"], implied_task, {}, path.string());
  }
  return parse_config(text, implied_task, path.string());
}

void validate(const ExperimentConfig& config) {
  validate_impl(config, [](const std::string& pointer, const std::string& message) {
    throw ConfigError("config: " + pointer + ": " + message);
  });
}

}  // namespace photostat::cli
