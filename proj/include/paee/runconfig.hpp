#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "paee/csv.hpp"
#include "paee/error.hpp"
#include "paee/experiment.hpp"

namespace paee {

// Subcommand membership mask for config keys.
enum CmdMask : uint32_t {
  kCmdSynth = 1,
  kCmdTrain = 2,
  kCmdEval = 4,
  kCmdSweep = 8,
  kCmdPredict = 16,
  kCmdAll = 31,
};

struct KeyDef {
  const char* name;
  uint32_t cmds;
  const char* def;  // nullptr = required, no default
  const char* help;
};

// Single source of truth for every config-file key / CLI flag / env override
// (env form: PAEE_<KEY> upper-cased).
inline const std::vector<KeyDef>& key_defs() {
  static const std::vector<KeyDef> defs = {
      {"seed", kCmdAll, "0", "master seed for all derived randomness"},
      {"workers", kCmdAll, "", "fold worker threads (default: hardware cores)"},
      {"out", kCmdAll, "out", "output directory"},
      {"data", kCmdTrain | kCmdEval | kCmdSweep | kCmdPredict, nullptr, "dataset directory"},

      {"subjects", kCmdSynth, "8", "number of synthetic subjects"},
      {"indoor_fraction", kCmdSynth, "0.375", "fraction of subjects with indoor-only data"},
      {"duration", kCmdSynth, "1200", "seconds of recording per subject"},
      {"lag_tau", kCmdSynth, "8", "metabolic lag time constant, seconds"},
      {"noise_sd", kCmdSynth, "0.15", "per-breath observation noise, kcal/min"},

      {"variant", kCmdTrain | kCmdSweep, "GA", "model variant: GA, GA_ID, GA_AC, GA_ID_AC"},
      {"agg", kCmdTrain | kCmdSweep, "sd", "window aggregation: mean, sd, iqr, pd"},
      {"seq_size", kCmdTrain | kCmdSweep, "50", "timesteps per sequence"},
      {"window_sec", kCmdTrain | kCmdSweep, "120", "lookback window, seconds"},
      {"hidden", kCmdTrain | kCmdSweep, "32,256,32", "recurrent layer sizes, comma-separated"},
      {"dropout", kCmdTrain | kCmdSweep, "0.5", "dropout probability on recurrent outputs"},
      {"epochs", kCmdTrain | kCmdSweep, "50", "training epochs"},
      {"batch_size", kCmdTrain | kCmdSweep, "512", "minibatch size"},
      {"lr", kCmdTrain | kCmdSweep, "0.001", "learning rate"},
      {"patience", kCmdTrain | kCmdSweep, "0", "early-stop patience in epochs, 0 = off"},

      {"test", kCmdTrain, nullptr, "held-out test subject id"},
      {"grid", kCmdSweep, "",
       "sweep entries 'seq,window_sec,agg,variant' separated by ';' (overrides agg/variant keys)"},
      {"paper_grid", kCmdSweep, "0",
       "1 = sweep the published 7x4 size/window grid with the configured agg and variant"},

      {"model", kCmdEval | kCmdPredict, nullptr, "saved model file"},
      {"subject", kCmdEval | kCmdPredict, "", "subject id (eval: empty = all subjects)"},
      {"window", kCmdPredict, "breath", "prediction window: 'breath' or seconds"},
  };
  return defs;
}

inline const KeyDef* find_key(std::string_view name) {
  for (const auto& k : key_defs()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

class RunConfig {
 public:
  // Precedence: defaults < config file < environment < flags.
  static RunConfig resolve(uint32_t cmd, const std::string& config_path,
                           const std::map<std::string, std::string>& flag_values) {
    RunConfig rc;
    rc.cmd_ = cmd;
    for (const auto& k : key_defs()) {
      if ((k.cmds & cmd) && k.def) rc.vals_[k.name] = k.def;
    }
    if (!config_path.empty()) rc.load_file(config_path);
    for (const auto& k : key_defs()) {
      if (!(k.cmds & cmd)) continue;
      std::string env_name = "PAEE_";
      for (const char* c = k.name; *c; ++c) env_name += (char)std::toupper(*c);
      if (const char* v = std::getenv(env_name.c_str())) rc.vals_[k.name] = v;
    }
    for (const auto& [k, v] : flag_values) rc.vals_[k] = v;
    return rc;
  }

  bool has(const std::string& key) const {
    auto it = vals_.find(key);
    return it != vals_.end() && !it->second.empty();
  }

  const std::string& get(const std::string& key) const {
    auto it = vals_.find(key);
    if (it == vals_.end() || it->second.empty()) {
      throw ConfigError("missing required config key '" + key + "'");
    }
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    auto it = vals_.find(key);
    return it == vals_.end() || it->second.empty() ? fallback : it->second;
  }

  uint64_t get_u64(const std::string& key) const {
    const std::string& s = get(key);
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw ConfigError("key '" + key + "': expected unsigned integer, got '" + s + "'");
    }
    return v;
  }

  size_t get_size(const std::string& key) const { return (size_t)get_u64(key); }

  double get_dbl(const std::string& key) const {
    auto v = csv::parse_double(get(key));
    if (!v) throw ConfigError("key '" + key + "': expected number, got '" + get(key) + "'");
    return *v;
  }

  bool get_bool(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw ConfigError("key '" + key + "': expected 0/1/true/false, got '" + s + "'");
  }

  std::string dump() const {
    std::string out;
    for (const auto& [k, v] : vals_) {
      out += k;
      out += " = ";
      out += v;
      out += '\n';
    }
    return out;
  }

 private:
  void load_file(const std::string& path) {
    csv::LineReader rd(path);
    std::string line;
    while (rd.next(line)) {
      std::string_view sv = csv::trim(line);
      if (sv.empty() || sv[0] == '#') continue;
      const size_t eq = sv.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(path + ":" + std::to_string(rd.line_no()) +
                          ": expected 'key = value'");
      }
      const std::string key(csv::trim(sv.substr(0, eq)));
      const std::string val(csv::trim(sv.substr(eq + 1)));
      const KeyDef* def = find_key(key);
      if (!def) {
        throw ConfigError(path + ":" + std::to_string(rd.line_no()) + ": unknown key '" + key +
                          "'");
      }
      // Keys owned by other subcommands are valid in a shared file; only the
      // active subcommand's keys are consumed.
      if (def->cmds & cmd_) vals_[key] = val;
    }
  }

  uint32_t cmd_ = 0;
  std::map<std::string, std::string> vals_;
};

// ---------------------------------------------------------------------------
// Composite value parsing

inline std::array<size_t, 3> parse_hidden(const std::string& s) {
  auto parts = csv::split(s);
  if (parts.size() != 3) throw ConfigError("hidden sizes need exactly 3 comma-separated values");
  std::array<size_t, 3> out{};
  for (size_t i = 0; i < 3; ++i) {
    auto v = csv::parse_int(parts[i]);
    if (!v || *v <= 0) throw ConfigError("bad hidden size '" + std::string(parts[i]) + "'");
    out[i] = (size_t)*v;
  }
  return out;
}

inline std::vector<GridEntry> parse_grid(const std::string& s) {
  std::vector<GridEntry> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    const size_t sep = s.find(';', pos);
    const std::string_view entry =
        csv::trim(std::string_view(s).substr(pos, sep == std::string::npos ? sep : sep - pos));
    if (!entry.empty()) {
      auto f = csv::split(entry);
      if (f.size() != 4) {
        throw ConfigError("grid entry '" + std::string(entry) +
                          "' must be seq,window_sec,agg,variant");
      }
      GridEntry g;
      auto seq = csv::parse_int(csv::trim(f[0]));
      auto win = csv::parse_double(csv::trim(f[1]));
      if (!seq || *seq <= 0 || !win || *win <= 0) {
        throw ConfigError("grid entry '" + std::string(entry) + "': bad seq or window");
      }
      g.seq_size = (size_t)*seq;
      g.window_sec = *win;
      g.agg = aggregation_from_string(csv::trim(f[2]));
      g.variant = variant_from_string(csv::trim(f[3]));
      out.push_back(g);
    }
    if (sep == std::string::npos) break;
    pos = sep + 1;
  }
  return out;
}

}  // namespace paee
