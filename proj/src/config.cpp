#include "locbound/config.hpp"

#include <algorithm>
#include <cerrno>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <sstream>

#include "locbound/errors.hpp"

namespace locbound::config {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::kBounds: return "bounds";
    case Mode::kAvgCrb: return "avg-crb";
    case Mode::kMlSim: return "ml-sim";
    case Mode::kVerify: return "verify";
  }
  return "?";
}

Mode mode_from_name(const std::string& s) {
  if (s == "bounds") return Mode::kBounds;
  if (s == "avg-crb") return Mode::kAvgCrb;
  if (s == "ml-sim") return Mode::kMlSim;
  if (s == "verify") return Mode::kVerify;
  throw std::invalid_argument("unknown mode '" + s +
                              "' (expected bounds, avg-crb, ml-sim, or verify)");
}

sweep::PointParams ExperimentConfig::base_point() const {
  const double rho = model::snr_from_db(snr_db);
  const double es = 1.0;
  double duration = t_dur;
  double bandwidth;
  if (we_explicit) {
    bandwidth = we;
    // A pulse is only consulted by the ML simulator, which insists on t_dur;
    // synthesize the matching duration when possible so the pair stays
    // consistent, and fall back to a placeholder at we == 0.
    duration = we > 0.0 ? std::sqrt(4.0 * std::numbers::pi * std::numbers::pi / (3.0 * we))
                        : 1.0;
  } else {
    model::Pulse probe(duration, es, 1.0);
    bandwidth = model::effective_bandwidth(probe);
  }
  model::Pulse pulse(duration, es, es / (2.0 * rho));
  model::ChannelParams ch(gamma, c, bandwidth, rho);
  return sweep::PointParams{ch, pulse, lambda};
}

std::vector<double> ExperimentConfig::sweep_values() const {
  return sweep::spaced_values(sweep_start, sweep_stop, sweep_points, sweep_log);
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

struct Problems {
  std::vector<std::string> messages;

  void add(int line, const std::string& text) {
    std::ostringstream msg;
    msg << "line " << line << ": " << text;
    messages.push_back(msg.str());
  }
  void add_global(const std::string& text) { messages.push_back(text); }
};

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

bool parse_double(const std::string& text, double& out) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) return false;
  out = v;
  return true;
}

bool parse_int(const std::string& text, int& out) {
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE || v < INT_MIN || v > INT_MAX) {
    return false;
  }
  out = static_cast<int>(v);
  return true;
}

bool parse_u64(const std::string& text, std::uint64_t& out) {
  if (text.empty() || text[0] == '-') return false;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) return false;
  out = v;
  return true;
}

bool parse_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0") {
    out = false;
    return true;
  }
  return false;
}

const char* const kKnownKeys[] = {
    "mode",          "gamma",      "snr_db",          "c",
    "lambda",        "t_dur",      "we",              "trials",
    "sensors_per_trial", "grid_half_width", "grid_step", "grid_refine",
    "noiseless",     "sweep_param", "sweep_start",    "sweep_stop",
    "sweep_points",  "sweep_scale", "master_seed",    "out",
    "workers"};

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, RawEntry> entries;
  Problems problems;

  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      problems.add(line_no, "expected key=value, got '" + stripped + "'");
      continue;
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      problems.add(line_no, "missing key before '='");
      continue;
    }
    if (std::find_if(std::begin(kKnownKeys), std::end(kKnownKeys),
                     [&key](const char* k) { return key == k; }) == std::end(kKnownKeys)) {
      problems.add(line_no, "unknown key '" + key + "'");
      continue;
    }
    if (const auto it = entries.find(key); it != entries.end()) {
      std::ostringstream msg;
      msg << "duplicate key '" << key << "' (first defined on line " << it->second.line << ")";
      problems.add(line_no, msg.str());
      continue;
    }
    entries.emplace(key, RawEntry{value, line_no});
  }

  ExperimentConfig cfg;

  auto take = [&entries](const char* key) -> const RawEntry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  auto number_field = [&](const char* key, double& target, auto&& check,
                          const char* requirement) {
    const RawEntry* e = take(key);
    if (!e) return;
    double v = 0.0;
    if (!parse_double(e->value, v)) {
      problems.add(e->line, std::string("value for '") + key + "' is not a finite number: '" +
                                e->value + "'");
      return;
    }
    if (!check(v)) {
      std::ostringstream msg;
      msg << "'" << key << "' " << requirement << ", got " << v;
      problems.add(e->line, msg.str());
      return;
    }
    target = v;
  };
  auto int_field = [&](const char* key, int& target, auto&& check, const char* requirement) {
    const RawEntry* e = take(key);
    if (!e) return;
    int v = 0;
    if (!parse_int(e->value, v)) {
      problems.add(e->line,
                   std::string("value for '") + key + "' is not an integer: '" + e->value + "'");
      return;
    }
    if (!check(v)) {
      std::ostringstream msg;
      msg << "'" << key << "' " << requirement << ", got " << v;
      problems.add(e->line, msg.str());
      return;
    }
    target = v;
  };

  if (const RawEntry* e = take("mode")) {
    try {
      cfg.mode = mode_from_name(e->value);
      cfg.mode_set = true;
    } catch (const std::invalid_argument& ex) {
      problems.add(e->line, ex.what());
    }
  }

  number_field("gamma", cfg.gamma, [](double v) { return v > 2.0; },
               "must be > 2 (the aggregate path gain over an infinite field diverges otherwise)");
  number_field("snr_db", cfg.snr_db, [](double) { return true; }, "");
  number_field("c", cfg.c, [](double v) { return v > 0.0; }, "must be > 0");
  number_field("lambda", cfg.lambda, [](double v) { return v > 0.0; }, "must be > 0");

  const RawEntry* t_dur_entry = take("t_dur");
  const RawEntry* we_entry = take("we");
  if (t_dur_entry && we_entry) {
    std::ostringstream msg;
    msg << "'we' conflicts with 't_dur' on line " << t_dur_entry->line
        << "; specify exactly one";
    problems.add(we_entry->line, msg.str());
  } else if (we_entry) {
    cfg.we_explicit = true;
    number_field("we", cfg.we, [](double v) { return v >= 0.0; }, "must be >= 0");
  } else {
    number_field("t_dur", cfg.t_dur, [](double v) { return v > 0.0; }, "must be > 0");
  }

  int_field("trials", cfg.trials, [](int v) { return v >= 1; }, "must be >= 1");
  int_field("sensors_per_trial", cfg.sensors_per_trial, [](int v) { return v >= 2; },
            "must be >= 2");
  int_field("workers", cfg.workers, [](int v) { return v >= 1; }, "must be >= 1");

  number_field("grid_half_width", cfg.grid.half_width, [](double v) { return v > 0.0; },
               "must be > 0");
  number_field("grid_step", cfg.grid.coarse_step, [](double v) { return v > 0.0; },
               "must be > 0");
  int_field("grid_refine", cfg.grid.refine_iters, [](int v) { return v >= 0 && v <= 12; },
            "must be in [0, 12]");
  if (const RawEntry* e = take("grid_step")) {
    if (cfg.grid.coarse_step >= cfg.grid.half_width) {
      problems.add(e->line, "'grid_step' must be smaller than 'grid_half_width'");
    }
  }

  if (const RawEntry* e = take("noiseless")) {
    if (!parse_bool(e->value, cfg.noiseless)) {
      problems.add(e->line, "value for 'noiseless' must be true or false, got '" + e->value + "'");
    }
  }

  if (const RawEntry* e = take("sweep_param")) {
    try {
      cfg.sweep_param = sweep::param_from_name(e->value);
    } catch (const std::invalid_argument& ex) {
      problems.add(e->line, ex.what());
    }
  }
  number_field("sweep_start", cfg.sweep_start, [](double) { return true; }, "");
  number_field("sweep_stop", cfg.sweep_stop, [](double) { return true; }, "");
  int_field("sweep_points", cfg.sweep_points, [](int v) { return v >= 1; }, "must be >= 1");
  if (const RawEntry* e = take("sweep_scale")) {
    if (e->value == "log") {
      cfg.sweep_log = true;
    } else if (e->value == "linear") {
      cfg.sweep_log = false;
    } else {
      problems.add(e->line, "value for 'sweep_scale' must be linear or log, got '" + e->value + "'");
    }
  }

  if (const RawEntry* e = take("master_seed")) {
    if (!parse_u64(e->value, cfg.master_seed)) {
      problems.add(e->line, "value for 'master_seed' is not a 64-bit unsigned integer: '" +
                                e->value + "'");
    }
  }
  if (const RawEntry* e = take("out")) cfg.out = e->value;

  // Cross-field rules. Anchor messages to the most relevant line when one
  // exists, otherwise report them as global.
  const double lo = std::min(cfg.sweep_start, cfg.sweep_stop);
  switch (cfg.sweep_param) {
    case sweep::Param::kGamma:
      if (lo <= 2.0) {
        problems.add_global("sweep over gamma must stay above 2, range starts at " +
                            std::to_string(lo));
      }
      break;
    case sweep::Param::kLambda:
    case sweep::Param::kTDur:
      if (lo <= 0.0) {
        problems.add_global(std::string("sweep over ") + sweep::name(cfg.sweep_param) +
                            " must stay positive");
      }
      break;
    case sweep::Param::kSnrDb:
      break;
  }
  if (cfg.sweep_log && lo <= 0.0) {
    problems.add_global("log sweep scale requires positive endpoints");
  }
  if (cfg.we_explicit && cfg.sweep_param == sweep::Param::kTDur) {
    problems.add(we_entry->line, "sweeping t_dur conflicts with an explicit 'we'");
  }
  if (cfg.we_explicit && cfg.mode_set && cfg.mode == Mode::kMlSim) {
    problems.add(we_entry->line, "ml-sim needs a pulse duration; use 't_dur' instead of 'we'");
  }

  if (!problems.messages.empty()) {
    std::ostringstream msg;
    msg << "invalid experiment config (" << problems.messages.size() << " problem"
        << (problems.messages.size() == 1 ? "" : "s") << "):";
    for (const auto& m : problems.messages) msg << "\n  " << m;
    throw ConfigError(msg.str());
  }
  return cfg;
}

}  // namespace locbound::config
