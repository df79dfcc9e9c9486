#include "locbound/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "locbound/bounds.hpp"
#include "locbound/crb.hpp"
#include "locbound/errors.hpp"
#include "locbound/mlsim.hpp"
#include "locbound/rng.hpp"

namespace locbound::runner {

namespace {

using config::ExperimentConfig;
using config::Mode;

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Cell {
  std::optional<double> value;
  std::optional<int> count;

  std::string text() const {
    if (count) return std::to_string(*count);
    if (value && !std::isnan(*value)) return format_value(*value);
    return {};
  }
};

struct Row {
  double sweep_value = 0.0;
  Cell crb_lb, crb_lb_w, crb_lb_n;
  Cell avg_mean, avg_stderr, avg_median;
  Cell mse, mse_stderr;
  Cell excluded;
};

constexpr const char* kHeader =
    "sweep_value,crb_lb,crb_lb_w,crb_lb_n,avg_crb_mean,avg_crb_stderr,avg_crb_median,"
    "mse,mse_stderr,excluded_trials";

void write_csv(std::ostream& out, const std::vector<Row>& rows) {
  out << kHeader << "\n";
  for (const auto& r : rows) {
    out << format_value(r.sweep_value) << ',' << r.crb_lb.text() << ',' << r.crb_lb_w.text()
        << ',' << r.crb_lb_n.text() << ',' << r.avg_mean.text() << ',' << r.avg_stderr.text()
        << ',' << r.avg_median.text() << ',' << r.mse.text() << ',' << r.mse_stderr.text()
        << ',' << r.excluded.text() << "\n";
  }
}

nlohmann::json config_echo(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["mode"] = config::mode_name(cfg.mode);
  j["gamma"] = cfg.gamma;
  j["snr_db"] = cfg.snr_db;
  j["c"] = cfg.c;
  j["lambda"] = cfg.lambda;
  if (cfg.we_explicit) {
    j["we"] = cfg.we;
  } else {
    j["t_dur"] = cfg.t_dur;
  }
  j["trials"] = cfg.trials;
  j["sensors_per_trial"] = cfg.sensors_per_trial;
  j["grid_half_width"] = cfg.grid.half_width;
  j["grid_step"] = cfg.grid.coarse_step;
  j["grid_refine"] = cfg.grid.refine_iters;
  j["noiseless"] = cfg.noiseless;
  j["sweep_param"] = sweep::name(cfg.sweep_param);
  j["sweep_start"] = cfg.sweep_start;
  j["sweep_stop"] = cfg.sweep_stop;
  j["sweep_points"] = cfg.sweep_points;
  j["sweep_scale"] = cfg.sweep_log ? "log" : "linear";
  j["master_seed"] = cfg.master_seed;
  j["workers"] = cfg.workers;
  return j;
}

int write_outputs(const ExperimentConfig& cfg, const std::vector<Row>& rows,
                  double wall_seconds, bool numeric_failure, std::ostream& log) {
  const std::string path = cfg.out.empty() ? std::string(config::mode_name(cfg.mode)) + ".csv"
                                           : cfg.out;
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      log << "error: cannot open '" << path << "' for writing\n";
      return 3;
    }
    write_csv(out, rows);
    if (!out.flush()) {
      log << "error: failed writing '" << path << "'\n";
      return 3;
    }
  }
  {
    nlohmann::json meta;
    meta["tool"] = "locbound";
    meta["version"] = kToolVersion;
    meta["rng_algorithm"] = rng::kAlgorithmId;
    meta["wall_time_seconds"] = wall_seconds;
    meta["output"] = path;
    meta["config"] = config_echo(cfg);
    std::ofstream out(path + ".meta.json", std::ios::binary);
    if (!out) {
      log << "error: cannot open '" << path << ".meta.json' for writing\n";
      return 3;
    }
    out << meta.dump(2) << "\n";
    if (!out.flush()) {
      log << "error: failed writing '" << path << ".meta.json'\n";
      return 3;
    }
  }
  log << "wrote " << path << " (" << rows.size() << " sweep point"
      << (rows.size() == 1 ? "" : "s") << ", " << format_value(wall_seconds) << " s)\n";
  return numeric_failure ? 2 : 0;
}

void fill_bound_cells(Row& row, const sweep::PointParams& pp) {
  const auto result = bounds::evaluate_bounds(pp.lambda, pp.ch);
  row.crb_lb.value = result.crb_lb;
  row.crb_lb_w.value = result.crb_lb_w;
  row.crb_lb_n.value = result.crb_lb_n;
}

int run_table_mode(const ExperimentConfig& cfg, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  const auto values = cfg.sweep_values();
  const auto base = cfg.base_point();
  bool numeric_failure = false;
  std::vector<Row> rows;
  rows.reserve(values.size());

  for (std::size_t p = 0; p < values.size(); ++p) {
    Row row;
    row.sweep_value = values[p];
    try {
      const auto pp = sweep::apply(base, cfg.sweep_param, values[p]);
      fill_bound_cells(row, pp);
      if (cfg.mode == Mode::kAvgCrb) {
        const auto est = crb::avg_crb(pp.lambda, pp.ch, cfg.trials, cfg.sensors_per_trial,
                                      rng::derive(cfg.master_seed, p), cfg.workers);
        row.avg_mean.value = est.mean;
        row.avg_stderr.value = est.std_err;
        row.avg_median.value = est.median;
        row.excluded.count = est.excluded;
        if (est.exclusion_warning) {
          log << "warning: sweep point " << values[p] << " excluded " << est.excluded
              << " singular trials\n";
        }
        if (est.heavy_tail_flag) {
          log << "warning: sweep point " << values[p]
              << ": one trial contributes more than 10% of the mean CRB\n";
        }
      }
    } catch (const ConvergenceError& e) {
      log << "numeric failure at sweep point " << values[p] << ": " << e.what() << "\n";
      numeric_failure = true;
    } catch (const InsufficientDataError& e) {
      log << "numeric failure at sweep point " << values[p] << ": " << e.what() << "\n";
      numeric_failure = true;
    }
    rows.push_back(row);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return write_outputs(cfg, rows, wall, numeric_failure, log);
}

int run_ml_sim(const ExperimentConfig& cfg, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  const auto base = cfg.base_point();

  mlsim::MlSimConfig sim{base.ch,     base.pulse,        cfg.lambda, cfg.sensors_per_trial,
                         cfg.trials,  cfg.grid,          cfg.master_seed,
                         cfg.noiseless, cfg.workers};
  sweep::Spec spec{cfg.sweep_param, cfg.sweep_values()};

  bool numeric_failure = false;
  std::vector<Row> rows;
  try {
    const auto curve = mlsim::run_mse(sim, spec);
    for (const auto& pt : curve.points) {
      Row row;
      row.sweep_value = pt.sweep_value;
      const auto pp = sweep::apply(base, cfg.sweep_param, pt.sweep_value);
      try {
        row.crb_lb_w.value = bounds::wideband_bound(pp.lambda, pp.ch);
      } catch (const std::domain_error&) {
      }
      row.crb_lb_n.value = bounds::narrowband_bound(pp.lambda, pp.ch);
      if (std::isnan(pt.crb_lb)) {
        numeric_failure = true;
        log << "numeric failure: lower-bound quadrature at sweep point " << pt.sweep_value
            << "\n";
      } else {
        row.crb_lb.value = pt.crb_lb;
      }
      row.avg_mean.value = pt.avg_crb_mean;
      row.avg_stderr.value = pt.avg_crb_stderr;
      row.avg_median.value = pt.avg_crb_median;
      row.mse.value = pt.mse;
      row.mse_stderr.value = pt.mse_stderr;
      row.excluded.count = pt.excluded;
      rows.push_back(row);
    }
  } catch (const ConvergenceError& e) {
    log << "numeric failure: " << e.what() << "\n";
    return 2;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return write_outputs(cfg, rows, wall, numeric_failure, log);
}

int run_verify(const ExperimentConfig& cfg, std::ostream& log) {
  const double gammas[] = {2.5, 3.0, 4.0, 6.0};
  const double lambdas[] = {1e-3, 1e-2, 1e-1};
  const auto base = cfg.base_point();

  bool all_ok = true;
  auto report = [&log](const char* name, bool ok, const std::string& detail) {
    log << (ok ? "PASS  " : "FAIL  ") << name << "  " << detail << "\n";
  };

  try {
    double worst = 0.0;
    for (const double g : gammas) {
      for (const double l : lambdas) {
        model::ChannelParams ch(g, base.ch.c, base.ch.we, base.ch.rho);
        const double numeric = bounds::crb_lb(l, ch, {}, bounds::KernelMode::kRssOnly).value;
        const double closed = bounds::narrowband_bound(l, ch);
        worst = std::max(worst, std::fabs(numeric - closed) / closed);
      }
    }
    const bool ok = worst < 1e-6;
    all_ok &= ok;
    report("narrowband closed form vs quadrature", ok,
           "max relative error " + format_value(worst));
  } catch (const ConvergenceError& e) {
    all_ok = false;
    report("narrowband closed form vs quadrature", false, e.what());
  }

  try {
    double worst = 0.0;
    for (const double g : gammas) {
      for (const double l : lambdas) {
        model::ChannelParams ch(g, base.ch.c, base.ch.we, base.ch.rho);
        const double numeric = bounds::crb_lb(l, ch, {}, bounds::KernelMode::kToaOnly).value;
        const double closed = bounds::wideband_bound(l, ch);
        worst = std::max(worst, std::fabs(numeric - closed) / closed);
      }
    }
    const bool ok = worst < 1e-6;
    all_ok &= ok;
    report("wideband closed form vs quadrature", ok,
           "max relative error " + format_value(worst));
  } catch (const ConvergenceError& e) {
    all_ok = false;
    report("wideband closed form vs quadrature", false, e.what());
  }

  try {
    const auto sandwich = bounds::sandwich_check(cfg.lambda, base.ch);
    const bool ok = sandwich.lower_ok && sandwich.upper_ok;
    all_ok &= ok;
    report("wideband sandwich", ok,
           (sandwich.vacuous ? std::string("lower member vacuous; ") : std::string()) +
               "margins " + format_value(sandwich.lower_margin) + " / " +
               format_value(sandwich.upper_margin));
    report("narrowband gap (informational)", true,
           "gap " + format_value(sandwich.narrowband_gap) + " vs limit " +
               format_value(sandwich.narrowband_limit) +
               (sandwich.narrowband_ok ? " (within)" : " (outside)"));
  } catch (const ConvergenceError& e) {
    all_ok = false;
    report("wideband sandwich", false, e.what());
  }

  return all_ok ? 0 : 2;
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& log) {
  switch (cfg.mode) {
    case Mode::kBounds:
    case Mode::kAvgCrb:
      return run_table_mode(cfg, log);
    case Mode::kMlSim:
      return run_ml_sim(cfg, log);
    case Mode::kVerify:
      return run_verify(cfg, log);
  }
  return 1;
}

}  // namespace locbound::runner
