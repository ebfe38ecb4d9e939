// Copyright 2026 the spc-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// spc: command-line front end. Links only the shared C API.

#include <spc/spc.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitCalibration = 4;

int exit_code_for(spc_status status) {
  switch (status) {
    case SPC_OK:
      return 0;
    case SPC_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    case SPC_ERR_DATA:
    case SPC_ERR_IO:
      return kExitData;
    case SPC_ERR_CALIBRATION:
      return kExitCalibration;
    default:
      return 1;
  }
}

[[noreturn]] void fail(spc_status status) {
  std::cerr << "error: " << spc_last_error() << "\n";
  std::exit(exit_code_for(status));
}

void check(spc_status status) {
  if (status != SPC_OK) fail(status);
}

struct ContextHandle {
  spc_context* ctx = nullptr;
  ~ContextHandle() { spc_context_destroy(ctx); }
};

// Options shared by every subcommand.
struct CommonOptions {
  int n = 5;
  int k = 50;
  std::uint64_t seed = 42;
  int threads = 0;
  std::string out_dir = "spc-out";
  std::string cache_dir;
  double target_arl0 = 370.4;
};

struct StudyOptions {
  std::string model = "all";
  std::string a_grid;
  std::vector<std::string> scales{"all"};
  std::vector<std::string> locations{"all"};
  std::string qn_variant = "pairs";
  std::int64_t replicates = 0;  // 0: per-study default
  std::int64_t calibration_replicates = 20000;
  std::vector<double> phis{1.0, 1.4};
};

struct ChartOptions {
  std::string phase1;
  std::string phase2;
  std::string scale = "sd";
  std::string location = "mean";
  std::string qn_variant = "pairs";
  std::int64_t calibration_replicates = 20000;
};

struct ReproduceOptions {
  std::int64_t mse_replicates = 0;
  std::int64_t arl_replicates = 0;
  std::int64_t calibration_replicates = 20000;
};

std::vector<std::string> split_list(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(item);
    }
  }
  return out;
}

bool parse_scale_kind(const std::string& name, const std::string& qn_variant,
                      spc_scale_kind* out) {
  if (name == "sd") *out = SPC_SCALE_SD;
  else if (name == "mad") *out = SPC_SCALE_MAD;
  else if (name == "qn") *out = qn_variant == "rc" ? SPC_SCALE_QN_RC : SPC_SCALE_QN;
  else if (name == "qn-rc") *out = SPC_SCALE_QN_RC;
  else if (name == "mslog") *out = SPC_SCALE_MSLOG;
  else return false;
  return true;
}

bool parse_location_kind(const std::string& name, spc_location_kind* out) {
  if (name == "mean") *out = SPC_LOC_MEAN;
  else if (name == "huber") *out = SPC_LOC_HUBER;
  else if (name == "hd") *out = SPC_LOC_HD;
  else if (name == "hl") *out = SPC_LOC_HL;
  else return false;
  return true;
}

// Severity grids: "2", "2,3,4" or "lo:step:hi" (inclusive).
bool parse_a_grid(const std::string& text, std::vector<double>* out) {
  out->clear();
  const auto parse_one = [](const std::string& s, double* v) {
    try {
      std::size_t pos = 0;
      *v = std::stod(s, &pos);
      return pos == s.size();
    } catch (...) {
      return false;
    }
  };
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string lo_s, step_s, hi_s;
    if (!std::getline(ss, lo_s, ':') || !std::getline(ss, step_s, ':') ||
        !std::getline(ss, hi_s))
      return false;
    double lo = 0, step = 0, hi = 0;
    if (!parse_one(lo_s, &lo) || !parse_one(step_s, &step) || !parse_one(hi_s, &hi)) return false;
    if (!(step > 0.0) || hi < lo) return false;
    for (double a = lo; a <= hi + 1e-9; a += step) out->push_back(a);
    return !out->empty();
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    if (!parse_one(item, &v)) return false;
    out->push_back(v);
  }
  return !out->empty();
}

// Flat "key = value" config file; keys mirror long flag names without the
// leading dashes. Returns injectable argv tokens.
std::vector<std::string> load_config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    std::cerr << "error: cannot open config file " << path << "\n";
    std::exit(kExitUsage);
  }
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: " << path << ":" << line_no << ": expected 'key = value'\n";
      std::exit(kExitUsage);
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::cerr << "error: " << path << ":" << line_no << ": empty key\n";
      std::exit(kExitUsage);
    }
    tokens.push_back("--" + key);
    if (!value.empty()) tokens.push_back(value);
  }
  return tokens;
}

std::string build_echo(const std::map<std::string, std::string>& entries) {
  std::string echo;
  for (const auto& [key, value] : entries) echo += key + " = " + value + "\n";
  return echo;
}

void add_common(CLI::App* cmd, CommonOptions* common) {
  cmd->add_option("--n", common->n, "Subgroup size");
  cmd->add_option("--k", common->k, "Number of Phase I subgroups");
  cmd->add_option("--seed", common->seed, "Root seed for Monte Carlo draws");
  cmd->add_option("--threads", common->threads, "Worker threads (0 = all cores)");
  cmd->add_option("--out", common->out_dir, "Output directory");
  cmd->add_option("--cache-dir", common->cache_dir,
                  "Calibration cache directory (default $SPC_CACHE_DIR or ./.spc-cache)");
  cmd->add_option("--target-arl0", common->target_arl0, "In-control ARL design target");
}

void add_study(CLI::App* cmd, StudyOptions* study, bool with_phi) {
  cmd->add_option("--model", study->model, "Outlier model: clean|m1|m2|m3|all");
  cmd->add_option("--a", study->a_grid, "Severity grid: x, x,y,z or lo:step:hi");
  cmd->add_option("--scale", study->scales, "Scale estimators (sd|mad|qn|qn-rc|mslog|all)");
  cmd->add_option("--loc", study->locations, "Location estimators (mean|huber|hd|hl|all)");
  cmd->add_option("--qn-variant", study->qn_variant, "qn form: pairs|rc");
  cmd->add_option("--replicates", study->replicates, "Monte Carlo replicates per cell");
  cmd->add_option("--calibration-replicates", study->calibration_replicates,
                  "Replicates for alpha calibration");
  if (with_phi) cmd->add_option("--phi", study->phis, "Phase II disturbance multipliers");
}

struct ResolvedStudy {
  std::vector<spc_study_cell> cells;
  std::vector<spc_scale_kind> scales;
  std::vector<spc_location_kind> locations;
};

// Validates and expands study flags, reporting every violation at once.
ResolvedStudy resolve_study(const CommonOptions& common, const StudyOptions& study,
                            bool default_grid_includes_clean) {
  std::vector<std::string> errors;
  ResolvedStudy resolved;

  if (common.n < 2) errors.push_back("--n must be at least 2");
  if (common.k < 2) errors.push_back("--k must be at least 2");
  if (!(common.target_arl0 > 1.0)) errors.push_back("--target-arl0 must exceed 1");
  if (study.replicates != 0 && study.replicates < 100)
    errors.push_back("--replicates must be at least 100");
  if (study.calibration_replicates < 100)
    errors.push_back("--calibration-replicates must be at least 100");
  if (study.qn_variant != "pairs" && study.qn_variant != "rc")
    errors.push_back("--qn-variant must be pairs or rc");
  for (double phi : study.phis)
    if (!(phi > 0.0)) errors.push_back("--phi values must be positive");

  std::vector<double> a_values;
  if (!study.a_grid.empty() && !parse_a_grid(study.a_grid, &a_values))
    errors.push_back("--a grid '" + study.a_grid + "' is malformed");

  const auto add_model_cells = [&](spc_model_kind model, const std::vector<double>& grid) {
    for (double a : grid) {
      if (a < 1.0) errors.push_back("--a values must be >= 1");
      if (model == SPC_MODEL_M2 && a != std::floor(a))
        errors.push_back("--model m2 requires integer --a (chi-square degrees of freedom), got " +
                         std::to_string(a));
      resolved.cells.push_back({model, a});
    }
  };

  if (study.model == "all") {
    if (!study.a_grid.empty())
      errors.push_back("--a requires a single --model (the default grid covers all models)");
    if (default_grid_includes_clean) resolved.cells.push_back({SPC_MODEL_CLEAN, 1.0});
    std::vector<double> wide;
    for (double a = 1.0; a <= 4.0 + 1e-9; a += 0.5) wide.push_back(a);
    add_model_cells(SPC_MODEL_M1, wide);
    add_model_cells(SPC_MODEL_M2, {2.0, 3.0, 4.0});
    add_model_cells(SPC_MODEL_M3, wide);
  } else if (study.model == "clean") {
    resolved.cells.push_back({SPC_MODEL_CLEAN, 1.0});
  } else {
    spc_model_kind model = SPC_MODEL_CLEAN;
    if (study.model == "m1") model = SPC_MODEL_M1;
    else if (study.model == "m2") model = SPC_MODEL_M2;
    else if (study.model == "m3") model = SPC_MODEL_M3;
    else errors.push_back("--model must be clean|m1|m2|m3|all, got '" + study.model + "'");
    if (errors.empty()) {
      if (a_values.empty())
        a_values = model == SPC_MODEL_M2 ? std::vector<double>{2.0, 3.0, 4.0}
                                         : std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
      add_model_cells(model, a_values);
    }
  }

  std::vector<std::string> scale_names = split_list(study.scales);
  if (scale_names.size() == 1 && scale_names[0] == "all")
    scale_names = {"sd", "mad", "qn", "mslog"};
  for (const auto& name : scale_names) {
    spc_scale_kind kind;
    if (!parse_scale_kind(name, study.qn_variant, &kind))
      errors.push_back("unknown scale estimator '" + name + "' (expected sd|mad|qn|qn-rc|mslog)");
    else
      resolved.scales.push_back(kind);
  }

  std::vector<std::string> loc_names = split_list(study.locations);
  if (loc_names.size() == 1 && loc_names[0] == "all")
    loc_names = {"mean", "huber", "hd", "hl"};
  for (const auto& name : loc_names) {
    spc_location_kind kind;
    if (!parse_location_kind(name, &kind))
      errors.push_back("unknown location estimator '" + name + "' (expected mean|huber|hd|hl)");
    else
      resolved.locations.push_back(kind);
  }

  if (!errors.empty()) {
    std::cerr << "usage error" << (errors.size() > 1 ? "s" : "") << ":\n";
    for (const auto& e : errors) std::cerr << "  - " << e << "\n";
    std::exit(kExitUsage);
  }
  return resolved;
}

spc_context* make_context(const CommonOptions& common, ContextHandle* handle) {
  check(spc_context_create(common.cache_dir.empty() ? nullptr : common.cache_dir.c_str(),
                           common.threads, &handle->ctx));
  return handle->ctx;
}

int run_study_command(spc_study_kind kind, const CommonOptions& common,
                      const StudyOptions& study) {
  ResolvedStudy resolved = resolve_study(common, study, true);
  ContextHandle handle;
  spc_context* ctx = make_context(common, &handle);

  std::map<std::string, std::string> echo;
  echo["command"] = kind == SPC_STUDY_MSE ? "mse" : "arl";
  echo["model"] = study.model;
  if (!study.a_grid.empty()) echo["a"] = study.a_grid;
  echo["qn-variant"] = study.qn_variant;
  echo["out"] = common.out_dir;
  const std::string echo_text = build_echo(echo);

  spc_study_options options{};
  options.kind = kind;
  options.n = common.n;
  options.k = common.k;
  options.replicates = study.replicates;
  options.calibration_replicates = study.calibration_replicates;
  options.target_arl0 = common.target_arl0;
  options.seed = common.seed;
  options.cells = resolved.cells.data();
  options.n_cells = resolved.cells.size();
  options.scales = resolved.scales.data();
  options.n_scales = resolved.scales.size();
  options.locations = resolved.locations.data();
  options.n_locations = resolved.locations.size();
  options.phis = study.phis.data();
  options.n_phis = study.phis.size();
  options.config_echo = echo_text.c_str();

  spc_table* table = nullptr;
  check(spc_study_run(ctx, &options, &table));
  std::unique_ptr<spc_table, decltype(&spc_table_destroy)> guard(table, &spc_table_destroy);

  const std::filesystem::path out_dir = common.out_dir;
  std::filesystem::create_directories(out_dir);
  const auto csv = out_dir / (kind == SPC_STUDY_MSE ? "mse.csv" : "arl.csv");
  check(spc_table_write_csv(table, csv.string().c_str()));
  check(spc_table_write_figure_data(table, (out_dir / "figures").string().c_str()));

  size_t rows = 0;
  check(spc_table_num_rows(table, &rows));
  std::cout << "wrote " << csv.string() << " (" << rows << " rows) and figure data under "
            << (out_dir / "figures").string() << "\n";
  return 0;
}

int run_calibrate_command(const CommonOptions& common, const StudyOptions& study) {
  ResolvedStudy resolved = resolve_study(common, study, true);
  ContextHandle handle;
  spc_context* ctx = make_context(common, &handle);

  for (spc_scale_kind scale : resolved.scales) {
    double f = 0.0;
    check(spc_correction_factor(ctx, scale, common.n, 0, &f));
    std::cout << "correction scale=" << static_cast<int>(scale) << " n=" << common.n << " -> "
              << f << "\n";
  }
  // Huber's auxiliary MAD acts on the k subgroup scale values.
  double mad_k = 0.0;
  check(spc_correction_factor(ctx, SPC_SCALE_MAD, common.k, 0, &mad_k));

  for (spc_scale_kind scale : resolved.scales) {
    for (spc_location_kind loc : resolved.locations) {
      double alpha = 0.0;
      check(spc_calibrate_alpha(ctx, scale, loc, common.n, common.k, common.target_arl0,
                                study.calibration_replicates, &alpha));
      std::cout << "alpha_star scale=" << static_cast<int>(scale)
                << " loc=" << static_cast<int>(loc) << " n=" << common.n << " k=" << common.k
                << " -> " << alpha << "\n";
    }
  }
  std::cout << "calibration cache warmed\n";
  return 0;
}

int run_chart_command(const CommonOptions& common, const ChartOptions& chart_opts,
                      bool explicit_n) {
  std::vector<std::string> errors;
  spc_scale_kind scale = SPC_SCALE_SD;
  spc_location_kind location = SPC_LOC_MEAN;
  if (!parse_scale_kind(chart_opts.scale, chart_opts.qn_variant, &scale))
    errors.push_back("unknown scale estimator '" + chart_opts.scale + "'");
  if (!parse_location_kind(chart_opts.location, &location))
    errors.push_back("unknown location estimator '" + chart_opts.location + "'");
  if (chart_opts.phase1.empty()) errors.push_back("--phase1 CSV is required");
  if (!(common.target_arl0 > 1.0)) errors.push_back("--target-arl0 must exceed 1");
  if (!errors.empty()) {
    std::cerr << "usage error" << (errors.size() > 1 ? "s" : "") << ":\n";
    for (const auto& e : errors) std::cerr << "  - " << e << "\n";
    return kExitUsage;
  }

  ContextHandle handle;
  spc_context* ctx = make_context(common, &handle);

  spc_subgroups* sg = nullptr;
  check(spc_subgroups_read_csv(chart_opts.phase1.c_str(), &sg));
  std::unique_ptr<spc_subgroups, decltype(&spc_subgroups_destroy)> sg_guard(
      sg, &spc_subgroups_destroy);
  int k = 0, n = 0;
  check(spc_subgroups_dims(sg, &k, &n));
  const double* data = nullptr;
  check(spc_subgroups_data(sg, &data));
  if (explicit_n && n != common.n) {
    std::cerr << "error: " << chart_opts.phase1 << " has subgroups of size " << n
              << " but --n was " << common.n << "\n";
    return kExitData;
  }

  spc_chart* chart = nullptr;
  check(spc_chart_build(ctx, data, k, n, scale, location, common.target_arl0,
                        chart_opts.calibration_replicates, &chart));
  std::unique_ptr<spc_chart, decltype(&spc_chart_destroy)> chart_guard(chart, &spc_chart_destroy);

  std::map<std::string, std::string> echo;
  echo["command"] = "chart";
  echo["phase1"] = chart_opts.phase1;
  if (!chart_opts.phase2.empty()) echo["phase2"] = chart_opts.phase2;
  echo["scale"] = chart_opts.scale;
  echo["location"] = chart_opts.location;
  echo["seed"] = std::to_string(common.seed);
  const std::string echo_text = build_echo(echo);

  const std::filesystem::path out_dir = common.out_dir;
  std::filesystem::create_directories(out_dir);
  const auto limits_path = out_dir / "limits.csv";
  check(spc_chart_write_limits_csv(chart, limits_path.string().c_str(), echo_text.c_str()));

  spc_chart_summary summary{};
  check(spc_chart_get_summary(chart, &summary));
  std::cout << "center = " << summary.center << "\nlcl = " << summary.lcl
            << "\nucl = " << summary.ucl << "\nalpha_star = " << summary.alpha_star << "\n";
  std::cout << "wrote " << limits_path.string() << "\n";

  if (!chart_opts.phase2.empty()) {
    const auto flags_path = out_dir / "phase2_flags.csv";
    check(spc_chart_apply_csv(chart, chart_opts.phase2.c_str(), flags_path.string().c_str(),
                              echo_text.c_str()));
    std::cout << "wrote " << flags_path.string() << "\n";
  }
  return 0;
}

int run_reproduce_command(const CommonOptions& common, const ReproduceOptions& repro) {
  ContextHandle handle;
  spc_context* ctx = make_context(common, &handle);

  std::map<std::string, std::string> echo;
  echo["command"] = "reproduce";
  echo["out"] = common.out_dir;
  const std::string echo_text = build_echo(echo);

  spc_reproduce_options options{};
  options.n = common.n;
  options.k = common.k;
  options.mse_replicates = repro.mse_replicates;
  options.arl_replicates = repro.arl_replicates;
  options.calibration_replicates = repro.calibration_replicates;
  options.target_arl0 = common.target_arl0;
  options.seed = common.seed;
  options.config_echo = echo_text.c_str();

  check(spc_reproduce(ctx, &options, common.out_dir.c_str()));

  // Surface the trend-check summary on stdout.
  const std::filesystem::path summary = std::filesystem::path(common.out_dir) / "summary.csv";
  std::ifstream in(summary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') std::cout << line << "\n";
  }
  std::cout << "wrote study tables, figure data and summary under " << common.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust S-chart toolkit: robust Phase I scale estimation, ARL-calibrated "
               "control limits and Monte Carlo efficiency/run-length studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spc_version()));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CommonOptions common;
  StudyOptions study;
  ChartOptions chart_opts;
  ReproduceOptions repro;

  CLI::App* calibrate = app.add_subcommand("calibrate", "Pre-warm the calibration cache");
  add_common(calibrate, &common);
  add_study(calibrate, &study, false);

  CLI::App* mse = app.add_subcommand("mse", "Phase I efficiency (MSE) study");
  add_common(mse, &common);
  add_study(mse, &study, false);

  CLI::App* arl = app.add_subcommand("arl", "Phase II average-run-length study");
  add_common(arl, &common);
  add_study(arl, &study, true);

  CLI::App* chart = app.add_subcommand("chart", "Build a chart from Phase I data, "
                                                "optionally flag Phase II subgroups");
  add_common(chart, &common);
  chart->add_option("--phase1", chart_opts.phase1, "Phase I subgroup CSV (one row per subgroup)");
  chart->add_option("--phase2", chart_opts.phase2, "Phase II subgroup CSV to flag");
  chart->add_option("--scale", chart_opts.scale, "Scale estimator");
  chart->add_option("--loc", chart_opts.location, "Location estimator");
  chart->add_option("--qn-variant", chart_opts.qn_variant, "qn form: pairs|rc");
  chart->add_option("--calibration-replicates", chart_opts.calibration_replicates,
                    "Replicates for alpha calibration");

  CLI::App* reproduce =
      app.add_subcommand("reproduce", "Run the full default study grid and trend checks");
  add_common(reproduce, &common);
  reproduce->add_option("--mse-replicates", repro.mse_replicates, "MSE replicates per cell");
  reproduce->add_option("--arl-replicates", repro.arl_replicates, "ARL replicates per cell");
  reproduce->add_option("--calibration-replicates", repro.calibration_replicates,
                        "Replicates for alpha calibration");

  // --config <file>: flat key = value defaults, overridden by explicit
  // flags (handled by injecting the file's tokens before the user's).
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + i);
    } else {
      ++i;
    }
  }
  if (!config_path.empty()) {
    if (args.empty()) {
      std::cerr << "error: --config requires a subcommand\n";
      return kExitUsage;
    }
    const std::vector<std::string> injected = load_config_tokens(config_path);
    args.insert(args.begin() + 1, injected.begin(), injected.end());
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  const bool explicit_n = chart->count("--n") > 0;
  if (app.got_subcommand(calibrate)) return run_calibrate_command(common, study);
  if (app.got_subcommand(mse)) return run_study_command(SPC_STUDY_MSE, common, study);
  if (app.got_subcommand(arl)) return run_study_command(SPC_STUDY_ARL, common, study);
  if (app.got_subcommand(chart)) return run_chart_command(common, chart_opts, explicit_n);
  if (app.got_subcommand(reproduce)) return run_reproduce_command(common, repro);
  return kExitUsage;
}
