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

#include "spc/spc.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "calibration_service.hpp"
#include "calibration_store.hpp"
#include "chart.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "simulation.hpp"
#include "special_functions.hpp"
#include "version.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

// Translate core exceptions into status codes at the ABI boundary.
template <typename Fn>
spc_status guarded(Fn&& fn) {
  try {
    fn();
    return SPC_OK;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return SPC_ERR_INVALID_ARGUMENT;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return SPC_ERR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    set_error(e.what());
    return SPC_ERR_INVALID_ARGUMENT;
  } catch (const spc::DataError& e) {
    set_error(e.what());
    return SPC_ERR_DATA;
  } catch (const spc::CalibrationError& e) {
    set_error(e.what());
    return SPC_ERR_CALIBRATION;
  } catch (const spc::IoError& e) {
    set_error(e.what());
    return SPC_ERR_IO;
  } catch (const std::exception& e) {
    set_error(e.what());
    return SPC_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return SPC_ERR_INTERNAL;
  }
}

spc_status require(bool condition, const char* message) {
  if (condition) return SPC_OK;
  set_error(message);
  return SPC_ERR_INVALID_ARGUMENT;
}

spc::ScaleSpec to_scale_spec(spc_scale_kind kind) {
  spc::ScaleSpec spec;
  switch (kind) {
    case SPC_SCALE_SD:
      spec.kind = spc::ScaleKind::sd;
      break;
    case SPC_SCALE_MAD:
      spec.kind = spc::ScaleKind::mad;
      break;
    case SPC_SCALE_QN:
      spec.kind = spc::ScaleKind::qn;
      break;
    case SPC_SCALE_QN_RC:
      spec.kind = spc::ScaleKind::qn;
      spec.qn_variant = spc::QnVariant::order_statistic;
      break;
    case SPC_SCALE_MSLOG:
      spec.kind = spc::ScaleKind::mslog;
      break;
    default:
      throw std::invalid_argument("unknown scale kind");
  }
  return spec;
}

spc::LocationKind to_location_kind(spc_location_kind kind) {
  switch (kind) {
    case SPC_LOC_MEAN:
      return spc::LocationKind::mean;
    case SPC_LOC_HUBER:
      return spc::LocationKind::huber;
    case SPC_LOC_HD:
      return spc::LocationKind::hd;
    case SPC_LOC_HL:
      return spc::LocationKind::hl;
    default:
      throw std::invalid_argument("unknown location kind");
  }
}

spc::ModelKind to_model_kind(spc_model_kind kind) {
  switch (kind) {
    case SPC_MODEL_CLEAN:
      return spc::ModelKind::clean;
    case SPC_MODEL_M1:
      return spc::ModelKind::diffuse_symmetric;
    case SPC_MODEL_M2:
      return spc::ModelKind::diffuse_asymmetric;
    case SPC_MODEL_M3:
      return spc::ModelKind::localized;
    default:
      throw std::invalid_argument("unknown model kind");
  }
}

std::string echo_or_empty(const char* config_echo) {
  return config_echo == nullptr ? std::string() : std::string(config_echo);
}

}  // namespace

struct spc_context {
  std::unique_ptr<spc::CalibrationStore> store;
  std::unique_ptr<spc::CalibrationService> service;
  int threads = 0;
};

struct spc_chart {
  spc::ChartConfig config;
  spc::ControlLimits limits;
  std::string scale_label;
  std::string location_label;
  std::vector<std::pair<std::string, double>> records;
};

struct spc_table {
  spc::StudyResult result;
};

struct spc_subgroups {
  spc::SubgroupData data;
};

extern "C" {

const char* spc_version(void) { return spc::kVersion; }

const char* spc_last_error(void) { return g_last_error.c_str(); }

spc_status spc_context_create(const char* cache_dir, int threads, spc_context** out) {
  if (const spc_status s = require(out != nullptr, "spc_context_create: out is null"); s != SPC_OK)
    return s;
  return guarded([&] {
    auto ctx = std::make_unique<spc_context>();
    ctx->threads = threads > 0 ? threads : spc::default_thread_count();
    const auto dir = spc::CalibrationStore::resolve_cache_dir(
        cache_dir == nullptr ? std::string() : std::string(cache_dir));
    ctx->store = std::make_unique<spc::CalibrationStore>(dir);
    ctx->service = std::make_unique<spc::CalibrationService>(ctx->store.get(), ctx->threads);
    *out = ctx.release();
  });
}

void spc_context_destroy(spc_context* ctx) { delete ctx; }

spc_status spc_reg_inc_beta(double x, double a, double b, double* out) {
  if (const spc_status s = require(out != nullptr, "spc_reg_inc_beta: out is null"); s != SPC_OK)
    return s;
  return guarded([&] { *out = spc::reg_inc_beta(x, a, b); });
}

spc_status spc_chi2_cdf(double x, int df, double* out) {
  if (const spc_status s = require(out != nullptr, "spc_chi2_cdf: out is null"); s != SPC_OK)
    return s;
  return guarded([&] { *out = spc::chi2_cdf(x, df); });
}

spc_status spc_chi2_quantile(double p, int df, double* out) {
  if (const spc_status s = require(out != nullptr, "spc_chi2_quantile: out is null"); s != SPC_OK)
    return s;
  return guarded([&] { *out = spc::chi2_quantile(p, df); });
}

spc_status spc_normal_cdf(double z, double* out) {
  if (const spc_status s = require(out != nullptr, "spc_normal_cdf: out is null"); s != SPC_OK)
    return s;
  return guarded([&] { *out = spc::normal_cdf(z); });
}

spc_status spc_normal_quantile(double p, double* out) {
  if (const spc_status s = require(out != nullptr, "spc_normal_quantile: out is null");
      s != SPC_OK)
    return s;
  return guarded([&] { *out = spc::normal_quantile(p); });
}

spc_status spc_scale_raw(spc_scale_kind kind, const double* xs, size_t n, double* out) {
  if (const spc_status s =
          require(out != nullptr && xs != nullptr, "spc_scale_raw: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    const spc::ScaleSpec spec = to_scale_spec(kind);
    const std::span<const double> sample(xs, n);
    switch (spec.kind) {
      case spc::ScaleKind::sd:
        *out = spc::sample_sd(sample);
        break;
      case spc::ScaleKind::mad:
        *out = spc::mad_raw(sample);
        break;
      case spc::ScaleKind::qn:
        *out = spc::qn_raw(sample, spec.qn_variant);
        break;
      case spc::ScaleKind::mslog:
        *out = spc::mslog_raw(sample, spec.kappa).sigma;
        break;
    }
  });
}

spc_status spc_correction_factor(spc_context* ctx, spc_scale_kind kind, int n,
                                 int64_t replicates, double* out) {
  if (const spc_status s = require(ctx != nullptr && out != nullptr,
                                   "spc_correction_factor: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    const int64_t reps = replicates > 0 ? replicates : spc::kDefaultCorrectionReplicates;
    *out = ctx->service->correction(to_scale_spec(kind), n, reps);
  });
}

spc_status spc_scale_estimate(spc_context* ctx, spc_scale_kind kind, const double* xs, size_t n,
                              double* out) {
  if (const spc_status s = require(ctx != nullptr && xs != nullptr && out != nullptr,
                                   "spc_scale_estimate: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    const spc::ScaleSpec spec =
        ctx->service->corrected_scale(to_scale_spec(kind), static_cast<int>(n));
    *out = spc::scale_estimate(std::span<const double>(xs, n), spec).value;
  });
}

spc_status spc_location_estimate(spc_context* ctx, spc_location_kind kind, const double* xs,
                                 size_t n, double* out) {
  if (const spc_status s = require(ctx != nullptr && xs != nullptr && out != nullptr,
                                   "spc_location_estimate: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    const spc::LocationSpec spec =
        ctx->service->location_spec(to_location_kind(kind), static_cast<int>(n));
    *out = spc::locate(std::span<const double>(xs, n), spec).value;
  });
}

spc_status spc_calibrate_alpha(spc_context* ctx, spc_scale_kind scale,
                               spc_location_kind location, int n, int k, double target_arl0,
                               int64_t calibration_replicates, double* out) {
  if (const spc_status s =
          require(ctx != nullptr && out != nullptr, "spc_calibrate_alpha: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    spc::ChartConfig config;
    config.n = n;
    config.k = k;
    config.target_arl0 = target_arl0 > 0.0 ? target_arl0 : spc::kDefaultTargetArl0;
    config.scale = ctx->service->corrected_scale(to_scale_spec(scale), n);
    config.location = ctx->service->location_spec(to_location_kind(location), k);
    const int64_t reps =
        calibration_replicates > 0 ? calibration_replicates : spc::kDefaultAlphaReplicates;
    *out = ctx->service->alpha_star(config, reps);
  });
}

spc_status spc_chart_build(spc_context* ctx, const double* phase1, int k, int n,
                           spc_scale_kind scale, spc_location_kind location, double target_arl0,
                           int64_t calibration_replicates, spc_chart** out) {
  if (const spc_status s = require(ctx != nullptr && phase1 != nullptr && out != nullptr,
                                   "spc_chart_build: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    if (k < 2 || n < 2) throw spc::DataError("chart: needs k >= 2 subgroups of n >= 2 values");
    spc::ChartConfig config;
    config.n = n;
    config.k = k;
    config.target_arl0 = target_arl0 > 0.0 ? target_arl0 : spc::kDefaultTargetArl0;
    config.scale = ctx->service->corrected_scale(to_scale_spec(scale), n);
    config.location = ctx->service->location_spec(to_location_kind(location), k);
    const int64_t reps =
        calibration_replicates > 0 ? calibration_replicates : spc::kDefaultAlphaReplicates;
    const double alpha = ctx->service->alpha_star(config, reps);

    spc::Phase1Data data;
    data.k = k;
    data.n = n;
    data.values.assign(phase1, phase1 + static_cast<size_t>(k) * n);
    data.contaminated.assign(data.values.size(), 0);
    const spc::SigmaHat sigma = spc::phase1_sigma_hat(data, config.scale, config.location);
    if (!sigma.ok)
      throw spc::DataError("chart: Phase I data yields a degenerate scale estimate");

    auto chart = std::make_unique<spc_chart>();
    chart->config = config;
    chart->limits = spc::limits_for_alpha(sigma.value, n, alpha);
    chart->scale_label = spc::scale_name(config.scale);
    chart->location_label = spc::location_name(config.location.kind);
    chart->records = ctx->service->used_records();
    *out = chart.release();
  });
}

spc_status spc_chart_get_summary(const spc_chart* chart, spc_chart_summary* out) {
  if (const spc_status s = require(chart != nullptr && out != nullptr,
                                   "spc_chart_get_summary: null argument");
      s != SPC_OK)
    return s;
  out->center = chart->limits.center;
  out->lcl = chart->limits.lcl;
  out->ucl = chart->limits.ucl;
  out->l_factor = chart->limits.l_factor;
  out->u_factor = chart->limits.u_factor;
  out->alpha_star = chart->limits.alpha;
  out->target_arl0 = chart->config.target_arl0;
  out->n = chart->config.n;
  out->k = chart->config.k;
  return SPC_OK;
}

spc_status spc_chart_eval(const spc_chart* chart, const double* subgroup, int n, double* stat_out,
                          int* signal_out) {
  if (const spc_status s = require(chart != nullptr && subgroup != nullptr &&
                                       stat_out != nullptr && signal_out != nullptr,
                                   "spc_chart_eval: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    if (n != chart->config.n)
      throw spc::DataError("chart eval: subgroup size " + std::to_string(n) +
                           " does not match the chart's n = " + std::to_string(chart->config.n));
    const double stat = spc::sample_sd(std::span<const double>(subgroup, static_cast<size_t>(n)));
    *stat_out = stat;
    *signal_out = (stat < chart->limits.lcl || stat > chart->limits.ucl) ? 1 : 0;
  });
}

spc_status spc_chart_signal_probability(const spc_chart* chart, double sigma_true, double phi,
                                        double* out) {
  if (const spc_status s = require(chart != nullptr && out != nullptr,
                                   "spc_chart_signal_probability: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    *out = spc::signal_probability(chart->limits, sigma_true, phi, chart->config.n);
  });
}

namespace {

void write_chart_header(std::ofstream& out, const spc_chart& chart, const char* config_echo) {
  out << "# spc-toolkit " << spc::kVersion << '\n';
  out << "# n = " << chart.config.n << '\n';
  out << "# k = " << chart.config.k << '\n';
  out << "# scale = " << chart.scale_label << '\n';
  out << "# location = " << chart.location_label << '\n';
  out << "# target_arl0 = " << spc::format_double(chart.config.target_arl0) << '\n';
  out << "# alpha_star = " << spc::format_double(chart.limits.alpha) << '\n';
  out << "# l_factor = " << spc::format_double(chart.limits.l_factor) << '\n';
  out << "# u_factor = " << spc::format_double(chart.limits.u_factor) << '\n';
  out << "# scale_correction = " << spc::format_double(chart.config.scale.correction) << '\n';
  for (const auto& [key, value] : chart.records)
    out << "# calibration: " << key << " value=" << spc::format_double(value) << '\n';
  const std::string echo = echo_or_empty(config_echo);
  std::string line;
  for (char ch : echo) {
    if (ch == '\n') {
      if (!line.empty()) out << "# " << line << '\n';
      line.clear();
    } else {
      line += ch;
    }
  }
  if (!line.empty()) out << "# " << line << '\n';
}

}  // namespace

spc_status spc_chart_write_limits_csv(const spc_chart* chart, const char* path,
                                      const char* config_echo) {
  if (const spc_status s = require(chart != nullptr && path != nullptr,
                                   "spc_chart_write_limits_csv: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    std::ofstream out(path);
    if (!out.is_open()) throw spc::IoError(std::string("cannot write ") + path);
    write_chart_header(out, *chart, config_echo);
    out << "statistic,value\n";
    out << "center," << spc::format_double(chart->limits.center) << '\n';
    out << "lcl," << spc::format_double(chart->limits.lcl) << '\n';
    out << "ucl," << spc::format_double(chart->limits.ucl) << '\n';
    if (!out) throw spc::IoError(std::string("failed writing ") + path);
  });
}

spc_status spc_chart_apply_csv(const spc_chart* chart, const char* phase2_csv,
                               const char* out_csv, const char* config_echo) {
  if (const spc_status s =
          require(chart != nullptr && phase2_csv != nullptr && out_csv != nullptr,
                  "spc_chart_apply_csv: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    const spc::SubgroupData data = spc::read_subgroup_csv(phase2_csv);
    if (data.n != chart->config.n)
      throw spc::DataError(std::string(phase2_csv) + ": rows have " + std::to_string(data.n) +
                           " fields but the chart's subgroup size is " +
                           std::to_string(chart->config.n));
    std::ofstream out(out_csv);
    if (!out.is_open()) throw spc::IoError(std::string("cannot write ") + out_csv);
    write_chart_header(out, *chart, config_echo);
    out << "subgroup,stat,lcl,ucl,signal\n";
    for (int i = 0; i < data.k; ++i) {
      const std::span<const double> row(data.values.data() + static_cast<size_t>(i) * data.n,
                                        static_cast<size_t>(data.n));
      const double stat = spc::sample_sd(row);
      const bool signal = stat < chart->limits.lcl || stat > chart->limits.ucl;
      out << (i + 1) << ',' << spc::format_double(stat) << ','
          << spc::format_double(chart->limits.lcl) << ','
          << spc::format_double(chart->limits.ucl) << ',' << (signal ? 1 : 0) << '\n';
    }
    if (!out) throw spc::IoError(std::string("failed writing ") + out_csv);
  });
}

void spc_chart_destroy(spc_chart* chart) { delete chart; }

spc_status spc_subgroups_read_csv(const char* path, spc_subgroups** out) {
  if (const spc_status s = require(path != nullptr && out != nullptr,
                                   "spc_subgroups_read_csv: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    auto sg = std::make_unique<spc_subgroups>();
    sg->data = spc::read_subgroup_csv(path);
    *out = sg.release();
  });
}

spc_status spc_subgroups_dims(const spc_subgroups* sg, int* k, int* n) {
  if (const spc_status s = require(sg != nullptr && k != nullptr && n != nullptr,
                                   "spc_subgroups_dims: null argument");
      s != SPC_OK)
    return s;
  *k = sg->data.k;
  *n = sg->data.n;
  return SPC_OK;
}

spc_status spc_subgroups_data(const spc_subgroups* sg, const double** rowmajor) {
  if (const spc_status s = require(sg != nullptr && rowmajor != nullptr,
                                   "spc_subgroups_data: null argument");
      s != SPC_OK)
    return s;
  *rowmajor = sg->data.values.data();
  return SPC_OK;
}

void spc_subgroups_destroy(spc_subgroups* sg) { delete sg; }

namespace {

spc::StudySpec to_study_spec(const spc_study_options& options) {
  spc::StudySpec spec;
  spec.n = options.n > 0 ? options.n : 5;
  spec.k = options.k > 0 ? options.k : 50;
  if (options.replicates > 0) {
    spec.mse_replicates = options.replicates;
    spec.arl_replicates = options.replicates;
  }
  if (options.calibration_replicates > 0)
    spec.calibration_replicates = options.calibration_replicates;
  if (options.target_arl0 > 0.0) spec.target_arl0 = options.target_arl0;
  spec.seed = options.seed;
  spec.config_echo = echo_or_empty(options.config_echo);

  if (options.cells != nullptr && options.n_cells > 0) {
    for (size_t i = 0; i < options.n_cells; ++i)
      spec.cells.push_back({to_model_kind(options.cells[i].model), options.cells[i].a});
  } else {
    spec.cells = spc::default_cells();
  }
  if (options.scales != nullptr && options.n_scales > 0) {
    for (size_t i = 0; i < options.n_scales; ++i)
      spec.scales.push_back(to_scale_spec(options.scales[i]));
  } else {
    spec.scales = spc::default_scales();
  }
  if (options.locations != nullptr && options.n_locations > 0) {
    for (size_t i = 0; i < options.n_locations; ++i)
      spec.locations.push_back(to_location_kind(options.locations[i]));
  } else {
    spec.locations = spc::default_locations();
  }
  if (options.phis != nullptr && options.n_phis > 0)
    spec.phis.assign(options.phis, options.phis + options.n_phis);
  return spec;
}

}  // namespace

spc_status spc_study_run(spc_context* ctx, const spc_study_options* options, spc_table** out) {
  if (const spc_status s = require(ctx != nullptr && options != nullptr && out != nullptr,
                                   "spc_study_run: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    const spc::StudySpec spec = to_study_spec(*options);
    auto table = std::make_unique<spc_table>();
    table->result = options->kind == SPC_STUDY_MSE ? spc::run_mse_study(spec, *ctx->service)
                                                   : spc::run_arl_study(spec, *ctx->service);
    *out = table.release();
  });
}

spc_status spc_table_num_rows(const spc_table* table, size_t* out) {
  if (const spc_status s = require(table != nullptr && out != nullptr,
                                   "spc_table_num_rows: null argument");
      s != SPC_OK)
    return s;
  *out = table->result.rows.size();
  return SPC_OK;
}

spc_status spc_table_row(const spc_table* table, size_t index, spc_study_row* out) {
  if (const spc_status s =
          require(table != nullptr && out != nullptr, "spc_table_row: null argument");
      s != SPC_OK)
    return s;
  if (index >= table->result.rows.size()) {
    set_error("spc_table_row: index out of range");
    return SPC_ERR_INVALID_ARGUMENT;
  }
  const spc::StudyRow& row = table->result.rows[index];
  out->model = row.model.c_str();
  out->a = row.a;
  out->scale = row.scale.c_str();
  out->location = row.location.c_str();
  out->phi = row.phi;
  out->value = row.value;
  out->std_error = row.std_error;
  out->excluded = row.excluded;
  return SPC_OK;
}

spc_status spc_table_write_csv(const spc_table* table, const char* path) {
  if (const spc_status s =
          require(table != nullptr && path != nullptr, "spc_table_write_csv: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] { spc::write_study_csv(table->result, path); });
}

spc_status spc_table_write_figure_data(const spc_table* table, const char* out_dir) {
  if (const spc_status s = require(table != nullptr && out_dir != nullptr,
                                   "spc_table_write_figure_data: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] { spc::write_figure_data(table->result, out_dir); });
}

void spc_table_destroy(spc_table* table) { delete table; }

spc_status spc_reproduce(spc_context* ctx, const spc_reproduce_options* options,
                         const char* out_dir) {
  if (const spc_status s =
          require(ctx != nullptr && out_dir != nullptr, "spc_reproduce: null argument");
      s != SPC_OK)
    return s;
  return guarded([&] {
    spc::StudySpec spec;
    spec.cells = spc::default_cells();
    spec.scales = spc::default_scales();
    spec.locations = spc::default_locations();
    spec.seed = 42;
    if (options != nullptr) {
      if (options->n > 0) spec.n = options->n;
      if (options->k > 0) spec.k = options->k;
      if (options->mse_replicates > 0) spec.mse_replicates = options->mse_replicates;
      if (options->arl_replicates > 0) spec.arl_replicates = options->arl_replicates;
      if (options->calibration_replicates > 0)
        spec.calibration_replicates = options->calibration_replicates;
      if (options->target_arl0 > 0.0) spec.target_arl0 = options->target_arl0;
      spec.seed = options->seed;
      spec.config_echo = echo_or_empty(options->config_echo);
    }
    spc::run_reproduce(spec, *ctx->service, out_dir);
  });
}

}  // extern "C"
