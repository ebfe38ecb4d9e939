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

#include "simulation.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

#include "calibration_store.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "special_functions.hpp"
#include "version.hpp"

namespace spc {
namespace {

constexpr double kMinSignalProbability = 1e-300;

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::uint64_t cell_seed(std::uint64_t seed, const OutlierModel& model) {
  return derive_seed(seed, static_cast<std::uint64_t>(model.kind),
                     std::bit_cast<std::uint64_t>(model.a));
}

void validate_spec(const StudySpec& spec) {
  if (spec.cells.empty() || spec.scales.empty() || spec.locations.empty())
    throw std::invalid_argument("study spec: empty grid");
  if (spec.n < 2 || spec.k < 2) throw std::invalid_argument("study spec: needs n >= 2 and k >= 2");
  if (spec.mse_replicates < 100 || spec.arl_replicates < 100)
    throw std::invalid_argument("study spec: replicates must be >= 100");
  for (const auto& cell : spec.cells) validate_model(cell);
  for (double phi : spec.phis)
    if (!(phi > 0.0)) throw std::invalid_argument("study spec: phi must be positive");
}

struct ResolvedCombos {
  std::vector<ScaleSpec> scales;
  std::vector<LocationSpec> locations;
  std::vector<std::string> scale_names;
  std::vector<std::string> location_names;
  // Row-major (scale, location) alpha* and the derived limit factors.
  std::vector<double> alpha;
  std::vector<double> l_factor;
  std::vector<double> u_factor;
};

ResolvedCombos resolve_combos(const StudySpec& spec, CalibrationService& service, bool want_arl) {
  ResolvedCombos rc;
  for (const auto& s : spec.scales) {
    rc.scales.push_back(service.corrected_scale(s, spec.n, spec.correction_replicates));
    rc.scale_names.push_back(scale_name(s));
  }
  for (LocationKind l : spec.locations) {
    rc.locations.push_back(service.location_spec(l, spec.k));
    rc.location_names.push_back(location_name(l));
  }
  if (!want_arl) return rc;

  const int nu = spec.n - 1;
  for (const auto& scale : rc.scales) {
    for (const auto& loc : rc.locations) {
      ChartConfig config{spec.n, spec.k, scale, loc, spec.target_arl0};
      const double alpha =
          service.alpha_star(config, spec.calibration_replicates, spec.correction_replicates);
      rc.alpha.push_back(alpha);
      rc.l_factor.push_back(std::sqrt(chi2_quantile(0.5 * alpha, nu) / nu));
      rc.u_factor.push_back(std::sqrt(chi2_quantile(1.0 - 0.5 * alpha, nu) / nu));
    }
  }
  return rc;
}

StudyMetadata make_metadata(const StudySpec& spec, StudyKind kind, const ResolvedCombos& rc,
                            CalibrationService& service) {
  StudyMetadata meta;
  meta.kind = kind;
  meta.n = spec.n;
  meta.k = spec.k;
  meta.replicates = kind == StudyKind::mse ? spec.mse_replicates : spec.arl_replicates;
  meta.calibration_replicates = spec.calibration_replicates;
  meta.target_arl0 = spec.target_arl0;
  meta.seed = spec.seed;
  meta.scale_names = rc.scale_names;
  meta.location_names = rc.location_names;
  if (kind == StudyKind::arl) meta.phis = spec.phis;
  meta.calibration_records = service.used_records();
  meta.config_echo = spec.config_echo;
  return meta;
}

// Per-cell Monte Carlo pass shared by both studies: Phase I data is drawn
// once per replicate and every estimator combination is evaluated on it.
void run_cell(const StudySpec& spec, const ResolvedCombos& rc, const OutlierModel& model,
              bool want_mse, bool want_arl, int threads, StudyResult* mse, StudyResult* arl) {
  const int num_scales = static_cast<int>(rc.scales.size());
  const int num_locs = static_cast<int>(rc.locations.size());
  const int combos = num_scales * num_locs;
  const int num_phis = want_arl ? static_cast<int>(spec.phis.size()) : 0;
  const std::int64_t n_mse = want_mse ? spec.mse_replicates : 0;
  const std::int64_t n_arl = want_arl ? spec.arl_replicates : 0;
  const std::int64_t total = std::max(n_mse, n_arl);
  const std::uint64_t seed = cell_seed(spec.seed, model);

  std::vector<double> sigma(static_cast<std::size_t>(total) * combos);
  std::vector<std::uint8_t> good(static_cast<std::size_t>(total) * combos, 0);
  std::vector<double> rl(static_cast<std::size_t>(n_arl) * combos * std::max(num_phis, 1), 0.0);
  std::vector<std::uint8_t> rl_keep(rl.size(), 0);

  parallel_for(total, threads, [&](std::int64_t begin, std::int64_t end) {
    std::vector<std::vector<double>> scale_vals(static_cast<std::size_t>(num_scales),
                                                std::vector<double>(static_cast<std::size_t>(spec.k)));
    for (std::int64_t rep = begin; rep < end; ++rep) {
      const Phase1Data data =
          sample_phase1(model, spec.k, spec.n, seed, static_cast<std::uint64_t>(rep));
      for (int s = 0; s < num_scales; ++s)
        for (int g = 0; g < spec.k; ++g)
          scale_vals[static_cast<std::size_t>(s)][static_cast<std::size_t>(g)] =
              scale_estimate(data.subgroup(g), rc.scales[static_cast<std::size_t>(s)]).value;

      for (int s = 0; s < num_scales; ++s) {
        for (int l = 0; l < num_locs; ++l) {
          const int c = s * num_locs + l;
          const LocateResult loc =
              locate(scale_vals[static_cast<std::size_t>(s)], rc.locations[static_cast<std::size_t>(l)]);
          const bool ok = loc.ok && loc.value > 0.0;
          const std::size_t at = static_cast<std::size_t>(rep) * combos + c;
          sigma[at] = loc.value;
          good[at] = ok;
          if (!want_arl || rep >= n_arl || !ok) continue;
          for (int f = 0; f < num_phis; ++f) {
            const double p =
                signal_probability(rc.l_factor[static_cast<std::size_t>(c)] * loc.value,
                                   rc.u_factor[static_cast<std::size_t>(c)] * loc.value, 1.0,
                                   spec.phis[static_cast<std::size_t>(f)], spec.n);
            if (!(p > kMinSignalProbability)) continue;
            const std::size_t slot =
                (static_cast<std::size_t>(rep) * combos + c) * num_phis + f;
            rl[slot] = 1.0 / p;
            rl_keep[slot] = 1;
          }
        }
      }
    }
  });

  const std::string model_label = model_name(model.kind);
  for (int s = 0; s < num_scales; ++s) {
    for (int l = 0; l < num_locs; ++l) {
      const int c = s * num_locs + l;
      if (want_mse) {
        double sum = 0.0;
        std::int64_t used = 0;
        for (std::int64_t rep = 0; rep < n_mse; ++rep) {
          const std::size_t at = static_cast<std::size_t>(rep) * combos + c;
          if (!good[at]) continue;
          const double d = sigma[at] - 1.0;
          sum += d * d;
          ++used;
        }
        StudyRow row;
        row.model = model_label;
        row.a = model.a;
        row.scale = rc.scale_names[static_cast<std::size_t>(s)];
        row.location = rc.location_names[static_cast<std::size_t>(l)];
        row.phi = std::numeric_limits<double>::quiet_NaN();
        row.excluded = n_mse - used;
        if (used > 0) {
          const double mean_sq = sum / static_cast<double>(used);
          row.value = mean_sq;
          double ss = 0.0;
          for (std::int64_t rep = 0; rep < n_mse; ++rep) {
            const std::size_t at = static_cast<std::size_t>(rep) * combos + c;
            if (!good[at]) continue;
            const double d = sigma[at] - 1.0;
            const double e = d * d - mean_sq;
            ss += e * e;
          }
          row.std_error =
              used > 1 ? std::sqrt(ss / (static_cast<double>(used - 1) * used)) : 0.0;
        }
        if (row.excluded * 100 > n_mse)
          mse->meta.warnings.push_back("cell " + model_label + " a=" + format_double(model.a) +
                                       " " + row.scale + "+" + row.location + ": " +
                                       std::to_string(row.excluded) + " replicates excluded");
        mse->rows.push_back(std::move(row));
      }
      if (want_arl) {
        for (int f = 0; f < num_phis; ++f) {
          double sum = 0.0;
          std::int64_t used = 0;
          for (std::int64_t rep = 0; rep < n_arl; ++rep) {
            const std::size_t slot = (static_cast<std::size_t>(rep) * combos + c) * num_phis + f;
            if (!rl_keep[slot]) continue;
            sum += rl[slot];
            ++used;
          }
          StudyRow row;
          row.model = model_label;
          row.a = model.a;
          row.scale = rc.scale_names[static_cast<std::size_t>(s)];
          row.location = rc.location_names[static_cast<std::size_t>(l)];
          row.phi = spec.phis[static_cast<std::size_t>(f)];
          row.excluded = n_arl - used;
          if (used > 0) {
            row.value = sum / static_cast<double>(used);
            double ss = 0.0;
            for (std::int64_t rep = 0; rep < n_arl; ++rep) {
              const std::size_t slot =
                  (static_cast<std::size_t>(rep) * combos + c) * num_phis + f;
              if (!rl_keep[slot]) continue;
              const double d = rl[slot] - row.value;
              ss += d * d;
            }
            row.std_error =
                used > 1 ? std::sqrt(ss / (static_cast<double>(used - 1) * used)) : 0.0;
          }
          if (row.excluded * 100 > n_arl)
            arl->meta.warnings.push_back("cell " + model_label + " a=" + format_double(model.a) +
                                         " " + row.scale + "+" + row.location +
                                         " phi=" + format_double(row.phi) + ": " +
                                         std::to_string(row.excluded) + " replicates excluded");
          arl->rows.push_back(std::move(row));
        }
      }
    }
  }
}

StudyPair run_engine(const StudySpec& spec, CalibrationService& service, bool want_mse,
                     bool want_arl) {
  validate_spec(spec);
  const ResolvedCombos rc = resolve_combos(spec, service, want_arl);

  StudyPair pair;
  for (const auto& cell : spec.cells)
    run_cell(spec, rc, cell, want_mse, want_arl, service.threads(), &pair.mse, &pair.arl);

  // Metadata last so it includes every calibration record that was used.
  const auto mse_warnings = std::move(pair.mse.meta.warnings);
  const auto arl_warnings = std::move(pair.arl.meta.warnings);
  pair.mse.meta = make_metadata(spec, StudyKind::mse, rc, service);
  pair.arl.meta = make_metadata(spec, StudyKind::arl, rc, service);
  pair.mse.meta.warnings = mse_warnings;
  pair.arl.meta.warnings = arl_warnings;
  return pair;
}

void write_header(std::ofstream& out, const StudyMetadata& meta) {
  out << "# spc-toolkit " << kVersion << '\n';
  out << "# study = " << (meta.kind == StudyKind::mse ? "mse" : "arl") << '\n';
  out << "# seed = " << meta.seed << '\n';
  out << "# n = " << meta.n << '\n';
  out << "# k = " << meta.k << '\n';
  out << "# replicates = " << meta.replicates << '\n';
  if (meta.kind == StudyKind::arl) {
    out << "# calibration_replicates = " << meta.calibration_replicates << '\n';
    out << "# target_arl0 = " << format_double(meta.target_arl0) << '\n';
    out << "# phis =";
    for (double phi : meta.phis) out << ' ' << format_double(phi);
    out << '\n';
  }
  out << "# scales =";
  for (const auto& s : meta.scale_names) out << ' ' << s;
  out << '\n';
  out << "# locations =";
  for (const auto& l : meta.location_names) out << ' ' << l;
  out << '\n';
  for (const auto& [key, value] : meta.calibration_records)
    out << "# calibration: " << key << " value=" << format_double(value) << '\n';
  for (const auto& w : meta.warnings) out << "# warning: " << w << '\n';
  if (!meta.config_echo.empty()) {
    std::string line;
    for (char ch : meta.config_echo) {
      if (ch == '\n') {
        if (!line.empty()) out << "# " << line << '\n';
        line.clear();
      } else {
        line += ch;
      }
    }
    if (!line.empty()) out << "# " << line << '\n';
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out.is_open()) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<OutlierModel> default_cells() {
  std::vector<OutlierModel> cells;
  cells.push_back({ModelKind::clean, 1.0});
  for (double a = 1.0; a <= 4.0 + 1e-9; a += 0.5)
    cells.push_back({ModelKind::diffuse_symmetric, a});
  for (double a : {2.0, 3.0, 4.0}) cells.push_back({ModelKind::diffuse_asymmetric, a});
  for (double a = 1.0; a <= 4.0 + 1e-9; a += 0.5) cells.push_back({ModelKind::localized, a});
  return cells;
}

std::vector<ScaleSpec> default_scales() {
  std::vector<ScaleSpec> scales(4);
  scales[0].kind = ScaleKind::sd;
  scales[1].kind = ScaleKind::mad;
  scales[2].kind = ScaleKind::qn;
  scales[3].kind = ScaleKind::mslog;
  return scales;
}

std::vector<LocationKind> default_locations() {
  return {LocationKind::mean, LocationKind::huber, LocationKind::hd, LocationKind::hl};
}

const StudyRow& StudyResult::at(const std::string& model, double a, const std::string& scale,
                                const std::string& location, double phi) const {
  for (const auto& row : rows) {
    if (row.model != model || row.scale != scale || row.location != location) continue;
    if (std::fabs(row.a - a) > 1e-9) continue;
    if (meta.kind == StudyKind::arl && std::fabs(row.phi - phi) > 1e-9) continue;
    return row;
  }
  throw std::out_of_range("study row not found: " + model + " a=" + fmt6(a) + " " + scale + "+" +
                          location + " phi=" + fmt6(phi));
}

StudyResult run_mse_study(const StudySpec& spec, CalibrationService& service) {
  return run_engine(spec, service, true, false).mse;
}

StudyResult run_arl_study(const StudySpec& spec, CalibrationService& service) {
  return run_engine(spec, service, false, true).arl;
}

StudyPair run_both_studies(const StudySpec& spec, CalibrationService& service) {
  return run_engine(spec, service, true, true);
}

void write_study_csv(const StudyResult& result, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  write_header(out, result.meta);
  out << "model,a,scale,location,phi,metric_value,standard_error,excluded_count\n";
  for (const auto& row : result.rows) {
    out << row.model << ',' << format_double(row.a) << ',' << row.scale << ',' << row.location
        << ',';
    if (!std::isnan(row.phi)) out << format_double(row.phi);
    out << ',' << format_double(row.value) << ',' << format_double(row.std_error) << ','
        << row.excluded << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_figure_data(const StudyResult& result, const std::filesystem::path& dir) {
  if (result.rows.empty()) throw DataError("figure data: empty study result");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());

  const bool is_arl = result.meta.kind == StudyKind::arl;
  const std::vector<double> phis = is_arl ? result.meta.phis : std::vector<double>{1.0};
  const char* metric = is_arl ? "arl" : "mse";

  const bool has_clean = std::any_of(result.rows.begin(), result.rows.end(),
                                     [](const StudyRow& r) { return r.model == "clean"; });

  for (const char* model : {"m1", "m2", "m3"}) {
    // Severity grid for this model, ascending.
    std::set<double> grid;
    for (const auto& row : result.rows)
      if (row.model == model) grid.insert(row.a);
    if (grid.empty()) continue;
    // The clean cell stands in for a = 1 where the model's own grid
    // starts above it (the asymmetric model's df grid).
    const bool prepend_clean = has_clean && *grid.begin() > 1.0;

    for (const auto& loc : result.meta.location_names) {
      for (double phi : phis) {
        std::string name = std::string("fig_") + metric + "_" + model;
        if (is_arl) name += "_phi" + format_double(phi);
        name += "_" + loc + ".csv";
        std::ofstream out = open_output(dir / name);
        write_header(out, result.meta);
        out << "# figure: " << metric << " vs severity, model " << model << ", location " << loc;
        if (is_arl) out << ", phi " << format_double(phi);
        out << '\n';
        out << "a";
        for (const auto& s : result.meta.scale_names) out << ',' << s << ',' << s << "_se";
        out << '\n';

        const auto emit = [&](const std::string& row_model, double row_a, double label_a) {
          out << format_double(label_a);
          for (const auto& s : result.meta.scale_names) {
            const StudyRow& row = result.at(row_model, row_a, s, loc, phi);
            out << ',' << format_double(row.value) << ',' << format_double(row.std_error);
          }
          out << '\n';
        };
        if (prepend_clean) emit("clean", 1.0, 1.0);
        for (double a : grid) emit(model, a, a);
        if (!out) throw IoError("failed writing " + (dir / name).string());
      }
    }
  }
}

std::vector<TrendCheck> evaluate_trend_checks(const StudyResult& mse, const StudyResult& arl) {
  std::vector<TrendCheck> checks;
  const double target = arl.meta.target_arl0;

  const auto add = [&](const std::string& id, bool pass, const std::string& detail) {
    checks.push_back({id, pass, detail});
  };
  const auto guarded = [&](const std::string& id, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::out_of_range& e) {
      add(id, false, std::string("required cells missing: ") + e.what());
    }
  };

  // Severity values >= 2 present for a model in the ARL table.
  const auto severity_grid = [&](const char* model) {
    std::set<double> grid;
    for (const auto& row : arl.rows)
      if (row.model == model && row.a >= 2.0 - 1e-9) grid.insert(row.a);
    return std::vector<double>(grid.begin(), grid.end());
  };

  guarded("clean_arl0_all_combos_within_2pct", [&] {
    bool pass = true;
    double worst = 0.0;
    std::string worst_combo;
    for (const auto& s : arl.meta.scale_names) {
      for (const auto& l : arl.meta.location_names) {
        const StudyRow& row = arl.at("clean", 1.0, s, l, 1.0);
        const double rel = std::fabs(row.value - target) / target;
        if (rel > worst) {
          worst = rel;
          worst_combo = s + "+" + l;
        }
        if (rel > 0.02) pass = false;
      }
    }
    add("clean_arl0_all_combos_within_2pct", pass,
        "worst deviation " + fmt6(100.0 * worst) + "% (" + worst_combo + ")");
  });

  guarded("mse_m1_a1_sd_lowest_scale", [&] {
    const StudyRow& sd = mse.at("m1", 1.0, "sd", "mean");
    bool pass = true;
    std::string detail = "sd=" + fmt6(sd.value);
    for (const auto& s : mse.meta.scale_names) {
      if (s == "sd") continue;
      const StudyRow& other = mse.at("m1", 1.0, s, "mean");
      const double margin = 3.0 * std::hypot(sd.std_error, other.std_error);
      detail += " " + s + "=" + fmt6(other.value);
      if (!(sd.value < other.value - margin)) pass = false;
    }
    add("mse_m1_a1_sd_lowest_scale", pass, detail);
  });

  guarded("mse_m1_a4_sd_gt_qn_gt_mad", [&] {
    const StudyRow& sd = mse.at("m1", 4.0, "sd", "mean");
    const StudyRow& qn = mse.at("m1", 4.0, "qn", "mean");
    const StudyRow& mad = mse.at("m1", 4.0, "mad", "mean");
    const bool first = sd.value > qn.value + 3.0 * std::hypot(sd.std_error, qn.std_error);
    const bool second = qn.value > mad.value + 3.0 * std::hypot(qn.std_error, mad.std_error);
    add("mse_m1_a4_sd_gt_qn_gt_mad", first && second,
        "sd=" + fmt6(sd.value) + " qn=" + fmt6(qn.value) + " mad=" + fmt6(mad.value));
  });

  guarded("mse_m1_a4_sd_over_mad_ratio_ge_2", [&] {
    const StudyRow& sd = mse.at("m1", 4.0, "sd", "mean");
    const StudyRow& mad = mse.at("m1", 4.0, "mad", "mean");
    const double ratio = sd.value / mad.value;
    add("mse_m1_a4_sd_over_mad_ratio_ge_2", ratio >= 2.0, "ratio=" + fmt6(ratio));
  });

  guarded("arl0_m1_sd_mean_strictly_decreasing", [&] {
    const auto grid = severity_grid("m1");
    bool pass = grid.size() >= 2;
    std::string detail;
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const StudyRow& row = arl.at("m1", grid[i], "sd", "mean", 1.0);
      if (i > 0 && !(row.value < prev)) pass = false;
      prev = row.value;
      if (!detail.empty()) detail += " ";
      detail += "a" + fmt6(grid[i]) + "=" + fmt6(row.value);
    }
    add("arl0_m1_sd_mean_strictly_decreasing", pass, detail);
  });

  guarded("arl0_m1_a4_sd_mean_below_40pct", [&] {
    const StudyRow& row = arl.at("m1", 4.0, "sd", "mean", 1.0);
    add("arl0_m1_a4_sd_mean_below_40pct", row.value < 0.4 * target,
        "arl0=" + fmt6(row.value) + " bound=" + fmt6(0.4 * target));
  });

  guarded("arl_m1_phi14_a4_mslog_hd_lt_sd_mean", [&] {
    const StudyRow& robust = arl.at("m1", 4.0, "mslog", "hd", 1.4);
    const StudyRow& conv = arl.at("m1", 4.0, "sd", "mean", 1.4);
    add("arl_m1_phi14_a4_mslog_hd_lt_sd_mean", robust.value < conv.value,
        "mslog+hd=" + fmt6(robust.value) + " sd+mean=" + fmt6(conv.value));
  });

  guarded("arl0_m2_a4_qn_robust_ge_90pct", [&] {
    bool pass = true;
    std::string detail;
    for (const char* loc : {"huber", "hd", "hl"}) {
      const StudyRow& row = arl.at("m2", 4.0, "qn", loc, 1.0);
      if (!(row.value >= 0.9 * target)) pass = false;
      if (!detail.empty()) detail += " ";
      detail += std::string(loc) + "=" + fmt6(row.value);
    }
    add("arl0_m2_a4_qn_robust_ge_90pct", pass, detail + " bound=" + fmt6(0.9 * target));
  });

  guarded("arl0_m2_a4_sd_mean_le_20pct", [&] {
    const StudyRow& row = arl.at("m2", 4.0, "sd", "mean", 1.0);
    add("arl0_m2_a4_sd_mean_le_20pct", row.value <= 0.2 * target,
        "arl0=" + fmt6(row.value) + " bound=" + fmt6(0.2 * target));
  });

  guarded("arl_m2_phi14_a4_qn_smallest_scale", [&] {
    bool pass = true;
    std::string detail;
    for (const auto& loc : arl.meta.location_names) {
      const StudyRow& qn = arl.at("m2", 4.0, "qn", loc, 1.4);
      for (const auto& s : arl.meta.scale_names) {
        if (s == "qn") continue;
        const StudyRow& other = arl.at("m2", 4.0, s, loc, 1.4);
        if (!(qn.value < other.value)) {
          pass = false;
          detail += " " + loc + ":qn=" + fmt6(qn.value) + ">=" + s + "=" + fmt6(other.value);
        }
      }
    }
    add("arl_m2_phi14_a4_qn_smallest_scale", pass,
        pass ? "qn smallest at every location" : detail);
  });

  guarded("arl0_m3_a4_hd_sd_highest_scale", [&] {
    const StudyRow& sd = arl.at("m3", 4.0, "sd", "hd", 1.0);
    bool pass = true;
    std::string detail = "sd=" + fmt6(sd.value);
    for (const auto& s : arl.meta.scale_names) {
      if (s == "sd") continue;
      const StudyRow& other = arl.at("m3", 4.0, s, "hd", 1.0);
      detail += " " + s + "=" + fmt6(other.value);
      if (!(sd.value > other.value)) pass = false;
    }
    add("arl0_m3_a4_hd_sd_highest_scale", pass, detail);
  });

  guarded("arl_m3_phi14_a4_hd_sd_smallest_scale", [&] {
    const StudyRow& sd = arl.at("m3", 4.0, "sd", "hd", 1.4);
    bool pass = true;
    std::string detail = "sd=" + fmt6(sd.value);
    for (const auto& s : arl.meta.scale_names) {
      if (s == "sd") continue;
      const StudyRow& other = arl.at("m3", 4.0, s, "hd", 1.4);
      detail += " " + s + "=" + fmt6(other.value);
      if (!(sd.value < other.value)) pass = false;
    }
    add("arl_m3_phi14_a4_hd_sd_smallest_scale", pass, detail);
  });

  guarded("arl0_m3_sd_mean_monotone_decrease_ge_60pct", [&] {
    const auto grid = severity_grid("m3");
    bool monotone = grid.size() >= 2;
    double first = 0.0, last = 0.0, prev = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const StudyRow& row = arl.at("m3", grid[i], "sd", "mean", 1.0);
      if (i == 0) first = row.value;
      if (i > 0 && !(row.value < prev)) monotone = false;
      prev = row.value;
      last = row.value;
      if (!detail.empty()) detail += " ";
      detail += "a" + fmt6(grid[i]) + "=" + fmt6(row.value);
    }
    const double drop = first > 0.0 ? (first - last) / first : 0.0;
    add("arl0_m3_sd_mean_monotone_decrease_ge_60pct", monotone && drop >= 0.6,
        detail + " drop=" + fmt6(100.0 * drop) + "%");
  });

  return checks;
}

ReproduceResult run_reproduce(const StudySpec& spec, CalibrationService& service,
                              const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  ReproduceResult result;
  StudyPair pair = run_both_studies(spec, service);
  result.mse = std::move(pair.mse);
  result.arl = std::move(pair.arl);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string());

  const auto mse_csv = out_dir / "mse.csv";
  const auto arl_csv = out_dir / "arl.csv";
  write_study_csv(result.mse, mse_csv);
  write_study_csv(result.arl, arl_csv);
  result.files.push_back(mse_csv);
  result.files.push_back(arl_csv);

  const auto figures = out_dir / "figures";
  write_figure_data(result.mse, figures);
  write_figure_data(result.arl, figures);
  result.files.push_back(figures);

  result.checks = evaluate_trend_checks(result.mse, result.arl);
  const auto summary = out_dir / "summary.csv";
  {
    std::ofstream out = open_output(summary);
    write_header(out, result.arl.meta);
    out << "check,result,detail\n";
    for (const auto& check : result.checks) {
      std::string detail = check.detail;
      for (char& ch : detail)
        if (ch == ',') ch = ';';
      out << check.id << ',' << (check.pass ? "pass" : "fail") << ',' << detail << '\n';
    }
    if (!out) throw IoError("failed writing " + summary.string());
  }
  result.files.push_back(summary);

  const auto manifest = out_dir / "run_manifest.txt";
  {
    std::ofstream out = open_output(manifest);
    out << "spc-toolkit " << kVersion << "\n";
    out << "n = " << spec.n << "\nk = " << spec.k << "\n";
    out << "seed = " << spec.seed << "\n";
    out << "mse_replicates = " << spec.mse_replicates << "\n";
    out << "arl_replicates = " << spec.arl_replicates << "\n";
    out << "calibration_replicates = " << spec.calibration_replicates << "\n";
    out << "correction_replicates = " << spec.correction_replicates << "\n";
    out << "target_arl0 = " << format_double(spec.target_arl0) << "\n";
    out << "cells =";
    for (const auto& cell : spec.cells)
      out << ' ' << model_name(cell.kind) << ':' << format_double(cell.a);
    out << "\nscales =";
    for (const auto& s : spec.scales) out << ' ' << scale_name(s);
    out << "\nlocations =";
    for (LocationKind l : spec.locations) out << ' ' << location_name(l);
    out << "\nphis =";
    for (double phi : spec.phis) out << ' ' << format_double(phi);
    out << '\n';
    if (!spec.config_echo.empty()) out << spec.config_echo << '\n';
    for (const auto& [key, value] : service.used_records())
      out << "calibration: " << key << " value=" << format_double(value) << '\n';
    if (!out) throw IoError("failed writing " + manifest.string());
  }
  result.files.push_back(manifest);

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace spc
