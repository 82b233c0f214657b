#pragma once

// Report generation: stability maps (SVG), the stability table, bar-chart
// data, and the manifest-driven study runner. Formatters only rearrange what
// compute_stats produces; all files are byte-stable across runs.

#include "softfoot/results_io.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace softfoot {

namespace detail {

inline std::string fmt(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// stability map (SVG)

// Green/red dots at the 91 load points, the unloaded footprint rectangle,
// the obstacle band, and axes at the ankle projection; toes toward +x.
inline std::string render_map_svg(const SweepResult& sweep, const Rect& footprint,
                                  const Terrain& terrain) {
  const double margin = 24.0;
  const double sx = terrain.plate.size_x, sy = terrain.plate.size_y;
  const double w = sx + 2 * margin, h = sy + 2 * margin;
  auto X = [&](double x) { return detail::fmt(x + 0.5 * sx + margin); };
  auto Y = [&](double y) { return detail::fmt(0.5 * sy - y + margin); };  // y up

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt(w) +
         "\" height=\"" + detail::fmt(h) + "\" viewBox=\"0 0 " + detail::fmt(w) + " " +
         detail::fmt(h) + "\">\n";
  svg += "<title>" + sweep.foot_label + std::string(sweep.stiff_springs ? " (stiff)" : "") +
         " on " + sweep.terrain_id + "</title>\n";
  // plate
  svg += "<rect x=\"" + X(-0.5 * sx) + "\" y=\"" + Y(0.5 * sy) + "\" width=\"" +
         detail::fmt(sx) + "\" height=\"" + detail::fmt(sy) +
         "\" fill=\"#f4f4f4\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  // obstacle band: bounding rectangle of the obstacle row, filled black
  if (terrain.layout && !terrain.layout->obstacles.empty()) {
    double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
    for (const auto& ob : terrain.layout->obstacles) {
      x0 = std::min(x0, ob.center.x() - ob.radius());
      x1 = std::max(x1, ob.center.x() + ob.radius());
      y0 = std::min(y0, ob.center.y() - ob.radius());
      y1 = std::max(y1, ob.center.y() + ob.radius());
    }
    svg += "<rect x=\"" + X(x0) + "\" y=\"" + Y(y1) + "\" width=\"" + detail::fmt(x1 - x0) +
           "\" height=\"" + detail::fmt(y1 - y0) + "\" fill=\"#222\"/>\n";
  }
  // unloaded footprint
  svg += "<rect x=\"" + X(footprint.x_min) + "\" y=\"" + Y(footprint.y_max) +
         "\" width=\"" + detail::fmt(footprint.length()) + "\" height=\"" +
         detail::fmt(footprint.height()) +
         "\" fill=\"none\" stroke=\"#000\" stroke-width=\"1.5\"/>\n";
  // ankle-origin axes
  svg += "<line x1=\"" + X(-30) + "\" y1=\"" + Y(0) + "\" x2=\"" + X(45) + "\" y2=\"" +
         Y(0) + "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + X(0) + "\" y1=\"" + Y(-30) + "\" x2=\"" + X(0) + "\" y2=\"" +
         Y(45) + "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + X(48) + "\" y=\"" + Y(-4) + "\" font-size=\"10\">x</text>\n";
  svg += "<text x=\"" + X(3) + "\" y=\"" + Y(48) + "\" font-size=\"10\">y</text>\n";
  // dots
  for (const auto& o : sweep.outcomes) {
    svg += "<circle cx=\"" + X(o.point.x()) + "\" cy=\"" + Y(o.point.y()) +
           "\" r=\"4\" fill=\"" + (o.stable() ? "#1a9641" : "#d7191c") + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// ---------------------------------------------------------------------------
// loaded results

struct LoadedStudy {
  // (label, stiff) -> terrain -> sweep
  std::map<std::pair<std::string, bool>, std::map<std::string, SweepResult>> sweeps;

  const SweepResult* find(const std::string& label, bool stiff,
                          const std::string& terrain) const {
    auto it = sweeps.find({label, stiff});
    if (it == sweeps.end()) return nullptr;
    auto jt = it->second.find(terrain);
    return jt == it->second.end() ? nullptr : &jt->second;
  }

  // reference sweep: the rigid foot on the same terrain, same spring set
  // preferred (the rigid foot carries no coil springs, so either matches)
  const SweepResult* reference(const std::string& terrain, bool stiff) const {
    if (const SweepResult* r = find("RIGID", stiff, terrain)) return r;
    return find("RIGID", !stiff, terrain);
  }
};

inline LoadedStudy load_study(const std::filesystem::path& dir) {
  LoadedStudy study;
  if (!std::filesystem::exists(dir)) return study;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() != "sweep.json") continue;
    SweepResult sweep = load_sweep(entry.path());
    study.sweeps[{sweep.foot_label, sweep.stiff_springs}][sweep.terrain_id] =
        std::move(sweep);
  }
  return study;
}

// ---------------------------------------------------------------------------
// stability table

inline const std::vector<std::string>& table_terrain_order() {
  static const std::vector<std::string> order = {"heel_s", "heel_m", "heel_l",
                                                 "fore_s", "fore_m", "fore_l"};
  return order;
}

inline const std::vector<std::string>& table_foot_order() {
  static const std::vector<std::string> order = {"RIGID", "KKF", "KKK", "KRF",
                                                 "KRK", "KRR", "RRR"};
  return order;
}

struct TableCell {
  StabilityStats stats;
  ColorBucket bucket = ColorBucket::Orange;
};

struct TableRow {
  std::string label;
  bool stiff = false;
  std::map<std::string, TableCell> cells;  // by terrain id
  double n_average = 0.0;
};

struct StabilityTable {
  std::vector<TableRow> rows;
};

// Builds the per-foot rows over the six obstacle terrains. Every cell is
// compute_stats output; nothing is recomputed by the formatters.
inline StabilityTable build_table(const LoadedStudy& study, const Rect& footprint) {
  StabilityTable table;
  for (bool stiff : {false, true}) {
    for (const auto& label : table_foot_order()) {
      auto it = study.sweeps.find({label, stiff});
      if (it == study.sweeps.end()) continue;
      TableRow row;
      row.label = label;
      row.stiff = stiff;
      std::vector<int> counts;
      for (const auto& terrain : table_terrain_order()) {
        const SweepResult* sweep = study.find(label, stiff, terrain);
        const SweepResult* ref = study.reference(terrain, stiff);
        if (!sweep || !ref) continue;
        TableCell cell;
        cell.stats = compute_stats(*sweep, *ref, footprint);
        cell.bucket = color_bucket(cell.stats.pct);
        counts.push_back(cell.stats.n);
        row.cells[terrain] = cell;
      }
      if (row.cells.empty()) continue;
      row.n_average = average_stable_count(counts);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

inline std::string table_to_csv(const StabilityTable& table) {
  std::string csv = "foot,springs,terrain,pct,n,pct_e,n_e,color\n";
  char buf[160];
  for (const auto& row : table.rows) {
    for (const auto& terrain : table_terrain_order()) {
      auto it = row.cells.find(terrain);
      if (it == row.cells.end()) continue;
      const TableCell& c = it->second;
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%ld,%d,%ld,%d,%s\n", row.label.c_str(),
                    row.stiff ? "stiff" : "soft", terrain.c_str(), c.stats.pct_rounded(),
                    c.stats.n, c.stats.pct_external_rounded(), c.stats.n_external,
                    std::string(color_bucket_name(c.bucket)).c_str());
      csv += buf;
    }
  }
  return csv;
}

inline std::string format_average(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  std::string s = buf;
  if (s.size() > 2 && s.substr(s.size() - 2) == ".0") s.resize(s.size() - 2);
  return s;
}

inline std::string table_to_markdown(const StabilityTable& table) {
  std::string md;
  md += "| foot | set |";
  for (const auto& t : table_terrain_order()) md += " " + t + " % (n) | %E (nE) |";
  md += " n_avg |\n";
  md += "|---|---|";
  for (size_t i = 0; i < table_terrain_order().size(); ++i) md += "---|---|";
  md += "---|\n";
  char buf[96];
  for (const auto& row : table.rows) {
    md += "| " + row.label + " | " + (row.stiff ? "stiff" : "soft") + " |";
    for (const auto& terrain : table_terrain_order()) {
      auto it = row.cells.find(terrain);
      if (it == row.cells.end()) {
        md += " - | - |";
        continue;
      }
      const TableCell& c = it->second;
      std::snprintf(buf, sizeof(buf), " %ld (%d) [%s] | %ld (%d) |",
                    c.stats.pct_rounded(), c.stats.n,
                    std::string(color_bucket_name(c.bucket)).c_str(),
                    c.stats.pct_external_rounded(), c.stats.n_external);
      md += buf;
    }
    md += " " + format_average(row.n_average) + " |\n";
  }
  return md;
}

// ---------------------------------------------------------------------------
// bar-chart data

// Per foot and terrain: percentage against the rigid reference, against the
// 50-point ideal footprint coverage, and the external share.
inline std::string bars_csv(const LoadedStudy& study, const Rect& footprint,
                            int ideal_points = 50) {
  std::string csv =
      "foot,springs,terrain,region,size,n,pct_vs_rigid,pct_vs_ideal,pct_external\n";
  char buf[192];
  for (const auto& [key, by_terrain] : study.sweeps) {
    for (const auto& terrain : table_terrain_order()) {
      auto it = by_terrain.find(terrain);
      if (it == by_terrain.end()) continue;
      const SweepResult* ref = study.reference(terrain, key.second);
      if (!ref) continue;
      const StabilityStats st = compute_stats(it->second, *ref, footprint);
      const double vs_ideal = 100.0 * st.n / ideal_points;
      const std::string region = terrain.substr(0, 4) == "heel" ? "heel" : "forefoot";
      const std::string size(1, static_cast<char>(std::toupper(terrain.back())));
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%s,%d,%.4f,%.4f,%.4f\n",
                    key.first.c_str(), key.second ? "stiff" : "soft", terrain.c_str(),
                    region.c_str(), size.c_str(), st.n, st.pct, vs_ideal,
                    st.pct_external);
      csv += buf;
    }
  }
  return csv;
}

// ---------------------------------------------------------------------------
// study runner

struct StudyManifest {
  std::vector<std::string> feet;
  std::vector<std::string> terrains;
  bool stiff_springs = false;
  int ramp_steps = 20;
  int jobs = 1;
  ModuleGeometry geometry;
  MaterialParams material_overrides;  // coil stiffness replaced by spring set
  bool have_material_overrides = false;
};

struct StudyRunReport {
  int executed = 0;
  int skipped = 0;
  bool any_internal_error = false;
  std::vector<std::string> sweep_files;
};

// Runs every foot x terrain sweep of the manifest into out_dir. Sweeps whose
// file already exists with a matching configuration hash are not recomputed.
inline StudyRunReport run_study(const StudyManifest& manifest,
                                const std::filesystem::path& out_dir,
                                bool quiet = false) {
  StudyRunReport report;
  ordered_json index;
  index["schema"] = "softfoot-study-v1";
  index["springs"] = manifest.stiff_springs ? "stiff" : "soft";
  ordered_json sweeps_json = ordered_json::array();

  std::string csv = outcomes_csv_header();
  for (const auto& label : manifest.feet) {
    MaterialParams mat = manifest.have_material_overrides
                             ? manifest.material_overrides
                             : (manifest.stiff_springs ? stiff_spring_set()
                                                       : soft_spring_set());
    FootAssembly foot = build_foot(label, manifest.geometry, mat);
    TrialParams params;
    params.ramp_steps = manifest.ramp_steps;
    params.solver.ramp_steps = manifest.ramp_steps;
    for (const auto& terrain_id : manifest.terrains) {
      const Terrain terrain = terrain_from_id(terrain_id);
      const std::string hash = config_hash(foot, terrain, params);
      const auto path = sweep_path(out_dir, label, manifest.stiff_springs, terrain_id);
      SweepResult sweep;
      if (stored_sweep_hash(path) == hash) {
        sweep = load_sweep(path);
        ++report.skipped;
        if (!quiet) {
          std::printf("[skip] %s %s on %s (up to date)\n", label.c_str(),
                      manifest.stiff_springs ? "stiff" : "soft", terrain_id.c_str());
        }
      } else {
        sweep = run_sweep(foot, terrain, params, manifest.jobs);
        sweep.stiff_springs = manifest.stiff_springs;
        save_sweep(out_dir, sweep, hash);
        ++report.executed;
        if (!quiet) {
          std::printf("[run ] %s %s on %s: %d/%zu stable\n", label.c_str(),
                      manifest.stiff_springs ? "stiff" : "soft", terrain_id.c_str(),
                      sweep.stable_count(), sweep.outcomes.size());
        }
      }
      report.any_internal_error |= sweep.any_internal_error();
      append_outcomes_csv(csv, sweep);
      ordered_json entry;
      entry["foot"] = label;
      entry["terrain"] = terrain_id;
      entry["path"] = std::filesystem::relative(path, out_dir).string();
      entry["config_hash"] = hash;
      entry["n_stable"] = sweep.stable_count();
      sweeps_json.push_back(std::move(entry));
      report.sweep_files.push_back(path.string());
    }
  }
  index["sweeps"] = std::move(sweeps_json);
  write_text_file(out_dir / "study.json", index.dump(1) + "\n");
  write_text_file(out_dir / "outcomes.csv", csv);
  return report;
}

// ---------------------------------------------------------------------------
// trend comparison (model validation, informational)

struct TrendCheck {
  std::string description;
  bool observed = false;
  std::string detail;
};

// Compares the generated table against the study's published findings: soft
// configurations beating the rigid reference on forefoot obstacles, and the
// stiffer spring set raising the KRK stable counts. Informational output,
// not a pass/fail gate.
inline std::vector<TrendCheck> validation_trends(const LoadedStudy& study,
                                                 const Rect& footprint) {
  std::vector<TrendCheck> checks;
  const std::vector<std::string> fore = {"fore_s", "fore_m", "fore_l"};

  for (const auto& label : {"KKF", "KKK", "KRF", "KRK", "KRR", "RRR"}) {
    int wins = 0, total = 0;
    std::string detail;
    for (const auto& terrain : fore) {
      const SweepResult* sweep = study.find(label, false, terrain);
      const SweepResult* ref = study.reference(terrain, false);
      if (!sweep || !ref) continue;
      const StabilityStats st = compute_stats(*sweep, *ref, footprint);
      ++total;
      if (st.pct > 100.0) ++wins;
      detail += terrain + "=" + std::to_string(st.pct_rounded()) + "% ";
    }
    TrendCheck c;
    c.description = std::string(label) + " exceeds the rigid foot on forefoot obstacles";
    c.observed = total > 0 && wins == total;
    c.detail = detail.empty() ? "no data" : detail;
    checks.push_back(std::move(c));
  }

  {
    TrendCheck c;
    c.description = "stiffer coil springs increase KRK stable counts";
    int better = 0, total = 0;
    std::string detail;
    for (const auto& terrain : table_terrain_order()) {
      const SweepResult* soft = study.find("KRK", false, terrain);
      const SweepResult* stiff = study.find("KRK", true, terrain);
      if (!soft || !stiff) continue;
      ++total;
      if (stiff->stable_count() >= soft->stable_count()) ++better;
      detail += terrain + ":" + std::to_string(soft->stable_count()) + "->" +
                std::to_string(stiff->stable_count()) + " ";
    }
    c.observed = total > 0 && better == total;
    c.detail = detail.empty() ? "no data" : detail;
    checks.push_back(std::move(c));
  }
  return checks;
}

inline std::string validation_report(const std::vector<TrendCheck>& checks) {
  std::string out;
  out += "# Trend comparison (model validation output, not a pass/fail gate)\n\n";
  for (const auto& c : checks) {
    out += std::string(c.observed ? "[agrees   ] " : "[disagrees] ") + c.description +
           "  -- " + c.detail + "\n";
  }
  return out;
}

}  // namespace softfoot
