// Command-line front end: design-space enumeration, foot and terrain
// inspection, study execution, and report generation.

#include "softfoot/config_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

namespace {

using namespace softfoot;

ordered_json assignment_to_json(const ConnectionAssignment& a) {
  ordered_json j;
  for (Component c : kAllComponents) {
    j[std::string(component_name(c))] = std::string(1, connection_letter(a.at(c)));
  }
  return j;
}

ordered_json trace_to_json(const ConstraintResult& r) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : r.trace) {
    ordered_json jv;
    jv["rule"] = std::string(rule_name(v.rule));
    jv["outcome"] = v.outcome == Verdict::Accept ? "accept"
                    : v.outcome == Verdict::Reject ? "reject"
                                                   : "rewrite";
    if (!v.note.empty()) jv["note"] = v.note;
    if (v.rewritten_to) jv["rewritten_to"] = v.rewritten_to->label();
    arr.push_back(std::move(jv));
  }
  return arr;
}

int cmd_enumerate(bool include_rejected, const std::string& out_file) {
  const auto designs = enumerate_designs(include_rejected);
  ordered_json doc;
  doc["raw_space_size"] = RawDesignSpace::kSize;
  int accepted = 0;
  ordered_json list = ordered_json::array();
  for (const auto& rec : designs) {
    if (rec.result.accepted) ++accepted;
    ordered_json item;
    item["label"] = rec.assignment.label();
    item["accepted"] = rec.result.accepted;
    item["canonical"] = canonicalize(rec.assignment).label();
    item["assignment"] = assignment_to_json(rec.assignment);
    item["trace"] = trace_to_json(rec.result);
    list.push_back(std::move(item));
  }
  doc["accepted_count"] = accepted;
  ordered_json finals = ordered_json::array();
  for (const auto& l : final_design_labels()) finals.push_back(l);
  doc["final_labels"] = std::move(finals);
  doc["designs"] = std::move(list);
  const std::string text = doc.dump(1) + "\n";
  if (out_file.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_text_file(out_file, text);
    std::printf("wrote %s (%d designs, %d accepted)\n", out_file.c_str(),
                static_cast<int>(designs.size()), accepted);
  }
  return 0;
}

int cmd_describe(const std::string& def_file, const std::string& label, bool stiff) {
  FootDefinition def;
  if (!def_file.empty()) {
    def = parse_foot_definition(ordered_json::parse(read_text_file(def_file)));
  } else {
    def.label = label;
    def.stiff_springs = stiff;
  }
  const FootAssembly foot = build_from_definition(def);
  const Rect fp = foot.unloaded_footprint();
  const MassProperties mp = foot.mass_properties();
  std::printf("foot           : %s (%s springs)\n", foot.label.c_str(),
              def.stiff_springs ? "stiff" : "soft");
  std::printf("dof            : %d total, %d internal\n", foot.dof_count(),
              foot.internal_dof_count());
  std::printf("mass           : %.4f kg (weight %.2f N)\n", mp.mass_kg,
              mp.mass_kg * kGravity);
  std::printf("com            : (%.2f, %.2f, %.2f) mm\n", mp.com.x(), mp.com.y(),
              mp.com.z());
  std::printf("footprint      : x [%.1f, %.1f]  y [%.1f, %.1f] mm\n", fp.x_min, fp.x_max,
              fp.y_min, fp.y_max);
  for (const auto& c : foot.couplings) {
    std::printf("coupling %-13s: %c (%zu pairs)\n", std::string(site_name(c.site)).c_str(),
                connection_letter(c.type), c.pairs.size());
  }
  if (!foot.rigid) {
    std::printf("coil spring    : %.3f N/mm, rest length %.2f mm\n",
                foot.materials.coil_spring_k, foot.coil_rest_length);
    std::printf("tendon         : rest routed length %.2f mm, pretension %.1f N/module\n",
                foot.tendon_rest_length, tendon_pretension_per_module(100.0));
  }
  return 0;
}

int cmd_terrain_show(const std::string& id, const std::string& config_file,
                     const std::string& svg_file) {
  Terrain t = config_file.empty()
                  ? terrain_from_id(id)
                  : parse_terrain_config(ordered_json::parse(read_text_file(config_file)));
  const auto pts = grid_points(t.plate);
  std::printf("terrain %s: plate %.0fx%.0f mm, %zu holes, mu=%.2f\n", t.id.c_str(),
              t.plate.size_x, t.plate.size_y, pts.size(), t.friction_mu);
  // ASCII map: rows from +y (top) to -y, columns from -x to +x
  for (int iy = t.plate.grid_ny - 1; iy >= 0; --iy) {
    std::string line = "  ";
    for (int ix = 0; ix < t.plate.grid_nx; ++ix) {
      const Vec2& p = pts[static_cast<size_t>(iy * t.plate.grid_nx + ix)];
      line += height_at(t, p.x(), p.y()) > 0 ? " #" : " o";
    }
    std::printf("%s\n", line.c_str());
  }
  std::printf("  ('o' hole, '#' obstacle; +x right toward the toes)\n");
  if (!svg_file.empty()) {
    SweepResult empty;
    empty.foot_label = "terrain";
    empty.terrain_id = t.id;
    const Rect fp = build_foot("RIGID").unloaded_footprint();
    write_text_file(svg_file, render_map_svg(empty, fp, t));
    std::printf("wrote %s\n", svg_file.c_str());
  }
  return 0;
}

int cmd_run(const std::string& manifest_file, bool replicate, const std::string& out_dir,
            const std::string& springs, int steps, int jobs) {
  StudyManifest manifest;
  if (!manifest_file.empty()) {
    manifest = load_manifest(manifest_file);
  } else if (replicate) {
    manifest = replication_manifest(springs == "stiff", jobs);
  } else {
    std::fprintf(stderr, "run: need --manifest FILE or --replicate\n");
    return 2;
  }
  if (!springs.empty()) manifest.stiff_springs = springs == "stiff";
  if (steps > 0) manifest.ramp_steps = steps;
  if (jobs > 0) manifest.jobs = jobs;
  const StudyRunReport report = run_study(manifest, out_dir);
  std::printf("study complete: %d sweeps run, %d reused, results in %s\n",
              report.executed, report.skipped, out_dir.c_str());
  if (report.any_internal_error) {
    std::fprintf(stderr, "warning: internal trial errors were recorded\n");
    return 1;
  }
  return 0;
}

int cmd_table(const std::string& results_dir, const std::string& out_file,
              const std::string& format, bool trends) {
  const LoadedStudy study = load_study(results_dir);
  if (study.sweeps.empty()) {
    std::fprintf(stderr, "table: no sweeps found in %s\n", results_dir.c_str());
    return 2;
  }
  const Rect fp = build_foot("RIGID").unloaded_footprint();
  const StabilityTable table = build_table(study, fp);
  std::string text = format == "md" ? table_to_markdown(table) : table_to_csv(table);
  if (trends) text += "\n" + validation_report(validation_trends(study, fp));
  if (out_file.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_text_file(out_file, text);
    std::printf("wrote %s\n", out_file.c_str());
  }
  return 0;
}

int cmd_map(const std::string& results_dir, const std::string& label,
            const std::string& terrain_id, bool stiff, const std::string& out_file) {
  const auto path = sweep_path(results_dir, label, stiff, terrain_id);
  if (!std::filesystem::exists(path)) {
    std::fprintf(stderr, "map: missing sweep %s\n", path.string().c_str());
    return 2;
  }
  const SweepResult sweep = load_sweep(path);
  const Terrain terrain = terrain_from_id(terrain_id);
  const Rect fp = build_foot(label).unloaded_footprint();
  const std::string svg = render_map_svg(sweep, fp, terrain);
  if (out_file.empty()) {
    std::fwrite(svg.data(), 1, svg.size(), stdout);
  } else {
    write_text_file(out_file, svg);
    std::printf("wrote %s\n", out_file.c_str());
  }
  return 0;
}

int cmd_bars(const std::string& results_dir, const std::string& out_file) {
  const LoadedStudy study = load_study(results_dir);
  if (study.sweeps.empty()) {
    std::fprintf(stderr, "bars: no sweeps found in %s\n", results_dir.c_str());
    return 2;
  }
  const Rect fp = build_foot("RIGID").unloaded_footprint();
  const std::string csv = bars_csv(study, fp);
  if (out_file.empty()) {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    write_text_file(out_file, csv);
    std::printf("wrote %s\n", out_file.c_str());
  }
  return 0;
}

int cmd_trace(const std::string& label, bool stiff, const std::string& terrain_id,
              double x, double y, int steps, const std::string& out_file) {
  const FootAssembly foot = build_foot_with_springs(label, stiff);
  const Terrain terrain = terrain_from_id(terrain_id);
  TrialParams params;
  if (steps > 0) params.ramp_steps = steps;
  // snap to the nearest grid hole
  const auto pts = grid_points(terrain.plate);
  int best = 0;
  double best_d = 1e30;
  for (size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - Vec2(x, y)).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  const TrialOutcome out =
      run_trial(foot, terrain, best, pts[static_cast<size_t>(best)], params);
  const std::string csv = trace_csv(out);
  std::printf("trial %s on %s at (%.0f, %.0f): %s%s\n", label.c_str(), terrain_id.c_str(),
              pts[static_cast<size_t>(best)].x(), pts[static_cast<size_t>(best)].y(),
              out.stable() ? "stable" : "unstable",
              out.stable() ? "" : (" (" + std::string(instability_mode_name(out.mode)) + ")").c_str());
  if (out_file.empty()) {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    write_text_file(out_file, csv);
    std::printf("wrote %s\n", out_file.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softfoot: adaptive-foot design-space and footprint-stability toolkit"};
  app.require_subcommand(1);

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "enumerate transverse-connection designs");
  bool enum_all = false;
  std::string enum_out;
  enumerate->add_flag("--all", enum_all, "include rejected designs with their traces");
  enumerate->add_option("--out", enum_out, "output JSON file (default stdout)");

  // describe
  auto* describe = app.add_subcommand("describe", "print foot DoF count, mass, footprint");
  std::string desc_file, desc_label = "KRK", desc_springs = "soft";
  describe->add_option("--foot", desc_file, "foot definition JSON file");
  describe->add_option("--label", desc_label, "foot label (KKF..KRR, RRR, RIGID)");
  describe->add_option("--springs", desc_springs, "soft|stiff")
      ->check(CLI::IsMember({"soft", "stiff"}));

  // terrain show
  auto* terrain = app.add_subcommand("terrain", "terrain utilities");
  auto* tshow = terrain->add_subcommand("show", "print a map of holes and obstacles");
  std::string terr_id = "flat", terr_cfg, terr_svg;
  tshow->add_option("--id", terr_id, "terrain id (flat, heel_s..fore_l)");
  tshow->add_option("--config", terr_cfg, "terrain config JSON file");
  tshow->add_option("--svg", terr_svg, "also write an SVG map");
  terrain->require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "execute a study manifest");
  std::string run_manifest, run_out = "results", run_springs;
  bool run_replicate = false;
  int run_steps = 0, run_jobs = 0;
  run->add_option("--manifest", run_manifest, "manifest JSON file");
  run->add_flag("--replicate", run_replicate, "use the built-in full-study manifest");
  run->add_option("--out", run_out, "results directory");
  run->add_option("--springs", run_springs, "soft|stiff")
      ->check(CLI::IsMember({"soft", "stiff"}));
  run->add_option("--steps", run_steps, "ramp steps per trial");
  run->add_option("--jobs", run_jobs, "parallel trial workers");

  // table
  auto* table = app.add_subcommand("table", "stability table from persisted sweeps");
  std::string table_results = "results", table_out, table_format = "csv";
  bool table_trends = false;
  table->add_option("--results", table_results, "results directory");
  table->add_option("--out", table_out, "output file (default stdout)");
  table->add_option("--format", table_format, "csv|md")
      ->check(CLI::IsMember({"csv", "md"}));
  table->add_flag("--trends", table_trends, "append the trend comparison report");

  // map
  auto* map_cmd = app.add_subcommand("map", "SVG stability map for one sweep");
  std::string map_results = "results", map_label = "KRK", map_terrain = "heel_s", map_out;
  bool map_stiff = false;
  map_cmd->add_option("--results", map_results, "results directory");
  map_cmd->add_option("--foot", map_label, "foot label");
  map_cmd->add_option("--terrain", map_terrain, "terrain id");
  map_cmd->add_flag("--stiff", map_stiff, "stiff spring set");
  map_cmd->add_option("--out", map_out, "output SVG file (default stdout)");

  // bars
  auto* bars = app.add_subcommand("bars", "bar-chart CSV (vs rigid and vs ideal)");
  std::string bars_results = "results", bars_out;
  bars->add_option("--results", bars_results, "results directory");
  bars->add_option("--out", bars_out, "output CSV (default stdout)");

  // trace
  auto* trace = app.add_subcommand("trace", "re-run one trial and dump its ramp CSV");
  std::string trace_label = "KRK", trace_terrain = "flat", trace_out;
  bool trace_stiff = false;
  double trace_x = 0, trace_y = 0;
  int trace_steps = 0;
  trace->add_option("--label", trace_label, "foot label");
  trace->add_option("--terrain", trace_terrain, "terrain id");
  trace->add_flag("--stiff", trace_stiff, "stiff spring set");
  trace->add_option("--x", trace_x, "application point x (snapped to the grid)");
  trace->add_option("--y", trace_y, "application point y (snapped to the grid)");
  trace->add_option("--steps", trace_steps, "ramp steps");
  trace->add_option("--out", trace_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enumerate) return cmd_enumerate(enum_all, enum_out);
    if (*describe) return cmd_describe(desc_file, desc_label, desc_springs == "stiff");
    if (*tshow) return cmd_terrain_show(terr_id, terr_cfg, terr_svg);
    if (*run) return cmd_run(run_manifest, run_replicate, run_out, run_springs, run_steps,
                             run_jobs);
    if (*table) return cmd_table(table_results, table_out, table_format, table_trends);
    if (*map_cmd) return cmd_map(map_results, map_label, map_terrain, map_stiff, map_out);
    if (*bars) return cmd_bars(bars_results, bars_out);
    if (*trace) return cmd_trace(trace_label, trace_stiff, trace_terrain, trace_x, trace_y,
                                 trace_steps, trace_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
