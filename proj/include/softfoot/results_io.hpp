#pragma once

// Persistence of sweeps and study indexes.
//
// Layout: <out>/<foot>[_stiff]/<terrain>/sweep.json, one JSON document per
// sweep, plus a top-level study.json index and a flat outcomes.csv. Sweep
// files embed a configuration hash so completed sweeps are skipped on rerun.
// Serialization is insertion-ordered and therefore byte-stable.

#include "softfoot/protocol.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace softfoot {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kSweepSchema = "softfoot-sweep-v1";

// FNV-1a, stable across platforms and runs.
inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_fingerprint(const FootAssembly& foot, const Terrain& terrain,
                                      const TrialParams& params) {
  std::ostringstream os;
  os.precision(17);
  const ModuleGeometry& g = foot.geometry;
  const MaterialParams& m = foot.materials;
  const SolverSettings& s = params.solver;
  os << foot.label << '|' << g.module_count << ',' << g.sole_body_count << ','
     << g.sole_body_length << ',' << g.module_width << ',' << g.toe_lengths[0] << ','
     << g.toe_lengths[1] << ',' << g.toe_lengths[2] << ',' << g.hinge_height << ','
     << g.heel_back_offset << ',' << g.shaft_height << ',' << g.ankle_height << ','
     << g.heel_joint_dx << ',' << g.heel_joint_z << ',' << g.coil_lever_arm << ','
     << g.coil_lower_anchor_dx << ',' << g.soft_foot_mass_kg << ',' << g.rigid_foot_mass_kg
     << '|' << m.coil_spring_k << ',' << m.band_k << ',' << m.band_lever_arm << ','
     << m.tendon_stiffness << ',' << m.tendon_engagement_slack << ',' << m.sheet_k_trans
     << ',' << m.sheet_k_rot << '|' << terrain.id << ',' << terrain.friction_mu << ','
     << terrain.plate.pitch_x << ',' << terrain.plate.pitch_y << '|' << s.contact_stiffness
     << ',' << s.loop_stiffness << ',' << s.rim_smoothing_mm << ',' << s.grad_tol << ','
     << s.penetration_tol << ',' << s.max_iterations << ',' << s.safety_box_mm << ','
     << s.displacement_threshold_mm << ',' << s.rotation_threshold_deg << '|'
     << params.load_mass_kg << ',' << params.ramp_steps;
  return os.str();
}

inline std::string config_hash(const FootAssembly& foot, const Terrain& terrain,
                               const TrialParams& params) {
  std::ostringstream os;
  os << std::hex << fnv1a(config_fingerprint(foot, terrain, params));
  return os.str();
}

inline ordered_json step_row_to_json(const StepRow& r) {
  return ordered_json::array({r.total_vertical_n, r.displacement_mm, r.rot_x_deg,
                              r.rot_y_deg, r.rot_z_deg, r.contact_count, r.converged});
}

inline StepRow step_row_from_json(const ordered_json& j) {
  StepRow r;
  r.total_vertical_n = j.at(0).get<double>();
  r.displacement_mm = j.at(1).get<double>();
  r.rot_x_deg = j.at(2).get<double>();
  r.rot_y_deg = j.at(3).get<double>();
  r.rot_z_deg = j.at(4).get<double>();
  r.contact_count = j.at(5).get<int>();
  r.converged = j.at(6).get<bool>();
  return r;
}

inline ordered_json sweep_to_json(const SweepResult& sweep, const std::string& hash) {
  ordered_json doc;
  doc["schema"] = kSweepSchema;
  doc["foot"] = sweep.foot_label;
  doc["terrain"] = sweep.terrain_id;
  doc["stiff_springs"] = sweep.stiff_springs;
  doc["config_hash"] = hash;
  ordered_json grid = ordered_json::array();
  for (const auto& p : sweep.grid) grid.push_back(ordered_json::array({p.x(), p.y()}));
  doc["grid"] = std::move(grid);
  ordered_json outs = ordered_json::array();
  for (const auto& o : sweep.outcomes) {
    ordered_json jo;
    jo["i"] = o.grid_index;
    jo["p"] = ordered_json::array({o.point.x(), o.point.y()});
    jo["stable"] = o.stable();
    jo["mode"] = std::string(instability_mode_name(o.mode));
    jo["final_force_n"] = o.final_force_n;
    jo["max_displacement_mm"] = o.max_displacement_mm;
    jo["max_rotation_deg"] = o.max_rotation_deg;
    jo["cone_violation"] = o.cone_violation;
    jo["error"] = o.error;
    jo["settle"] = step_row_to_json(o.settle);
    ordered_json steps = ordered_json::array();
    for (const auto& st : o.steps) steps.push_back(step_row_to_json(st));
    jo["steps"] = std::move(steps);
    outs.push_back(std::move(jo));
  }
  doc["outcomes"] = std::move(outs);
  return doc;
}

inline SweepResult sweep_from_json(const ordered_json& doc) {
  if (doc.at("schema").get<std::string>() != kSweepSchema) {
    throw std::runtime_error("sweep_from_json: unexpected schema");
  }
  SweepResult sweep;
  sweep.foot_label = doc.at("foot").get<std::string>();
  sweep.terrain_id = doc.at("terrain").get<std::string>();
  sweep.stiff_springs = doc.at("stiff_springs").get<bool>();
  for (const auto& p : doc.at("grid")) {
    sweep.grid.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  }
  for (const auto& jo : doc.at("outcomes")) {
    TrialOutcome o;
    o.grid_index = jo.at("i").get<int>();
    o.point = Vec2(jo.at("p").at(0).get<double>(), jo.at("p").at(1).get<double>());
    const bool stable = jo.at("stable").get<bool>();
    const std::string mode = jo.at("mode").get<std::string>();
    o.stability = stable ? Stability::Stable : Stability::Unstable;
    o.mode = mode == "none" ? InstabilityMode::None
             : mode == "displacement" ? InstabilityMode::Displacement
             : mode == "rotation" ? InstabilityMode::Rotation
                                  : InstabilityMode::Diverged;
    o.final_force_n = jo.at("final_force_n").get<double>();
    o.max_displacement_mm = jo.at("max_displacement_mm").get<double>();
    o.max_rotation_deg = jo.at("max_rotation_deg").get<double>();
    o.cone_violation = jo.at("cone_violation").get<bool>();
    o.error = jo.at("error").get<std::string>();
    o.settle = step_row_from_json(jo.at("settle"));
    for (const auto& st : jo.at("steps")) o.steps.push_back(step_row_from_json(st));
    sweep.outcomes.push_back(std::move(o));
  }
  return sweep;
}

inline std::string foot_dir_name(const std::string& label, bool stiff) {
  std::string name;
  for (char c : label) name += static_cast<char>(std::tolower(c));
  if (stiff) name += "_stiff";
  return name;
}

inline std::filesystem::path sweep_path(const std::filesystem::path& out_dir,
                                        const std::string& label, bool stiff,
                                        const std::string& terrain_id) {
  return out_dir / foot_dir_name(label, stiff) / terrain_id / "sweep.json";
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void save_sweep(const std::filesystem::path& out_dir, const SweepResult& sweep,
                       const std::string& hash) {
  const auto path = sweep_path(out_dir, sweep.foot_label, sweep.stiff_springs,
                               sweep.terrain_id);
  write_text_file(path, sweep_to_json(sweep, hash).dump(1) + "\n");
}

inline SweepResult load_sweep(const std::filesystem::path& path) {
  return sweep_from_json(ordered_json::parse(read_text_file(path)));
}

// Hash stored in an existing sweep file, or empty when absent/unreadable.
inline std::string stored_sweep_hash(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  try {
    const auto doc = ordered_json::parse(read_text_file(path));
    return doc.at("config_hash").get<std::string>();
  } catch (...) {
    return {};
  }
}

inline std::string outcomes_csv_header() {
  return "foot,springs,terrain,index,x_mm,y_mm,stable,mode,final_force_n,"
         "max_displacement_mm,max_rotation_deg,error\n";
}

inline void append_outcomes_csv(std::string& csv, const SweepResult& sweep) {
  char buf[256];
  for (const auto& o : sweep.outcomes) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%.1f,%.1f,%d,%s,%.4f,%.4f,%.4f,%s\n",
                  sweep.foot_label.c_str(), sweep.stiff_springs ? "stiff" : "soft",
                  sweep.terrain_id.c_str(), o.grid_index, o.point.x(), o.point.y(),
                  o.stable() ? 1 : 0, std::string(instability_mode_name(o.mode)).c_str(),
                  o.final_force_n, o.max_displacement_mm, o.max_rotation_deg,
                  o.error.empty() ? "" : "internal");
    csv += buf;
  }
}

// Per-trial ramp trace, one row per phase step (reaching, then pushing).
inline std::string trace_csv(const TrialOutcome& o) {
  std::string csv =
      "phase,step,total_vertical_n,displacement_mm,rot_x_deg,rot_y_deg,rot_z_deg,"
      "contact_count,converged\n";
  char buf[192];
  auto row = [&](const char* phase, int step, const StepRow& r) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d\n", phase, step,
                  r.total_vertical_n, r.displacement_mm, r.rot_x_deg, r.rot_y_deg,
                  r.rot_z_deg, r.contact_count, r.converged ? 1 : 0);
    csv += buf;
  };
  row("reaching", 0, o.settle);
  for (size_t i = 0; i < o.steps.size(); ++i) {
    row("pushing", static_cast<int>(i + 1), o.steps[i]);
  }
  return csv;
}

}  // namespace softfoot
