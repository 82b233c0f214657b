#pragma once

// JSON config files: foot definitions, terrain configs, study manifests.
// Unknown keys are errors so typos surface instead of silently using
// defaults.

#include "softfoot/report.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace softfoot {

inline void apply_geometry_overrides(const ordered_json& j, ModuleGeometry& g) {
  for (const auto& [key, value] : j.items()) {
    if (key == "module_count") g.module_count = value.get<int>();
    else if (key == "sole_body_count") g.sole_body_count = value.get<int>();
    else if (key == "sole_body_length") g.sole_body_length = value.get<double>();
    else if (key == "module_width") g.module_width = value.get<double>();
    else if (key == "toe_lengths") {
      g.toe_lengths = {value.at(0).get<double>(), value.at(1).get<double>(),
                       value.at(2).get<double>()};
    } else if (key == "hinge_height") g.hinge_height = value.get<double>();
    else if (key == "heel_back_offset") g.heel_back_offset = value.get<double>();
    else if (key == "shaft_height") g.shaft_height = value.get<double>();
    else if (key == "ankle_height") g.ankle_height = value.get<double>();
    else if (key == "heel_joint_dx") g.heel_joint_dx = value.get<double>();
    else if (key == "heel_joint_z") g.heel_joint_z = value.get<double>();
    else if (key == "coil_lever_arm") g.coil_lever_arm = value.get<double>();
    else if (key == "coil_lower_anchor_dx") g.coil_lower_anchor_dx = value.get<double>();
    else if (key == "soft_foot_mass_kg") g.soft_foot_mass_kg = value.get<double>();
    else if (key == "rigid_foot_mass_kg") g.rigid_foot_mass_kg = value.get<double>();
    else throw std::invalid_argument("unknown geometry key: " + key);
  }
}

inline void apply_material_overrides(const ordered_json& j, MaterialParams& m) {
  for (const auto& [key, value] : j.items()) {
    if (key == "coil_spring_k") m.coil_spring_k = value.get<double>();
    else if (key == "band_k") m.band_k = value.get<double>();
    else if (key == "band_lever_arm") m.band_lever_arm = value.get<double>();
    else if (key == "band_rest_length") m.band_rest_length = value.get<double>();
    else if (key == "tendon_stiffness") m.tendon_stiffness = value.get<double>();
    else if (key == "tendon_pretension") m.tendon_pretension = value.get<double>();
    else if (key == "tendon_engagement_slack") m.tendon_engagement_slack = value.get<double>();
    else if (key == "sheet_k_trans") m.sheet_k_trans = value.get<double>();
    else if (key == "sheet_k_rot") m.sheet_k_rot = value.get<double>();
    else if (key == "friction_mu") m.friction_mu = value.get<double>();
    else throw std::invalid_argument("unknown material key: " + key);
  }
}

struct FootDefinition {
  std::string label = "KRK";
  bool stiff_springs = false;
  ModuleGeometry geometry;
  MaterialParams materials;
  bool have_materials = false;
};

// {"label": "KRK", "springs": "soft", "geometry": {...}, "materials": {...}}
inline FootDefinition parse_foot_definition(const ordered_json& j) {
  FootDefinition def;
  for (const auto& [key, value] : j.items()) {
    if (key == "label") def.label = value.get<std::string>();
    else if (key == "springs") {
      const std::string s = value.get<std::string>();
      if (s != "soft" && s != "stiff") throw std::invalid_argument("springs: soft|stiff");
      def.stiff_springs = s == "stiff";
    } else if (key == "geometry") apply_geometry_overrides(value, def.geometry);
    else if (key == "materials") {
      def.materials = def.stiff_springs ? stiff_spring_set() : soft_spring_set();
      apply_material_overrides(value, def.materials);
      def.have_materials = true;
    } else throw std::invalid_argument("unknown foot definition key: " + key);
  }
  return def;
}

inline FootAssembly build_from_definition(const FootDefinition& def) {
  const MaterialParams mat = def.have_materials
                                 ? def.materials
                                 : (def.stiff_springs ? stiff_spring_set()
                                                      : soft_spring_set());
  return build_foot(def.label, def.geometry, mat);
}

// {"layout": "heel_s" | {"size": "S", "region": "heel"}, "pitch_x": ...,
//  "pitch_y": ..., "friction_mu": ..., "heel_row_x": ..., "fore_row_x": ...}
inline Terrain parse_terrain_config(const ordered_json& j) {
  Plate plate;
  double mu = 0.8;
  double heel_row_x = kHeelRowX, fore_row_x = kForefootRowX;
  std::string layout_id = "flat";
  std::optional<std::pair<ObstacleSize, FootRegion>> layout_parts;

  for (const auto& [key, value] : j.items()) {
    if (key == "layout") {
      if (value.is_string()) {
        layout_id = value.get<std::string>();
      } else {
        const std::string size = value.at("size").get<std::string>();
        const std::string region = value.at("region").get<std::string>();
        ObstacleSize os = size == "S" ? ObstacleSize::S
                          : size == "M" ? ObstacleSize::M
                          : size == "L" ? ObstacleSize::L
                                        : throw std::invalid_argument("size: S|M|L");
        FootRegion fr = region == "heel" ? FootRegion::Heel
                        : region == "forefoot"
                            ? FootRegion::Forefoot
                            : throw std::invalid_argument("region: heel|forefoot");
        layout_parts = {os, fr};
      }
    } else if (key == "pitch_x") plate.pitch_x = value.get<double>();
    else if (key == "pitch_y") plate.pitch_y = value.get<double>();
    else if (key == "friction_mu") mu = value.get<double>();
    else if (key == "heel_row_x") heel_row_x = value.get<double>();
    else if (key == "fore_row_x") fore_row_x = value.get<double>();
    else throw std::invalid_argument("unknown terrain key: " + key);
  }

  Terrain t;
  if (layout_parts) {
    t.plate = plate;
    t.layout = build_layout(layout_parts->first, layout_parts->second, plate, heel_row_x,
                            fore_row_x);
    t.id = std::string(layout_parts->second == FootRegion::Heel ? "heel_" : "fore_") +
           static_cast<char>(std::tolower(std::string(
               obstacle_size_name(layout_parts->first))[0]));
  } else {
    t = terrain_from_id(layout_id, plate);
  }
  t.friction_mu = mu;
  return t;
}

// {"feet": ["KRK", ...] or [{"label": ...}], "terrains": [...],
//  "springs": "soft"|"stiff", "steps": 20, "jobs": 8,
//  "deterministic": true, "geometry": {...}, "materials": {...}}
inline StudyManifest parse_manifest(const ordered_json& j) {
  StudyManifest m;
  for (const auto& [key, value] : j.items()) {
    if (key == "feet") {
      for (const auto& f : value) {
        if (f.is_string()) m.feet.push_back(f.get<std::string>());
        else m.feet.push_back(f.at("label").get<std::string>());
      }
    } else if (key == "terrains") {
      for (const auto& t : value) m.terrains.push_back(t.get<std::string>());
    } else if (key == "springs") {
      const std::string s = value.get<std::string>();
      if (s != "soft" && s != "stiff") throw std::invalid_argument("springs: soft|stiff");
      m.stiff_springs = s == "stiff";
    } else if (key == "steps") m.ramp_steps = value.get<int>();
    else if (key == "jobs") m.jobs = value.get<int>();
    else if (key == "deterministic") {
      if (!value.get<bool>()) {
        throw std::invalid_argument("manifest: runs are always deterministic");
      }
    } else if (key == "geometry") apply_geometry_overrides(value, m.geometry);
    else if (key == "materials") {
      m.material_overrides = m.stiff_springs ? stiff_spring_set() : soft_spring_set();
      apply_material_overrides(value, m.material_overrides);
      m.have_material_overrides = true;
    } else throw std::invalid_argument("unknown manifest key: " + key);
  }
  for (const auto& label : m.feet) {
    if (!is_soft_label(label) && label != "RIGID") {
      throw std::invalid_argument("manifest: unknown foot label " + label);
    }
  }
  for (const auto& t : m.terrains) terrain_from_id(t);  // validates
  return m;
}

inline StudyManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(ordered_json::parse(read_text_file(path)));
}

// The full published protocol: seven feet on the six obstacle terrains.
inline StudyManifest replication_manifest(bool stiff = false, int jobs = 1) {
  StudyManifest m;
  if (stiff) {
    m.feet = {"RIGID", "KRF", "KRK", "RRR"};
  } else {
    m.feet = {"RIGID", "KKF", "KKK", "KRF", "KRK", "KRR", "RRR"};
  }
  for (const auto& t : study_terrains()) m.terrains.push_back(t.id);
  m.stiff_springs = stiff;
  m.jobs = jobs;
  return m;
}

}  // namespace softfoot
