#pragma once

// Parametric mechanical models of the tested feet.
//
// A soft foot is five identical planar modules side by side. Each module is
// a closed sagittal-plane chain: rear arch and frontal arch pivot on a
// transverse shaft at the midtarsal-ankle joint, the heel hangs off the rear
// arch at the heel joint and carries the rearmost sole body, the sole bodies
// and toes continue forward as a hinged chain, and the frontal arch pins
// back onto the chain at the MTP point (closed by a stiff penalty in the
// solver). The shaft is rigid across modules, so it lives in the root body;
// transverse couplings at the frontal arches, rear arches, and heels are
// free, elastic sheets, or rigid locks depending on the configuration label.
//
// The root frame is the attachment at the central rear arch's proximal end;
// its ground projection is the coordinate origin, toes toward +x.

#include "softfoot/design_space.hpp"
#include "softfoot/geometry.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace softfoot {

inline constexpr int kFixedCoord = -1;

struct ModuleGeometry {
  int module_count = 5;
  int sole_body_count = 8;
  double sole_body_length = 28.0;
  double module_width = 26.0;
  std::array<double, 3> toe_lengths = {20.0, 18.0, 18.0};
  double hinge_height = 10.0;        // chain pivots above the sole bottom
  double heel_back_offset = 155.0;   // rear sole edge behind the ankle projection
  double shaft_height = 60.0;        // midtarsal-ankle shaft above ground
  double ankle_height = 80.0;        // root attachment above ground
  double heel_joint_dx = 30.0;       // heel joint forward of the rear edge
  double heel_joint_z = 35.0;
  double coil_lever_arm = 30.0;      // upper spring anchor from the heel joint
  double coil_lower_anchor_dx = 20.0;
  double soft_foot_mass_kg = 1.115;
  double rigid_foot_mass_kg = 1.13;

  // filled by finalize()
  double frontal_arch_length = 0.0;
  double rear_arch_length = 0.0;
  double heel_length = 0.0;

  double sole_rear_x() const { return -heel_back_offset; }
  double sole_front_x() const { return sole_rear_x() + sole_body_count * sole_body_length; }
  double toe_tip_x() const {
    return sole_front_x() + toe_lengths[0] + toe_lengths[1] + toe_lengths[2];
  }
  double hinge_x(int i) const { return sole_rear_x() + i * sole_body_length; }
  Vec2 shaft() const { return {0.0, shaft_height}; }
  Vec2 ankle() const { return {0.0, ankle_height}; }
  Vec2 heel_joint() const { return {sole_rear_x() + heel_joint_dx, heel_joint_z}; }
  Vec2 mtp_hinge() const { return {sole_front_x(), hinge_height}; }
  double module_y(int m) const { return (m - 0.5 * (module_count - 1)) * module_width; }

  void validate() const {
    if (module_count < 1 || sole_body_count < 2) {
      throw std::invalid_argument("geometry: module_count >= 1, sole_body_count >= 2");
    }
    const bool positive =
        sole_body_length > 0 && module_width > 0 && hinge_height > 0 &&
        heel_back_offset > 0 && shaft_height > hinge_height &&
        ankle_height >= shaft_height && heel_joint_z > hinge_height &&
        heel_joint_dx > 0 && coil_lever_arm > 0 && coil_lower_anchor_dx > 0 &&
        toe_lengths[0] > 0 && toe_lengths[1] > 0 && toe_lengths[2] > 0 &&
        soft_foot_mass_kg > 0 && rigid_foot_mass_kg > 0;
    if (!positive) throw std::invalid_argument("geometry: non-positive dimension");
  }

  void finalize() {
    validate();
    frontal_arch_length = (mtp_hinge() - shaft()).norm();
    rear_arch_length = (shaft() - heel_joint()).norm();
    heel_length = std::hypot(heel_joint_dx, heel_joint_z - hinge_height);
  }
};

struct MaterialParams {
  double coil_spring_k = 0.125;        // N/mm; stiff set uses 1.7
  double band_k = 1.5;                 // N/mm per band pair
  double band_lever_arm = 8.0;         // mm; moment arm of the band pair
  double band_rest_length = 10.0;      // mm, descriptive
  double tendon_stiffness = 100.0;     // N/mm engagement stiffness
  double tendon_pretension = 294.3;    // N per module, descriptive rating
  double tendon_engagement_slack = 0.0;
  double sheet_k_trans = 10.0;         // N/mm per adjacent pair
  double sheet_k_rot = 500.0;          // N*mm/rad per adjacent pair
  double friction_mu = 0.8;

  double band_rot_k() const { return band_k * band_lever_arm * band_lever_arm; }

  void validate() const {
    if (coil_spring_k <= 0 || band_k <= 0 || tendon_stiffness <= 0 ||
        sheet_k_trans <= 0 || sheet_k_rot <= 0 || band_lever_arm <= 0) {
      throw std::invalid_argument("materials: stiffness must be positive");
    }
    if (tendon_pretension < 0 || friction_mu < 0) {
      throw std::invalid_argument("materials: pretension and friction must be >= 0");
    }
  }
};

inline MaterialParams soft_spring_set() { return MaterialParams{}; }
inline MaterialParams stiff_spring_set() {
  MaterialParams m;
  m.coil_spring_k = 1.7;
  return m;
}

// Per-module plantar pretension anchored to the peak plantar tension of a
// loaded user: 1.5 body weights shared equally by the five modules.
inline double tendon_pretension_per_module(double user_mass_kg) {
  if (user_mass_kg <= 0) throw std::invalid_argument("tendon pretension: mass must be > 0");
  return 1.5 * user_mass_kg * kGravity / 5.0;
}

// Rated tendon tension including the sizing safety coefficient.
inline double tendon_rated_tension(double user_mass_kg, double safety) {
  if (safety < 1.0) throw std::invalid_argument("tendon rating: safety must be >= 1");
  return tendon_pretension_per_module(user_mass_kg) * safety;
}

enum class Site { FrontalArch, RearArch, Heel };

inline std::string_view site_name(Site s) {
  switch (s) {
    case Site::FrontalArch: return "frontal_arch";
    case Site::RearArch: return "rear_arch";
    case Site::Heel: return "heel";
  }
  return "?";
}

struct CouplingSpec {
  Site site = Site::FrontalArch;
  Connection type = Connection::Free;
  std::vector<std::pair<int, int>> pairs;  // adjacent module indices; empty for Free
};

enum class BodyKind { RearArch, FrontalArch, HeelAssembly, SoleBody, Toe, RigidFoot };

struct MassPoint {
  double mass_kg = 0.0;
  Vec2 pos = Vec2::Zero();  // rest planar position
  double y_off = 0.0;
};

struct ContactSample {
  Vec2 pos = Vec2::Zero();  // rest planar position, bottom face
  double y_rel = 0.0;       // offset from the module centerline
};

struct BodyDef {
  BodyKind kind = BodyKind::SoleBody;
  int parent = -1;              // index in the module body list; -1 = root
  Vec2 pivot = Vec2::Zero();    // rest pivot of this body's hinge
  int coord = kFixedCoord;      // global coordinate index; kFixedCoord = welded
  std::vector<MassPoint> mass_points;
  std::vector<ContactSample> contact_samples;
  // the first 2*pair_count entries of each list are y-mirror partners stored
  // adjacently; the energy model sums them pairwise for exact symmetry
  int mass_pair_count = 0;
  int contact_pair_count = 0;
  // chain of free hinges from the root down to this body: (coord, body index
  // whose pivot carries that coordinate)
  std::vector<std::pair<int, int>> ancestors;
};

struct ModuleDef {
  double y_offset = 0.0;
  std::vector<BodyDef> bodies;  // topological order
  int rear_arch = -1;
  int frontal_arch = -1;
  int heel_assembly = -1;
  int first_sole = -1;  // first separate sole body (the rearmost lives in the heel)
  int toe1 = -1;

  // rest-frame anchors
  Vec2 coil_anchor_upper, coil_anchor_lower;       // rear arch / heel assembly
  Vec2 sheet_anchor_front, sheet_anchor_rear, sheet_anchor_heel;
  std::vector<std::pair<int, Vec2>> tendon_route;  // (body index, rest point)
};

struct CoordLayout {
  int total = 6;  // root pose always occupies [0, 6)
  int shared_begin = 6, shared_end = 6;
  int shared_front = -1;
  int shared_heel = -1;
  std::vector<std::pair<int, int>> module_span;  // [begin, end) per module
};

struct MassProperties {
  double mass_kg = 0.0;
  Vec3 com = Vec3::Zero();
};

struct FootAssembly {
  std::string label;
  ModuleGeometry geometry;
  MaterialParams materials;
  std::array<CouplingSpec, 3> couplings;  // frontal arch, rear arch, heel
  bool rigid = false;

  std::vector<ModuleDef> modules;  // empty for the rigid foot
  BodyDef rigid_body;              // used when rigid
  CoordLayout layout;

  double total_mass_kg = 0.0;
  Vec3 com_rest = Vec3::Zero();
  double coil_rest_length = 0.0;
  double tendon_rest_length = 0.0;

  int dof_count() const { return layout.total; }
  int internal_dof_count() const { return layout.total - 6; }

  const CouplingSpec& coupling(Site s) const { return couplings[static_cast<size_t>(s)]; }

  // Relative mobility left among the five analog components at a site:
  // counts unlocked plus unsprung adjacent pairs, so free > elastic > rigid.
  int site_mobility_index(Site s) const {
    const int pairs = geometry.module_count - 1;
    switch (coupling(s).type) {
      case Connection::Free: return 2 * pairs;
      case Connection::Elastic: return pairs;
      case Connection::Rigid: return 0;
    }
    return 0;
  }

  // Ground projection of the unloaded sole, origin at the ankle projection.
  Rect unloaded_footprint() const {
    const double half_w = 0.5 * geometry.module_count * geometry.module_width;
    return Rect{geometry.sole_rear_x(), geometry.toe_tip_x(), -half_w, half_w};
  }

  MassProperties mass_properties() const { return {total_mass_kg, com_rest}; }
};

namespace detail {

// Relative print-volume shares of the module components; scaled to the
// published foot masses.
struct MassUnits {
  double sole_body = 1.0;
  double heel_riser = 1.2;
  double toe[3] = {0.7, 0.6, 0.55};
  double frontal_arch = 0.9;
  double rear_arch = 1.1;
  double rear_arch_central = 1.8;
};

inline double module_unit_sum(const ModuleGeometry& g, const MassUnits& u, bool central) {
  return g.sole_body_count * u.sole_body + u.heel_riser + u.toe[0] + u.toe[1] + u.toe[2] +
         u.frontal_arch + (central ? u.rear_arch_central : u.rear_arch);
}

inline Vec2 rear_arch_com(const ModuleGeometry& g, bool central) {
  const Vec2 hj = g.heel_joint();
  const Vec2 sh = g.shaft();
  if (!central) return 0.5 * (hj + sh);
  const Vec2 an = g.ankle();
  const double l1 = (sh - hj).norm();
  const double l2 = (an - sh).norm();
  return (l1 * 0.5 * (hj + sh) + l2 * 0.5 * (sh + an)) / (l1 + l2);
}

inline Vec2 heel_riser_com(const ModuleGeometry& g) {
  return {g.sole_rear_x() + 0.5 * g.heel_joint_dx, 0.6 * g.heel_joint_z};
}

// Nine bottom-face samples: edge pairs first (mirror partners adjacent),
// centerline singles after.
inline void body_bottom_samples(double x0, double x1, double half_w, BodyDef& body) {
  const double xs[3] = {x0, 0.5 * (x0 + x1), x1};
  for (double x : xs) {
    body.contact_samples.push_back({Vec2{x, 0.0}, -half_w});
    body.contact_samples.push_back({Vec2{x, 0.0}, half_w});
  }
  body.contact_pair_count = 3;
  for (double x : xs) body.contact_samples.push_back({Vec2{x, 0.0}, 0.0});
}

// Builds the body list of one module and wires global coordinate indices.
inline ModuleDef build_module(const ModuleGeometry& g, int m, bool central,
                              int rear_coord, int front_coord, int heel_coord,
                              const std::vector<int>& sole_coords, int mtp_coord,
                              int ip1_coord, int ip2_coord, double mass_scale) {
  const MassUnits units;
  ModuleDef mod;
  mod.y_offset = g.module_y(m);
  const double yw = 0.5 * g.module_width;
  const double h = g.hinge_height;
  const double y_abs = mod.y_offset;

  auto add_body = [&](BodyDef b) {
    const int idx = static_cast<int>(mod.bodies.size());
    if (b.parent >= 0) b.ancestors = mod.bodies[b.parent].ancestors;
    if (b.coord != kFixedCoord) b.ancestors.emplace_back(b.coord, idx);
    mod.bodies.push_back(std::move(b));
    return idx;
  };

  // rear arch: pivots about the shaft unless welded to the root
  {
    BodyDef b;
    b.kind = BodyKind::RearArch;
    b.parent = -1;
    b.pivot = g.shaft();
    b.coord = rear_coord;
    b.mass_points.push_back({mass_scale * (central ? units.rear_arch_central : units.rear_arch),
                             rear_arch_com(g, central), y_abs});
    mod.rear_arch = add_body(std::move(b));
  }

  // heel assembly: heel riser plus the rearmost sole body, hinged at the heel joint
  {
    BodyDef b;
    b.kind = BodyKind::HeelAssembly;
    b.parent = mod.rear_arch;
    b.pivot = g.heel_joint();
    b.coord = heel_coord;
    b.mass_points.push_back({mass_scale * units.heel_riser, heel_riser_com(g), y_abs});
    const double x0 = g.hinge_x(0), x1 = g.hinge_x(1);
    b.mass_points.push_back({mass_scale * units.sole_body, Vec2{0.5 * (x0 + x1), 0.5 * h}, y_abs});
    body_bottom_samples(x0, x1, yw, b);
    mod.heel_assembly = add_body(std::move(b));
  }

  // remaining sole bodies
  mod.first_sole = static_cast<int>(mod.bodies.size());
  int parent = mod.heel_assembly;
  for (int i = 1; i < g.sole_body_count; ++i) {
    BodyDef b;
    b.kind = BodyKind::SoleBody;
    b.parent = parent;
    b.pivot = Vec2{g.hinge_x(i), h};
    b.coord = sole_coords[static_cast<size_t>(i - 1)];
    const double x0 = g.hinge_x(i), x1 = g.hinge_x(i + 1);
    b.mass_points.push_back({mass_scale * units.sole_body, Vec2{0.5 * (x0 + x1), 0.5 * h}, y_abs});
    body_bottom_samples(x0, x1, yw, b);
    parent = add_body(std::move(b));
  }

  // toes continue the chain through the MTP and IP hinges
  mod.toe1 = static_cast<int>(mod.bodies.size());
  double tx0 = g.sole_front_x();
  const int toe_coords[3] = {mtp_coord, ip1_coord, ip2_coord};
  for (int t = 0; t < 3; ++t) {
    BodyDef b;
    b.kind = BodyKind::Toe;
    b.parent = parent;
    b.pivot = Vec2{tx0, h};
    b.coord = toe_coords[t];
    const double tx1 = tx0 + g.toe_lengths[static_cast<size_t>(t)];
    b.mass_points.push_back({mass_scale * units.toe[t], Vec2{0.5 * (tx0 + tx1), 0.5 * h}, y_abs});
    body_bottom_samples(tx0, tx1, yw, b);
    parent = add_body(std::move(b));
    tx0 = tx1;
  }

  // frontal arch pivots on the shaft; the solver pins its distal end to the
  // MTP point with a stiff penalty
  {
    BodyDef b;
    b.kind = BodyKind::FrontalArch;
    b.parent = -1;
    b.pivot = g.shaft();
    b.coord = front_coord;
    b.mass_points.push_back(
        {mass_scale * units.frontal_arch, 0.5 * (g.shaft() + g.mtp_hinge()), y_abs});
    mod.frontal_arch = add_body(std::move(b));
  }

  // anchors
  const Vec2 hj = g.heel_joint();
  const Vec2 dir = (g.shaft() - hj).normalized();
  mod.coil_anchor_upper = hj + g.coil_lever_arm * dir;
  mod.coil_anchor_lower = Vec2{g.sole_rear_x() + g.coil_lower_anchor_dx, h};
  mod.sheet_anchor_front = 0.5 * (g.shaft() + g.mtp_hinge());
  mod.sheet_anchor_rear = 0.5 * (hj + g.shaft());
  mod.sheet_anchor_heel = heel_riser_com(g);

  // tendon routing: bottom centers from the rearmost sole body to the toe tip
  for (int i = 0; i < g.sole_body_count; ++i) {
    const int body = i == 0 ? mod.heel_assembly : mod.first_sole + i - 1;
    mod.tendon_route.emplace_back(body, Vec2{g.hinge_x(i) + 0.5 * g.sole_body_length, 0.0});
  }
  tx0 = g.sole_front_x();
  for (int t = 0; t < 3; ++t) {
    const double tx1 = tx0 + g.toe_lengths[static_cast<size_t>(t)];
    mod.tendon_route.emplace_back(mod.toe1 + t, Vec2{0.5 * (tx0 + tx1), 0.0});
    tx0 = tx1;
  }
  mod.tendon_route.emplace_back(mod.toe1 + 2, Vec2{g.toe_tip_x(), 0.0});

  return mod;
}

inline double polyline_length(const std::vector<std::pair<int, Vec2>>& route) {
  double len = 0.0;
  for (size_t i = 1; i < route.size(); ++i) len += (route[i].second - route[i - 1].second).norm();
  return len;
}

}  // namespace detail

inline bool is_soft_label(const std::string& label) {
  return label == "KKF" || label == "KKK" || label == "KRF" || label == "KRK" ||
         label == "KRR" || label == "RRR";
}

// Builds the assembly for one of the seven tested feet: the five transverse
// configurations, the longitudinal-only RRR baseline, or the rigid reference.
inline FootAssembly build_foot(const std::string& label,
                               ModuleGeometry geometry = ModuleGeometry{},
                               MaterialParams materials = MaterialParams{}) {
  if (!is_soft_label(label) && label != "RIGID") {
    throw std::invalid_argument("build_foot: unknown label " + label);
  }
  geometry.finalize();
  materials.validate();

  FootAssembly foot;
  foot.label = label;
  foot.geometry = geometry;
  foot.materials = materials;

  const int n_pairs = geometry.module_count - 1;
  auto make_pairs = [&](Connection t) {
    std::vector<std::pair<int, int>> pairs;
    if (t != Connection::Free) {
      for (int i = 0; i < n_pairs; ++i) pairs.emplace_back(i, i + 1);
    }
    return pairs;
  };

  if (label == "RIGID") {
    foot.rigid = true;
    for (int s = 0; s < 3; ++s) {
      foot.couplings[s] = {static_cast<Site>(s), Connection::Rigid,
                           make_pairs(Connection::Rigid)};
    }
    foot.layout.total = 6;

    BodyDef body;
    body.kind = BodyKind::RigidFoot;
    body.parent = -1;
    body.coord = kFixedCoord;

    // per-module unit masses, then welded into one part; mirror-pair order
    const detail::MassUnits units;
    std::vector<MassPoint> per_module;  // one module's points at y = 0
    for (int i = 0; i < geometry.sole_body_count; ++i) {
      per_module.push_back({units.sole_body,
                            Vec2{geometry.hinge_x(i) + 0.5 * geometry.sole_body_length,
                                 0.5 * geometry.hinge_height},
                            0.0});
    }
    per_module.push_back({units.heel_riser, detail::heel_riser_com(geometry), 0.0});
    double tx0 = geometry.sole_front_x();
    for (int tt = 0; tt < 3; ++tt) {
      const double tx1 = tx0 + geometry.toe_lengths[static_cast<size_t>(tt)];
      per_module.push_back(
          {units.toe[tt], Vec2{0.5 * (tx0 + tx1), 0.5 * geometry.hinge_height}, 0.0});
      tx0 = tx1;
    }
    const int c = geometry.module_count / 2;
    const Vec2 front_com = 0.5 * (geometry.shaft() + geometry.mtp_hinge());
    auto at_module = [&](const MassPoint& mp, int m) {
      return MassPoint{mp.mass_kg, mp.pos, geometry.module_y(m)};
    };
    for (int i = 0; i < geometry.module_count / 2; ++i) {
      for (const auto& mp : per_module) {
        body.mass_points.push_back(at_module(mp, i));
        body.mass_points.push_back(at_module(mp, geometry.module_count - 1 - i));
        ++body.mass_pair_count;
      }
    }
    if (c - 1 >= 0 && c + 1 < geometry.module_count) {
      body.mass_points.push_back({units.frontal_arch, front_com, geometry.module_y(c - 1)});
      body.mass_points.push_back({units.frontal_arch, front_com, geometry.module_y(c + 1)});
      ++body.mass_pair_count;
    }
    if (geometry.module_count % 2) {
      for (const auto& mp : per_module) body.mass_points.push_back(at_module(mp, c));
      body.mass_points.push_back({units.frontal_arch, front_com, geometry.module_y(c)});
    }
    body.mass_points.push_back(
        {units.rear_arch_central, detail::rear_arch_com(geometry, true), 0.0});

    double unit_sum = 0.0;
    for (const auto& mp : body.mass_points) unit_sum += mp.mass_kg;
    const double scale = geometry.rigid_foot_mass_kg / unit_sum;
    for (auto& mp : body.mass_points) mp.mass_kg *= scale;

    // dense bottom grid, corners included, so the support polygon is exact;
    // y-mirror partners stored adjacently
    const Rect fp = foot.unloaded_footprint();
    const int nx = std::max(2, static_cast<int>(std::lround(fp.length() / 10.0)) + 1);
    const int ny = std::max(2, static_cast<int>(std::lround(fp.height() / 10.0)) + 1);
    std::vector<ContactSample> singles;
    for (int ix = 0; ix < nx; ++ix) {
      const double x = fp.x_min + (fp.x_max - fp.x_min) * ix / (nx - 1);
      for (int iy = 0; iy < ny / 2; ++iy) {
        const double y = fp.y_min + (fp.y_max - fp.y_min) * iy / (ny - 1);
        const double ym = fp.y_min + (fp.y_max - fp.y_min) * (ny - 1 - iy) / (ny - 1);
        body.contact_samples.push_back({Vec2{x, 0.0}, y});
        body.contact_samples.push_back({Vec2{x, 0.0}, ym});
        ++body.contact_pair_count;
      }
      if (ny % 2) singles.push_back({Vec2{x, 0.0}, 0.5 * (fp.y_min + fp.y_max)});
    }
    body.contact_samples.insert(body.contact_samples.end(), singles.begin(), singles.end());
    foot.rigid_body = std::move(body);
  } else {
    const Connection front_t = *connection_from_letter(label[0]);
    const Connection rear_t = *connection_from_letter(label[1]);
    const Connection heel_t = *connection_from_letter(label[2]);
    if (heel_t == Connection::Rigid && rear_t != Connection::Rigid) {
      throw std::invalid_argument("build_foot: rigid heels require rigid rear arches");
    }
    foot.couplings[0] = {Site::FrontalArch, front_t, make_pairs(front_t)};
    foot.couplings[1] = {Site::RearArch, rear_t, make_pairs(rear_t)};
    foot.couplings[2] = {Site::Heel, heel_t, make_pairs(heel_t)};

    CoordLayout& lay = foot.layout;
    int next = 6;
    lay.shared_begin = next;
    if (front_t == Connection::Rigid) lay.shared_front = next++;
    if (heel_t == Connection::Rigid) lay.shared_heel = next++;
    lay.shared_end = next;

    const int center = geometry.module_count / 2;
    const detail::MassUnits units;
    double unit_sum = 0.0;
    for (int m = 0; m < geometry.module_count; ++m) {
      unit_sum += detail::module_unit_sum(geometry, units, m == center);
    }
    const double mass_scale = geometry.soft_foot_mass_kg / unit_sum;

    for (int m = 0; m < geometry.module_count; ++m) {
      const bool central = m == center;
      const int begin = next;
      const int rear_coord =
          (central || rear_t == Connection::Rigid) ? kFixedCoord : next++;
      const int front_coord = front_t == Connection::Rigid ? lay.shared_front : next++;
      const int heel_coord = heel_t == Connection::Rigid ? lay.shared_heel : next++;
      std::vector<int> sole_coords;
      for (int i = 1; i < geometry.sole_body_count; ++i) sole_coords.push_back(next++);
      const int mtp = next++, ip1 = next++, ip2 = next++;
      foot.modules.push_back(detail::build_module(geometry, m, central, rear_coord,
                                                  front_coord, heel_coord, sole_coords,
                                                  mtp, ip1, ip2, mass_scale));
      lay.module_span.emplace_back(begin, next);
    }
    lay.total = next;

    foot.coil_rest_length =
        (foot.modules[0].coil_anchor_upper - foot.modules[0].coil_anchor_lower).norm();
    foot.tendon_rest_length = detail::polyline_length(foot.modules[0].tendon_route);
  }

  // rest-pose mass properties
  double mass = 0.0;
  Vec3 moment = Vec3::Zero();
  auto tally = [&](const BodyDef& b) {
    for (const auto& mp : b.mass_points) {
      mass += mp.mass_kg;
      moment += mp.mass_kg * Vec3(mp.pos.x(), mp.y_off, mp.pos.y());
    }
  };
  if (foot.rigid) {
    tally(foot.rigid_body);
  } else {
    for (const auto& mod : foot.modules) {
      for (const auto& b : mod.bodies) tally(b);
    }
  }
  foot.total_mass_kg = mass;
  foot.com_rest = moment / mass;
  return foot;
}

inline FootAssembly build_foot_with_springs(const std::string& label, bool stiff,
                                            ModuleGeometry geometry = ModuleGeometry{}) {
  return build_foot(label, geometry, stiff ? stiff_spring_set() : soft_spring_set());
}

}  // namespace softfoot
