#pragma once

// Potential-energy model of a foot on a terrain under a vertical load.
//
// Terms: gravity, coil springs, band rotational springs along the sole and
// toe hinges, unilateral tendons, transverse coupling sheets, loop-closure
// pins (frontal arch to the MTP point), contact penalties against the
// rim-smoothed height field, and the external load potential (a constant
// downward force at a material point of the root body).
//
// Floating-point layout note: every multi-term accumulation is grouped so
// that a y-mirrored configuration evaluates to bitwise-identical energy and
// a mirrored gradient. Mirror partners (paired contact samples, paired mass
// points, module pairs m and n-1-m, coupling pairs) are always summed as
// (a + b) before joining the running total, which makes the reduction
// invariant under the mirror permutation by commutativity.

#include "softfoot/foot_assembly.hpp"
#include "softfoot/geometry.hpp"
#include "softfoot/terrain.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace softfoot {

struct SolverSettings {
  double contact_stiffness = 300.0;   // N/mm per sample
  double contact_smoothing_mm = 0.05; // C2 force ramp-in depth
  double stick_stiffness = 60.0;      // N/mm tangential anchoring per sample
  double loop_stiffness = 1000.0;     // N/mm; keeps pin gaps under 0.1 mm
  double rim_smoothing_mm = 2.0;      // obstacle edge rounding for contact
  double grad_tol = 1e-3;             // N, scaled gradient norm
  double penetration_tol = 0.1;       // mm
  int max_iterations = 5000;
  double safety_box_mm = 500.0;       // root excursion before Diverged
  double rotation_scale_mm = 100.0;   // converts rad-gradients to N
  int lbfgs_memory = 20;
  int ramp_steps = 20;
  double load_mass_kg = 2.0;
  double displacement_threshold_mm = 100.0;
  double rotation_threshold_deg = 45.0;
  double app_height_mm = -1.0;        // <0: ankle height at the settled pose
};

enum TermMask : unsigned {
  kGravityTerm = 1u << 0,
  kCoilTerm = 1u << 1,
  kBandTerm = 1u << 2,
  kTendonTerm = 1u << 3,
  kSheetTerm = 1u << 4,
  kContactTerm = 1u << 5,
  kLoopTerm = 1u << 6,
  kLoadTerm = 1u << 7,
  kAllTerms = 0xffu,
  kElasticTerms = kCoilTerm | kBandTerm | kTendonTerm | kSheetTerm | kLoopTerm,
};

// C2-smoothed one-sided penalty: the restoring force ramps in quadratically
// over [0, eps] and then grows linearly with stiffness k. The smooth
// curvature keeps quasi-Newton steps well-behaved when samples flicker
// across the activation boundary.
inline double smooth_penalty(double pen, double k, double eps, double& force) {
  if (pen <= 0.0) {
    force = 0.0;
    return 0.0;
  }
  if (pen < eps) {
    force = k * pen * pen / (2.0 * eps);
    return k * pen * pen * pen / (6.0 * eps);
  }
  const double shifted = pen - 0.5 * eps;
  force = k * shifted;
  return 0.5 * k * shifted * shifted + k * eps * eps / 24.0;
}

struct EnergyBreakdown {
  double gravity = 0, coil = 0, bands = 0, tendon = 0, sheets = 0, contact = 0,
         loop = 0, load = 0;
  double total() const {
    return gravity + coil + bands + tendon + sheets + contact + loop + load;
  }
};

struct ContactRecord {
  Vec3 point = Vec3::Zero();
  Vec3 force = Vec3::Zero();   // force on the foot
  Vec3 normal = Vec3::UnitZ(); // local surface normal
  double normal_n = 0.0;       // force along the surface normal
  double gap_mm = 0.0;         // signed clearance, negative when penetrating
};

// One foot + one terrain + one load case. Instances are cheap to build and
// not thread-safe (they own scratch buffers); use one per solve thread.
class EnergyModel {
 public:
  EnergyModel(const FootAssembly& foot, const Terrain* terrain, SolverSettings settings)
      : foot_(&foot), terrain_(terrain), settings_(settings) {
    const size_t n_modules = foot.modules.size();
    fk_.resize(n_modules);
    for (size_t m = 0; m < n_modules; ++m) {
      const size_t nb = foot.modules[m].bodies.size();
      fk_[m].X.resize(nb);
      fk_[m].angle.resize(nb);
      fk_[m].pivot.resize(nb);
      for (const auto& b : foot.modules[m].bodies) {
        if (b.ancestors.size() > kMaxChainDepth) {
          throw std::invalid_argument("EnergyModel: kinematic chain too deep");
        }
      }
    }
    weights_ = VecX::Ones(foot.layout.total);
    for (int i = 3; i < foot.layout.total; ++i) {
      weights_[i] = 1.0 / settings_.rotation_scale_mm;
    }
    weights_[0] = weights_[1] = weights_[2] = 1.0;
  }

  const FootAssembly& foot() const { return *foot_; }
  const Terrain* terrain() const { return terrain_; }
  const SolverSettings& settings() const { return settings_; }
  int coord_count() const { return foot_->layout.total; }

  void set_load(double force_n, const Vec3& app_local) {
    load_force_ = force_n;
    load_local_ = app_local;
  }
  void clear_load() { load_force_ = 0.0; }
  double load_force() const { return load_force_; }

  // Incremental stick friction: contacts are tangentially anchored to their
  // positions at the previous converged state; the friction-cone check then
  // validates the stick assumption after the fact. Anchors are indexed by
  // the fixed contact enumeration order.
  void set_stick_anchors(const std::vector<ContactRecord>& records) {
    stick_anchor_.resize(records.size());
    stick_active_.assign(records.size(), 0);
    for (size_t i = 0; i < records.size(); ++i) {
      stick_anchor_[i] = Vec2(records[i].point.x(), records[i].point.y());
      stick_active_[i] = records[i].gap_mm < 0.0 ? 1 : 0;
    }
    stick_enabled_ = true;
  }
  void clear_stick() { stick_enabled_ = false; }

  double energy(const VecX& q, unsigned mask = kAllTerms) const {
    return eval(q, mask, nullptr, nullptr, nullptr, nullptr);
  }

  double energy_and_gradient(const VecX& q, VecX& grad, unsigned mask = kAllTerms) const {
    grad.setZero(foot_->layout.total);
    return eval(q, mask, &grad, nullptr, nullptr, nullptr);
  }

  EnergyBreakdown breakdown(const VecX& q) const {
    EnergyBreakdown bd;
    eval(q, kAllTerms, nullptr, nullptr, &bd, nullptr);
    return bd;
  }

  double contacts(const VecX& q, std::vector<ContactRecord>& out) const {
    out.clear();
    double max_pen = 0.0;
    eval(q, kAllTerms, nullptr, &out, nullptr, &max_pen);
    return max_pen;
  }

  double max_penetration(const VecX& q) const {
    double max_pen = 0.0;
    eval(q, kContactTerm, nullptr, nullptr, nullptr, &max_pen);
    return max_pen;
  }

  // Current routed tendon length of one module.
  double tendon_length(const VecX& q, int m) const {
    check_dim(q);
    if (foot_->rigid) throw std::logic_error("tendon_length: rigid foot has no tendon");
    run_fk(q, static_cast<size_t>(m));
    const auto& route = foot_->modules[static_cast<size_t>(m)].tendon_route;
    double len = 0.0;
    Vec2 prev = fk_[static_cast<size_t>(m)].X[static_cast<size_t>(route[0].first)] * route[0].second;
    for (size_t j = 1; j < route.size(); ++j) {
      Vec2 cur = fk_[static_cast<size_t>(m)].X[static_cast<size_t>(route[j].first)] * route[j].second;
      len += (cur - prev).norm();
      prev = cur;
    }
    return len;
  }

  double tendon_engagement_length() const {
    return foot_->tendon_rest_length + foot_->materials.tendon_engagement_slack;
  }

  double tendon_force(const VecX& q, int m) const {
    const double e = tendon_length(q, m) - tendon_engagement_length();
    double f = 0.0;
    smooth_penalty(e, foot_->materials.tendon_stiffness, settings_.contact_smoothing_mm, f);
    return f;
  }

  Vec3 root_translation(const VecX& q) const { return q.segment<3>(0); }
  Mat3 root_rotation(const VecX& q) const { return euler_to_matrix(q[3], q[4], q[5]); }

  Vec3 world_root_point(const VecX& q, const Vec3& local) const {
    return root_rotation(q) * local + root_translation(q);
  }

  Vec3 ankle_world(const VecX& q) const {
    const Vec2 a = foot_->geometry.ankle();
    return world_root_point(q, Vec3(a.x(), 0.0, a.y()));
  }

  Vec3 com_world(const VecX& q) const {
    check_dim(q);
    const Mat3 R = root_rotation(q);
    const Vec3 t = root_translation(q);
    double mass = 0.0;
    Vec3 moment = Vec3::Zero();
    auto tally_body = [&](const BodyDef& b, const Affine2* X) {
      for (const auto& mp : b.mass_points) {
        const Vec2 p2 = X ? (*X) * mp.pos : mp.pos;
        moment += mp.mass_kg * (R * Vec3(p2.x(), mp.y_off, p2.y()) + t);
        mass += mp.mass_kg;
      }
    };
    if (foot_->rigid) {
      tally_body(foot_->rigid_body, nullptr);
    } else {
      for (size_t m = 0; m < foot_->modules.size(); ++m) {
        run_fk(q, m);
        for (size_t b = 0; b < foot_->modules[m].bodies.size(); ++b) {
          tally_body(foot_->modules[m].bodies[b], &fk_[m].X[b]);
        }
      }
    }
    return moment / mass;
  }

  // Convergence-norm weights: 1 on root translations, 1/rotation_scale on
  // every angular coordinate. Their inverse doubles as the solver's diagonal
  // preconditioner.
  const VecX& norm_weights() const { return weights_; }

  // Mirror-stable dot product: root and shared blocks sequentially, module
  // blocks combined as symmetric pairs.
  double sym_dot(const VecX& a, const VecX& b) const {
    const CoordLayout& lay = foot_->layout;
    double acc = 0.0;
    for (int i = 0; i < lay.shared_end; ++i) acc += a[i] * b[i];
    const int nm = static_cast<int>(lay.module_span.size());
    auto span_dot = [&](int m) {
      double s = 0.0;
      for (int i = lay.module_span[static_cast<size_t>(m)].first;
           i < lay.module_span[static_cast<size_t>(m)].second; ++i) {
        s += a[i] * b[i];
      }
      return s;
    };
    for (int i = 0; i < nm / 2; ++i) acc += (span_dot(i) + span_dot(nm - 1 - i));
    if (nm % 2) acc += span_dot(nm / 2);
    return acc;
  }

  // Gradient norm with rotational components scaled to force units.
  double scaled_grad_norm(const VecX& g) const {
    scratch_wg_ = g.cwiseProduct(weights_);
    return std::sqrt(sym_dot(scratch_wg_, scratch_wg_));
  }

 private:
  static constexpr size_t kMaxChainDepth = 24;

  struct FkState {
    std::vector<Affine2> X;
    std::vector<double> angle;
    std::vector<Vec2> pivot;  // current pivot positions
  };

  // Per-sample gradient contribution, buffered so mirror pairs can be added
  // pairwise before joining the accumulators.
  struct PointContribution {
    double energy = 0.0;
    double root[6] = {0, 0, 0, 0, 0, 0};
    double chain[kMaxChainDepth] = {0};
    int chain_count = 0;
  };

  void check_dim(const VecX& q) const {
    if (q.size() != foot_->layout.total) {
      throw std::invalid_argument("EnergyModel: configuration dimension mismatch");
    }
  }

  void run_fk(const VecX& q, size_t m) const {
    const ModuleDef& mod = foot_->modules[m];
    FkState& st = fk_[m];
    for (size_t b = 0; b < mod.bodies.size(); ++b) {
      const BodyDef& body = mod.bodies[b];
      const double th = body.coord == kFixedCoord ? 0.0 : q[body.coord];
      const Affine2 local = Affine2::about(body.pivot, th);
      if (body.parent < 0) {
        st.X[b] = local;
        st.angle[b] = th;
      } else {
        st.X[b] = st.X[static_cast<size_t>(body.parent)] * local;
        st.angle[b] = st.angle[static_cast<size_t>(body.parent)] + th;
      }
      st.pivot[b] = st.X[b] * body.pivot;
    }
  }

  // The single evaluation core. Returns total energy; optionally fills the
  // gradient, the contact list, the per-term breakdown, and max penetration.
  double eval(const VecX& q, unsigned mask, VecX* grad,
              std::vector<ContactRecord>* contacts_out, EnergyBreakdown* bd,
              double* max_pen_out) const;

  const FootAssembly* foot_;
  const Terrain* terrain_;
  SolverSettings settings_;
  double load_force_ = 0.0;
  Vec3 load_local_ = Vec3::Zero();
  VecX weights_;
  bool stick_enabled_ = false;
  std::vector<Vec2> stick_anchor_;
  std::vector<char> stick_active_;

  mutable std::vector<FkState> fk_;
  mutable VecX scratch_wg_;
  mutable VecX sheet_left_, sheet_right_;
  mutable std::vector<Vec2> tendon_pts_, tendon_grads_;
  mutable std::vector<double> ws_module_energy_, ws_shared_front_, ws_shared_heel_;
  mutable std::vector<Eigen::Matrix<double, 6, 1>> ws_root_partial_;
};

inline double EnergyModel::eval(const VecX& q, unsigned mask, VecX* grad,
                                std::vector<ContactRecord>* contacts_out,
                                EnergyBreakdown* bd, double* max_pen_out) const {
  check_dim(q);
  const CoordLayout& lay = foot_->layout;
  const Vec3 t = q.segment<3>(0);
  const Mat3 R = euler_to_matrix(q[3], q[4], q[5]);
  Mat3 dR[3];
  if (grad) euler_derivatives(q[3], q[4], q[5], dR);

  const MaterialParams& mat = foot_->materials;
  const double k_contact = settings_.contact_stiffness;
  const double rim = std::max(settings_.rim_smoothing_mm, 1e-3);
  double max_pen = 0.0;

  // world-space contribution of one point force dE/dp on a body
  auto point_contribution = [&](const ModuleDef* mod, const FkState* st, int body,
                                const Vec2& p2, double y_abs, const Vec3& dE,
                                PointContribution& out) {
    for (int i = 0; i < 3; ++i) out.root[i] += dE[i];
    if (grad) {
      const Vec3 local(p2.x(), y_abs, p2.y());
      for (int i = 0; i < 3; ++i) out.root[3 + i] += dE.dot(dR[i] * local);
      if (mod) {
        const auto& anc = mod->bodies[static_cast<size_t>(body)].ancestors;
        out.chain_count = static_cast<int>(anc.size());
        for (size_t a = 0; a < anc.size(); ++a) {
          const Vec2 t2 = perp(p2 - st->pivot[static_cast<size_t>(anc[a].second)]);
          out.chain[a] += dE.dot(R * Vec3(t2.x(), 0.0, t2.y()));
        }
      }
    }
  };

  // contact energy of one sample (normal penalty plus tangential stick);
  // fills the contribution buffer
  size_t sample_counter = 0;
  auto contact_sample = [&](const ModuleDef* mod, const FkState* st, int body,
                            const ContactSample& cs, double y_base,
                            PointContribution& out) {
    out = PointContribution{};
    const size_t idx = sample_counter++;
    const Vec2 p2 = st ? st->X[static_cast<size_t>(body)] * cs.pos : cs.pos;
    const double y_abs = y_base + cs.y_rel;
    const Vec3 p = R * Vec3(p2.x(), y_abs, p2.y()) + t;
    HeightSample hs;
    if (terrain_) hs = height_smooth(*terrain_, p.x(), p.y(), rim);
    const double pen = hs.h - p.z();
    if (pen > max_pen) max_pen = pen;
    const Vec3 normal = Vec3(-hs.hx, -hs.hy, 1.0).normalized();
    if (pen <= 0.0) {
      if (contacts_out) {
        contacts_out->push_back({p, Vec3::Zero(), normal, 0.0, -pen});
      }
      return;
    }
    double f = 0.0;
    out.energy = smooth_penalty(pen, k_contact, settings_.contact_smoothing_mm, f);
    Vec3 dE = f * Vec3(hs.hx, hs.hy, -1.0);
    if (stick_enabled_ && idx < stick_active_.size() && stick_active_[idx]) {
      const double r = settings_.contact_smoothing_mm;
      const double tt = std::min(pen / r, 1.0);
      const double s = smoothstep5(tt);
      const double sp = smoothstep5_deriv(tt) / r;
      const Vec2 d_t(p.x() - stick_anchor_[idx].x(), p.y() - stick_anchor_[idx].y());
      const double k_st = settings_.stick_stiffness;
      out.energy += 0.5 * k_st * s * d_t.squaredNorm();
      dE += k_st * s * Vec3(d_t.x(), d_t.y(), 0.0) +
            (0.5 * k_st * sp * d_t.squaredNorm()) * Vec3(hs.hx, hs.hy, -1.0);
    }
    point_contribution(mod, st, body, p2, y_abs, dE, out);
    if (contacts_out) {
      contacts_out->push_back({p, -dE, normal, (-dE).dot(normal), -pen});
    }
  };

  // gravity energy of one mass point
  auto gravity_point = [&](const ModuleDef* mod, const FkState* st, int body,
                           const MassPoint& mp, PointContribution& out) {
    out = PointContribution{};
    const Vec2 p2 = st ? st->X[static_cast<size_t>(body)] * mp.pos : mp.pos;
    const double w = mp.mass_kg * kGravity;
    out.energy = w * (R.row(2).dot(Vec3(p2.x(), mp.y_off, p2.y())) + t.z());
    point_contribution(mod, st, body, p2, mp.y_off, Vec3(0.0, 0.0, w), out);
  };

  const size_t n_modules = foot_->modules.size();
  auto& module_energy = ws_module_energy_;
  module_energy.assign(n_modules, 0.0);
  std::vector<EnergyBreakdown> module_bd(bd ? n_modules : 0);
  auto& root_partial = ws_root_partial_;
  root_partial.assign(n_modules, Eigen::Matrix<double, 6, 1>::Zero());
  auto& shared_front_partial = ws_shared_front_;
  shared_front_partial.assign(n_modules, 0.0);
  auto& shared_heel_partial = ws_shared_heel_;
  shared_heel_partial.assign(n_modules, 0.0);
  Eigen::Matrix<double, 6, 1> root_rigid = Eigen::Matrix<double, 6, 1>::Zero();
  double rigid_energy = 0.0;
  EnergyBreakdown rigid_bd;

  // routes a chain-coordinate contribution to the right accumulator
  auto add_chain = [&](size_t m, int coord, double v) {
    if (coord == lay.shared_front) {
      shared_front_partial[m] += v;
    } else if (coord == lay.shared_heel) {
      shared_heel_partial[m] += v;
    } else {
      (*grad)[coord] += v;
    }
  };

  auto flush_contribution = [&](size_t m, const ModuleDef* mod, int body,
                                const PointContribution& c,
                                Eigen::Matrix<double, 6, 1>& root_acc) {
    for (int i = 0; i < 6; ++i) root_acc[i] += c.root[i];
    if (grad && mod) {
      const auto& anc = mod->bodies[static_cast<size_t>(body)].ancestors;
      for (int a = 0; a < c.chain_count; ++a) {
        add_chain(m, anc[static_cast<size_t>(a)].first, c.chain[a]);
      }
    }
  };

  // paired flush: mirror partners join the accumulators as (a + b)
  auto flush_pair = [&](size_t m, const ModuleDef* mod, int body,
                        const PointContribution& ca, const PointContribution& cb,
                        Eigen::Matrix<double, 6, 1>& root_acc, double& e_acc) {
    e_acc += (ca.energy + cb.energy);
    for (int i = 0; i < 6; ++i) root_acc[i] += (ca.root[i] + cb.root[i]);
    if (grad && mod) {
      const auto& anc = mod->bodies[static_cast<size_t>(body)].ancestors;
      const int n = std::max(ca.chain_count, cb.chain_count);
      for (int a = 0; a < n; ++a) {
        add_chain(m, anc[static_cast<size_t>(a)].first, ca.chain[a] + cb.chain[a]);
      }
    }
  };

  // planar force dE/dp2 on a body point; internal terms never touch the root
  auto accumulate_planar = [&](size_t m, const ModuleDef& mod, const FkState& st,
                               int body, const Vec2& p2, const Vec2& dE2, auto&& add) {
    for (const auto& [coord, pivot_body] : mod.bodies[static_cast<size_t>(body)].ancestors) {
      const Vec2 t2 = perp(p2 - st.pivot[static_cast<size_t>(pivot_body)]);
      add(m, coord, dE2.dot(t2));
    }
  };

  PointContribution ca, cb;

  if (foot_->rigid) {
    const BodyDef& body = foot_->rigid_body;
    if (mask & kGravityTerm) {
      const int np = body.mass_pair_count;
      for (int k = 0; k < np; ++k) {
        gravity_point(nullptr, nullptr, 0, body.mass_points[static_cast<size_t>(2 * k)], ca);
        gravity_point(nullptr, nullptr, 0, body.mass_points[static_cast<size_t>(2 * k + 1)], cb);
        flush_pair(0, nullptr, 0, ca, cb, root_rigid, rigid_energy);
        if (bd) rigid_bd.gravity += (ca.energy + cb.energy);
      }
      for (size_t i = static_cast<size_t>(2 * np); i < body.mass_points.size(); ++i) {
        gravity_point(nullptr, nullptr, 0, body.mass_points[i], ca);
        rigid_energy += ca.energy;
        if (bd) rigid_bd.gravity += ca.energy;
        flush_contribution(0, nullptr, 0, ca, root_rigid);
      }
    }
    if ((mask & kContactTerm) && terrain_) {
      const int np = body.contact_pair_count;
      for (int k = 0; k < np; ++k) {
        contact_sample(nullptr, nullptr, 0, body.contact_samples[static_cast<size_t>(2 * k)], 0.0, ca);
        contact_sample(nullptr, nullptr, 0, body.contact_samples[static_cast<size_t>(2 * k + 1)], 0.0, cb);
        flush_pair(0, nullptr, 0, ca, cb, root_rigid, rigid_energy);
        if (bd) rigid_bd.contact += (ca.energy + cb.energy);
      }
      for (size_t i = static_cast<size_t>(2 * np); i < body.contact_samples.size(); ++i) {
        contact_sample(nullptr, nullptr, 0, body.contact_samples[i], 0.0, ca);
        rigid_energy += ca.energy;
        if (bd) rigid_bd.contact += ca.energy;
        flush_contribution(0, nullptr, 0, ca, root_rigid);
      }
    }
  }

  for (size_t m = 0; m < n_modules; ++m) {
    const ModuleDef& mod = foot_->modules[m];
    run_fk(q, m);
    const FkState& st = fk_[m];
    double e_mod = 0.0;
    EnergyBreakdown* mbd = bd ? &module_bd[m] : nullptr;

    if (mask & kGravityTerm) {
      for (size_t b = 0; b < mod.bodies.size(); ++b) {
        for (const auto& mp : mod.bodies[b].mass_points) {
          gravity_point(&mod, &st, static_cast<int>(b), mp, ca);
          e_mod += ca.energy;
          if (mbd) mbd->gravity += ca.energy;
          flush_contribution(m, &mod, static_cast<int>(b), ca, root_partial[m]);
        }
      }
    }

    if (mask & kCoilTerm) {
      const Vec2 pa = st.X[static_cast<size_t>(mod.rear_arch)] * mod.coil_anchor_upper;
      const Vec2 pb = st.X[static_cast<size_t>(mod.heel_assembly)] * mod.coil_anchor_lower;
      const Vec2 d = pa - pb;
      const double len = d.norm();
      const double e = len - foot_->coil_rest_length;
      e_mod += 0.5 * mat.coil_spring_k * e * e;
      if (mbd) mbd->coil += 0.5 * mat.coil_spring_k * e * e;
      if (grad && len > 1e-12) {
        const Vec2 dE2 = (mat.coil_spring_k * e / len) * d;
        accumulate_planar(m, mod, st, mod.rear_arch, pa, dE2, add_chain);
        accumulate_planar(m, mod, st, mod.heel_assembly, pb, -dE2, add_chain);
      }
    }

    if (mask & kBandTerm) {
      const double kr = mat.band_rot_k();
      // hinge coordinates: every chain body after the heel assembly
      for (size_t b = static_cast<size_t>(mod.first_sole); b < mod.bodies.size(); ++b) {
        const int c = mod.bodies[b].coord;
        if (c == kFixedCoord || mod.bodies[b].kind == BodyKind::FrontalArch) continue;
        const double th = q[c];
        e_mod += 0.5 * kr * th * th;
        if (mbd) mbd->bands += 0.5 * kr * th * th;
        if (grad) (*grad)[c] += kr * th;
      }
    }

    if (mask & kTendonTerm) {
      const auto& route = mod.tendon_route;
      tendon_pts_.resize(route.size());
      for (size_t j = 0; j < route.size(); ++j) {
        tendon_pts_[j] = st.X[static_cast<size_t>(route[j].first)] * route[j].second;
      }
      double len = 0.0;
      for (size_t j = 1; j < route.size(); ++j) {
        len += (tendon_pts_[j] - tendon_pts_[j - 1]).norm();
      }
      const double e = len - tendon_engagement_length();
      if (e > 0.0) {
        double f = 0.0;
        const double e_t =
            smooth_penalty(e, mat.tendon_stiffness, settings_.contact_smoothing_mm, f);
        e_mod += e_t;
        if (mbd) mbd->tendon += e_t;
        if (grad) {
          tendon_grads_.assign(route.size(), Vec2::Zero());
          for (size_t j = 1; j < route.size(); ++j) {
            const Vec2 seg = tendon_pts_[j] - tendon_pts_[j - 1];
            const double sl = seg.norm();
            if (sl < 1e-12) continue;
            const Vec2 u = (f / sl) * seg;
            tendon_grads_[j] += u;
            tendon_grads_[j - 1] -= u;
          }
          for (size_t j = 0; j < route.size(); ++j) {
            accumulate_planar(m, mod, st, route[j].first, tendon_pts_[j],
                              tendon_grads_[j], add_chain);
          }
        }
      }
    }

    if (mask & kLoopTerm) {
      const int chain_body = mod.toe1 - 1;  // last sole body carries the MTP point
      const Vec2 pa = st.X[static_cast<size_t>(mod.frontal_arch)] * foot_->geometry.mtp_hinge();
      const Vec2 pb = st.X[static_cast<size_t>(chain_body)] * foot_->geometry.mtp_hinge();
      const Vec2 d = pa - pb;
      const double e2 = 0.5 * settings_.loop_stiffness * d.squaredNorm();
      e_mod += e2;
      if (mbd) mbd->loop += e2;
      if (grad) {
        const Vec2 dE2 = settings_.loop_stiffness * d;
        accumulate_planar(m, mod, st, mod.frontal_arch, pa, dE2, add_chain);
        accumulate_planar(m, mod, st, chain_body, pb, -dE2, add_chain);
      }
    }

    if ((mask & kContactTerm) && terrain_) {
      for (size_t b = 0; b < mod.bodies.size(); ++b) {
        const BodyDef& body = mod.bodies[b];
        if (body.contact_samples.empty()) continue;
        const int np = body.contact_pair_count;
        for (int k = 0; k < np; ++k) {
          contact_sample(&mod, &st, static_cast<int>(b),
                         body.contact_samples[static_cast<size_t>(2 * k)], mod.y_offset, ca);
          contact_sample(&mod, &st, static_cast<int>(b),
                         body.contact_samples[static_cast<size_t>(2 * k + 1)], mod.y_offset, cb);
          flush_pair(m, &mod, static_cast<int>(b), ca, cb, root_partial[m], e_mod);
          if (mbd) mbd->contact += (ca.energy + cb.energy);
        }
        for (size_t i = static_cast<size_t>(2 * np); i < body.contact_samples.size(); ++i) {
          contact_sample(&mod, &st, static_cast<int>(b), body.contact_samples[i],
                         mod.y_offset, ca);
          e_mod += ca.energy;
          if (mbd) mbd->contact += ca.energy;
          flush_contribution(m, &mod, static_cast<int>(b), ca, root_partial[m]);
        }
      }
    }

    module_energy[m] = e_mod;
  }

  // transverse sheet couplings, per adjacent pair, buffered left/right so a
  // module's two neighbours join its gradient as one commutative sum
  double sheet_energy_total = 0.0;
  if (!foot_->rigid && (mask & kSheetTerm)) {
    if (grad) {
      sheet_left_.setZero(lay.total);
      sheet_right_.setZero(lay.total);
    }
    auto add_left = [&](size_t m, int coord, double v) {
      if (coord == lay.shared_front || coord == lay.shared_heel) {
        throw std::logic_error("sheet coupling on a rigidly locked site");
      }
      sheet_left_[coord] += v;
      (void)m;
    };
    auto add_right = [&](size_t m, int coord, double v) {
      if (coord == lay.shared_front || coord == lay.shared_heel) {
        throw std::logic_error("sheet coupling on a rigidly locked site");
      }
      sheet_right_[coord] += v;
      (void)m;
    };

    for (const CouplingSpec& cs : foot_->couplings) {
      if (cs.type != Connection::Elastic) continue;
      std::vector<double> pair_energy(cs.pairs.size(), 0.0);
      for (size_t p = 0; p < cs.pairs.size(); ++p) {
        const size_t ma = static_cast<size_t>(cs.pairs[p].first);
        const size_t mb = static_cast<size_t>(cs.pairs[p].second);
        const ModuleDef& A = foot_->modules[ma];
        const ModuleDef& B = foot_->modules[mb];
        int body_a, body_b;
        Vec2 anchor;
        switch (cs.site) {
          case Site::FrontalArch:
            body_a = A.frontal_arch; body_b = B.frontal_arch; anchor = A.sheet_anchor_front;
            break;
          case Site::RearArch:
            body_a = A.rear_arch; body_b = B.rear_arch; anchor = A.sheet_anchor_rear;
            break;
          case Site::Heel:
            body_a = A.heel_assembly; body_b = B.heel_assembly; anchor = A.sheet_anchor_heel;
            break;
        }
        const FkState& sa = fk_[ma];
        const FkState& sb = fk_[mb];
        // rotational sheet stiffness on the relative link angle
        const double dth = sb.angle[static_cast<size_t>(body_b)] -
                           sa.angle[static_cast<size_t>(body_a)];
        double e = 0.5 * mat.sheet_k_rot * dth * dth;
        if (grad) {
          for (const auto& [coord, pb] : B.bodies[static_cast<size_t>(body_b)].ancestors) {
            (void)pb;
            add_left(mb, coord, mat.sheet_k_rot * dth);
          }
          for (const auto& [coord, pb] : A.bodies[static_cast<size_t>(body_a)].ancestors) {
            (void)pb;
            add_right(ma, coord, -mat.sheet_k_rot * dth);
          }
        }
        // translational sheet stiffness on relative anchor displacement
        const Vec2 pa2 = sa.X[static_cast<size_t>(body_a)] * anchor;
        const Vec2 pb2 = sb.X[static_cast<size_t>(body_b)] * anchor;
        const Vec2 dp = pb2 - pa2;
        e += 0.5 * mat.sheet_k_trans * dp.squaredNorm();
        if (grad) {
          const Vec2 dE2 = mat.sheet_k_trans * dp;
          accumulate_planar(mb, B, sb, body_b, pb2, dE2, add_left);
          accumulate_planar(ma, A, sa, body_a, pa2, -dE2, add_right);
        }
        pair_energy[p] = e;
      }
      const int np = static_cast<int>(pair_energy.size());
      for (int i = 0; i < np / 2; ++i) {
        sheet_energy_total += (pair_energy[static_cast<size_t>(i)] +
                               pair_energy[static_cast<size_t>(np - 1 - i)]);
      }
      if (np % 2) sheet_energy_total += pair_energy[static_cast<size_t>(np / 2)];
    }
    if (grad) {
      for (int i = lay.shared_end; i < lay.total; ++i) {
        const double v = sheet_left_[i] + sheet_right_[i];
        if (v != 0.0) (*grad)[i] += v;
      }
    }
  }

  // external load: constant downward force at a root material point
  double load_energy = 0.0;
  Eigen::Matrix<double, 6, 1> load_partial = Eigen::Matrix<double, 6, 1>::Zero();
  if ((mask & kLoadTerm) && load_force_ > 0.0) {
    const Vec3 p = R * load_local_ + t;
    load_energy = load_force_ * p.z();
    if (grad) {
      load_partial[2] = load_force_;
      for (int i = 0; i < 3; ++i) load_partial[3 + i] = load_force_ * (dR[i] * load_local_).z();
    }
  }

  // symmetric reductions
  const int nm = static_cast<int>(n_modules);
  double e_total = rigid_energy + load_energy + sheet_energy_total;
  for (int i = 0; i < nm / 2; ++i) {
    e_total += (module_energy[static_cast<size_t>(i)] +
                module_energy[static_cast<size_t>(nm - 1 - i)]);
  }
  if (nm % 2) e_total += module_energy[static_cast<size_t>(nm / 2)];

  if (grad) {
    Eigen::Matrix<double, 6, 1> root_total = root_rigid + load_partial;
    for (int i = 0; i < nm / 2; ++i) {
      root_total += (root_partial[static_cast<size_t>(i)] +
                     root_partial[static_cast<size_t>(nm - 1 - i)]);
    }
    if (nm % 2) root_total += root_partial[static_cast<size_t>(nm / 2)];
    for (int i = 0; i < 6; ++i) (*grad)[i] += root_total[i];

    auto reduce_shared = [&](int coord, const std::vector<double>& partial) {
      if (coord < 0) return;
      double acc = 0.0;
      for (int i = 0; i < nm / 2; ++i) {
        acc += (partial[static_cast<size_t>(i)] + partial[static_cast<size_t>(nm - 1 - i)]);
      }
      if (nm % 2) acc += partial[static_cast<size_t>(nm / 2)];
      (*grad)[coord] += acc;
    };
    reduce_shared(lay.shared_front, shared_front_partial);
    reduce_shared(lay.shared_heel, shared_heel_partial);
  }

  if (bd) {
    *bd = rigid_bd;
    auto fold = [&](auto member) {
      double acc = 0.0;
      for (int i = 0; i < nm / 2; ++i) {
        acc += (module_bd[static_cast<size_t>(i)].*member +
                module_bd[static_cast<size_t>(nm - 1 - i)].*member);
      }
      if (nm % 2) acc += module_bd[static_cast<size_t>(nm / 2)].*member;
      return acc;
    };
    if (nm > 0) {
      bd->gravity += fold(&EnergyBreakdown::gravity);
      bd->coil += fold(&EnergyBreakdown::coil);
      bd->bands += fold(&EnergyBreakdown::bands);
      bd->tendon += fold(&EnergyBreakdown::tendon);
      bd->contact += fold(&EnergyBreakdown::contact);
      bd->loop += fold(&EnergyBreakdown::loop);
    }
    bd->sheets = sheet_energy_total;
    bd->load = load_energy;
  }
  if (max_pen_out) *max_pen_out = max_pen;
  return e_total;
}

}  // namespace softfoot
