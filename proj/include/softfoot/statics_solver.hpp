#pragma once

// Quasi-static equilibrium of a foot on a terrain: constrained
// potential-energy minimization with continuation over the load ramp.
//
// A trial mimics the four-phase bench protocol. Reaching settles the foot
// under its own weight with the root's in-plane position held (the arm is
// position-controlled while approaching); the result is the undisturbed
// pose. Pushing ramps a constant downward force applied at a root-fixed
// material point, placed so the resultant of load plus foot weight passes
// through the requested grid hole at the settled pose. Homing and
// withdrawing carry no physics.

#include "softfoot/energy_model.hpp"
#include "softfoot/lbfgs.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace softfoot {

enum class SolveStatus { Converged, NotConverged, Diverged };

struct EquilibriumResult {
  VecX q;
  SolveStatus status = SolveStatus::NotConverged;
  bool converged = false;
  double grad_norm = 0.0;        // scaled, N
  double max_penetration = 0.0;  // mm
  double energy = 0.0;           // N*mm
  int iterations = 0;
  std::vector<ContactRecord> contacts;
  Vec3 reaction_force = Vec3::Zero();   // sum of contact forces on the foot
  Vec3 reaction_moment = Vec3::Zero();  // about the plate origin, N*mm
  double vertical_balance_error = 0.0;  // relative to the applied vertical load
  std::vector<double> energy_history;
};

inline std::vector<int> frozen_none() { return {}; }

// Root x, y, and yaw: held during the reaching phase.
inline std::vector<int> frozen_inplane() { return {0, 1, 5}; }

inline EquilibriumResult solve_equilibrium(const EnergyModel& model, const VecX& q0,
                                           const std::vector<int>& frozen = {}) {
  const SolverSettings& s = model.settings();
  MinimizeOptions opt;
  opt.max_iterations = s.max_iterations;
  opt.memory = s.lbfgs_memory;
  opt.grad_tol = s.grad_tol;

  // Minimize in preconditioned coordinates x = S q with rotations expressed
  // in lever-arm millimetres; this evens out the loop and contact stiffness
  // against the translations. Convergence is still judged by the scaled norm
  // of the physical gradient.
  const VecX S = model.norm_weights().cwiseInverse();
  const VecX s0 = q0.cwiseProduct(S);
  VecX q_scratch(q0.size()), g_scratch(q0.size());

  auto unscale = [&](const VecX& x) -> const VecX& {
    q_scratch = x.cwiseQuotient(S);
    return q_scratch;
  };
  const Vec3 ankle0 = model.ankle_world(q0);
  auto aborted = [&](const VecX& x) {
    return (model.ankle_world(unscale(x)) - ankle0).norm() > s.safety_box_mm;
  };

  MinimizeResult mr = lbfgs_minimize(
      s0, frozen, [&](const VecX& x) { return model.energy(unscale(x)); },
      [&](const VecX& x, VecX& g) {
        const double e = model.energy_and_gradient(unscale(x), g_scratch);
        g = g_scratch.cwiseQuotient(S);
        return e;
      },
      [&](const VecX& a, const VecX& b) { return model.sym_dot(a, b); },
      [&](const VecX& g) { return model.scaled_grad_norm(g.cwiseProduct(S)); },
      aborted, opt);

  EquilibriumResult res;
  res.q = mr.x.cwiseQuotient(S);
  res.grad_norm = mr.grad_norm;
  res.energy = mr.f;
  res.iterations = mr.iterations;
  res.energy_history = std::move(mr.energy_history);
  res.max_penetration = model.contacts(res.q, res.contacts);

  for (const auto& c : res.contacts) {
    res.reaction_force += c.force;
    res.reaction_moment += c.point.cross(c.force);
  }
  const double applied = model.foot().total_mass_kg * kGravity + model.load_force();
  res.vertical_balance_error =
      applied > 0.0 ? std::abs(res.reaction_force.z() - applied) / applied : 0.0;

  switch (mr.status) {
    case MinimizeStatus::Converged:
      res.status = res.max_penetration <= s.penetration_tol ? SolveStatus::Converged
                                                            : SolveStatus::NotConverged;
      break;
    case MinimizeStatus::Aborted:
      res.status = SolveStatus::Diverged;
      break;
    default:
      res.status = SolveStatus::NotConverged;
      break;
  }
  res.converged = res.status == SolveStatus::Converged;
  return res;
}

// 2D support polygon: convex hull of active contact points on the ground.
inline std::vector<Vec2> support_polygon(const std::vector<ContactRecord>& contacts) {
  std::vector<Vec2> pts;
  for (const auto& c : contacts) {
    if (c.normal_n > 1e-9) pts.emplace_back(c.point.x(), c.point.y());
  }
  if (pts.empty()) throw std::invalid_argument("support_polygon: no active contacts");
  return convex_hull(std::move(pts));
}

// True when the load's ground projection lies inside the support polygon
// (boundary counts as inside). Only meaningful on a single flat plane.
inline bool hull_check(const Vec2& load_xy, const std::vector<Vec2>& polygon) {
  return point_in_convex_polygon(load_xy, polygon, 1e-6);
}

struct RampStep {
  double total_vertical_n = 0.0;  // applied force plus foot weight
  double displacement_mm = 0.0;   // ankle point vs the undisturbed pose
  Vec3 rotation_deg = Vec3::Zero();  // XYZ angles of the relative rotation
  EquilibriumResult eq;
};

struct RampTrace {
  EquilibriumResult settle;
  VecX q_undisturbed;
  Vec3 ankle_undisturbed = Vec3::Zero();
  Mat3 rot_undisturbed = Mat3::Identity();
  Vec3 app_point_local = Vec3::Zero();
  double target_force_n = 0.0;
  double foot_weight_n = 0.0;
  std::vector<RampStep> steps;
  int failed_step = -1;           // 0 = settle, 1..n = ramp step; -1 = none
  bool cone_violation = false;
  int cone_step = -1;
};

namespace detail {

inline bool cone_violated(const std::vector<ContactRecord>& contacts, double mu) {
  for (const auto& c : contacts) {
    if (c.normal_n <= 1e-9) continue;
    const Vec3 tangential = c.force - c.normal_n * c.normal;
    if (tangential.norm() > mu * c.normal_n + 1e-9) return true;
  }
  return false;
}

}  // namespace detail

// Settles the foot, then ramps the vertical load linearly to the target in
// `steps` increments, warm-starting each solve from the previous state.
inline RampTrace ramp_load(const FootAssembly& foot, const Terrain& terrain,
                           const Vec2& point, double target_force_n, int steps,
                           const SolverSettings& settings) {
  const double weight = foot.total_mass_kg * kGravity;
  if (target_force_n <= weight) {
    throw std::invalid_argument("ramp_load: target must exceed the foot weight");
  }
  if (steps < 1) throw std::invalid_argument("ramp_load: steps must be >= 1");

  EnergyModel model(foot, &terrain, settings);
  RampTrace trace;
  trace.target_force_n = target_force_n;
  trace.foot_weight_n = weight;

  // start from the rest pose lifted clear of the terrain
  VecX q0 = VecX::Zero(foot.layout.total);
  const double pen0 = model.max_penetration(q0);
  if (pen0 > 0.0) q0[2] += pen0 + 0.5;

  trace.settle = solve_equilibrium(model, q0, frozen_inplane());
  if (!trace.settle.converged) {
    trace.failed_step = 0;
    return trace;
  }
  trace.q_undisturbed = trace.settle.q;
  trace.ankle_undisturbed = model.ankle_world(trace.settle.q);
  trace.rot_undisturbed = model.root_rotation(trace.settle.q);
  if (detail::cone_violated(trace.settle.contacts, terrain.friction_mu)) {
    trace.cone_violation = true;
    trace.cone_step = 0;
  }

  // place the hanging load so the resultant passes through the grid hole
  const double f_app = target_force_n - weight;
  const Vec3 com = model.com_world(trace.settle.q);
  const double ax = (target_force_n * point.x() - weight * com.x()) / f_app;
  const double ay = (target_force_n * point.y() - weight * com.y()) / f_app;
  const double az = settings.app_height_mm >= 0.0 ? settings.app_height_mm
                                                  : trace.ankle_undisturbed.z();
  const Mat3 Ru = trace.rot_undisturbed;
  const Vec3 t_u = model.root_translation(trace.settle.q);
  trace.app_point_local = Ru.transpose() * (Vec3(ax, ay, az) - t_u);

  // Load continuation with adaptive refinement: a step whose solve stalls is
  // split into finer load increments (each under the per-step iteration
  // cap), warm-starting from the partial descent. Large but finite
  // reconfigurations, such as the foot pitching onto its toes over an
  // obstacle, settle this way; genuine topples keep diverging. Contacts are
  // tangentially anchored to the previous converged state (stick friction);
  // the cone check validates that assumption per step.
  VecX q = trace.settle.q;
  model.set_stick_anchors(trace.settle.contacts);
  double f_done = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double f_goal = f_app * k / steps;
    RampStep step;
    step.total_vertical_n = weight + f_goal;

    double delta = f_goal - f_done;
    int sub_solves = 0;
    bool step_failed = false;
    while (f_done < f_goal - 1e-12) {
      const double f_try = std::min(f_goal, f_done + delta);
      model.set_load(f_try, trace.app_point_local);
      step.eq = solve_equilibrium(model, q);
      ++sub_solves;
      if (step.eq.status == SolveStatus::Converged) {
        q = step.eq.q;
        f_done = f_try;
        delta *= 2.0;
        model.set_stick_anchors(step.eq.contacts);
      } else if (step.eq.status == SolveStatus::NotConverged && sub_solves < 16 &&
                 delta > (f_app / steps) / 16.0) {
        q = step.eq.q;  // continue the partial descent at a finer increment
        delta *= 0.5;
      } else {
        step_failed = true;
        break;
      }
    }

    step.displacement_mm = (model.ankle_world(q) - trace.ankle_undisturbed).norm();
    const Mat3 rel = Ru.transpose() * model.root_rotation(q);
    step.rotation_deg = matrix_to_euler(rel) * (180.0 / M_PI);
    if (!step_failed && !trace.cone_violation &&
        detail::cone_violated(step.eq.contacts, terrain.friction_mu)) {
      trace.cone_violation = true;
      trace.cone_step = k;
    }
    const bool runaway = step.displacement_mm > 250.0 ||
                         step.rotation_deg.cwiseAbs().maxCoeff() > 120.0;
    trace.steps.push_back(std::move(step));
    if (step_failed) {
      trace.failed_step = k;
      break;
    }
    if (runaway) break;  // far beyond every classification threshold
  }
  return trace;
}

enum class Stability { Stable, Unstable };
enum class InstabilityMode { None, Displacement, Rotation, Diverged };

inline std::string_view instability_mode_name(InstabilityMode m) {
  switch (m) {
    case InstabilityMode::None: return "none";
    case InstabilityMode::Displacement: return "displacement";
    case InstabilityMode::Rotation: return "rotation";
    case InstabilityMode::Diverged: return "diverged";
  }
  return "?";
}

struct Classification {
  Stability stability = Stability::Unstable;
  InstabilityMode mode = InstabilityMode::Diverged;
  int at_step = -1;
  bool stable() const { return stability == Stability::Stable; }
};

// A trial is unstable when any ramp step moves the root at or beyond the
// displacement threshold, rotates it at or beyond the rotation threshold
// about any axis, when the solver fails before the target force, or when an
// equilibrium needs contact forces outside the friction cone.
inline Classification detect_instability(const RampTrace& trace,
                                         double displacement_threshold_mm = 100.0,
                                         double rotation_threshold_deg = 45.0) {
  if (trace.steps.empty() && trace.failed_step < 0) {
    throw std::invalid_argument("detect_instability: empty trace");
  }
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const RampStep& st = trace.steps[i];
    if (!st.eq.converged) break;  // handled below as a solver failure
    if (st.displacement_mm >= displacement_threshold_mm) {
      return {Stability::Unstable, InstabilityMode::Displacement, static_cast<int>(i + 1)};
    }
    const Vec3 r = st.rotation_deg.cwiseAbs();
    if (r.maxCoeff() >= rotation_threshold_deg) {
      return {Stability::Unstable, InstabilityMode::Rotation, static_cast<int>(i + 1)};
    }
  }
  if (trace.failed_step >= 0) {
    return {Stability::Unstable, InstabilityMode::Diverged, trace.failed_step};
  }
  if (trace.cone_violation) {
    return {Stability::Unstable, InstabilityMode::Diverged, trace.cone_step};
  }
  const double final_force = trace.steps.back().total_vertical_n;
  if (final_force < 0.99 * trace.target_force_n) {
    return {Stability::Unstable, InstabilityMode::Diverged,
            static_cast<int>(trace.steps.size())};
  }
  return {Stability::Stable, InstabilityMode::None, -1};
}

}  // namespace softfoot
