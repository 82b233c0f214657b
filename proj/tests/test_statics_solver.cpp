#include "softfoot/statics_solver.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace softfoot;

namespace {

std::string serialize_trace(const RampTrace& trace) {
  std::ostringstream os;
  os.precision(17);
  os << trace.failed_step << '|' << trace.cone_violation << '|';
  for (const auto& st : trace.steps) {
    os << st.total_vertical_n << ',' << st.displacement_mm << ','
       << st.rotation_deg.x() << ',' << st.rotation_deg.y() << ','
       << st.rotation_deg.z() << ',' << st.eq.energy << ',' << st.eq.grad_norm << ';';
    for (double v : st.eq.q) os << v << ' ';
  }
  return os.str();
}

}  // namespace

TEST_CASE("rigid foot on flat ground balances a 30 N central load") {
  const auto foot = build_foot("RIGID");
  const Terrain flat = flat_terrain();
  SolverSettings settings;
  EnergyModel model(foot, &flat, settings);

  const Rect fp = foot.unloaded_footprint();
  const Vec2 centroid(0.5 * (fp.x_min + fp.x_max), 0.0);
  const double target = (2.0 + foot.total_mass_kg) * kGravity;  // about 30.7 N
  model.set_load(target - foot.total_mass_kg * kGravity,
                 Vec3(centroid.x(), centroid.y(), 60.0));

  VecX q0 = VecX::Zero(6);
  const EquilibriumResult res = solve_equilibrium(model, q0);
  REQUIRE(res.converged);
  CHECK(res.grad_norm <= settings.grad_tol);
  CHECK(res.max_penetration <= settings.penetration_tol);
  CHECK(res.reaction_force.z() == Catch::Approx(target).epsilon(0.01));
  CHECK(res.vertical_balance_error <= 0.01);
  CHECK(target == Catch::Approx(30.70).epsilon(0.001));  // (2 + 1.13) g

  SECTION("contact complementarity holds at the solution") {
    for (const auto& c : res.contacts) {
      CHECK(c.normal_n >= 0.0);
      CHECK(c.normal_n * std::max(0.0, c.gap_mm) <= 0.01);
    }
  }
  SECTION("moment balance about the plate origin") {
    // applied wrench: gravity at the COM plus the load at its point
    EnergyModel m2(foot, &flat, settings);
    const Vec3 com = m2.com_world(res.q);
    Vec3 applied_moment = com.cross(Vec3(0, 0, -foot.total_mass_kg * kGravity));
    applied_moment += Vec3(centroid.x(), centroid.y(), 60.0)
                          .cross(Vec3(0, 0, -(target - foot.total_mass_kg * kGravity)));
    const Vec3 residual = res.reaction_moment + applied_moment;
    const double scale = target * 0.5 * fp.length();
    CHECK(residual.norm() <= 0.01 * scale);
  }
  SECTION("energy is monotone over accepted iterations") {
    for (size_t i = 1; i < res.energy_history.size(); ++i) {
      CHECK(res.energy_history[i] <= res.energy_history[i - 1] + 1e-9);
    }
  }
}

TEST_CASE("an unsupported foot diverges in free fall") {
  const auto foot = build_foot("RIGID");
  SolverSettings settings;
  EnergyModel model(foot, nullptr, settings);  // no terrain, no contact
  VecX q0 = VecX::Zero(6);
  q0[2] = 100.0;
  const EquilibriumResult res = solve_equilibrium(model, q0);
  CHECK(res.status == SolveStatus::Diverged);
  CHECK_FALSE(res.converged);
}

TEST_CASE("support polygon and hull check") {
  std::vector<ContactRecord> contacts;
  for (double x : {0.0, 1.0}) {
    for (double y : {0.0, 1.0}) {
      ContactRecord c;
      c.point = Vec3(x, y, 0.0);
      c.normal_n = 5.0;
      c.force = Vec3(0, 0, 5.0);
      contacts.push_back(c);
    }
  }
  const auto hull = support_polygon(contacts);
  REQUIRE(hull.size() == 4);
  CHECK(hull_check(Vec2(0.5, 0.5), hull));
  CHECK(hull_check(Vec2(0.0, 0.5), hull));   // boundary counts as inside
  CHECK_FALSE(hull_check(Vec2(1.001, 0.5), hull));
  CHECK_FALSE(hull_check(Vec2(-0.001, 0.5), hull));

  SECTION("empty contact set throws") {
    std::vector<ContactRecord> none;
    CHECK_THROWS_AS(support_polygon(none), std::invalid_argument);
    ContactRecord off;
    off.normal_n = 0.0;
    none.push_back(off);
    CHECK_THROWS_AS(support_polygon(none), std::invalid_argument);
  }
}

TEST_CASE("rigid flat ramp stays put under a centred load") {
  const auto foot = build_foot("RIGID");
  const Terrain flat = flat_terrain();
  SolverSettings settings;
  const Rect fp = foot.unloaded_footprint();
  const Vec2 centroid(0.5 * (fp.x_min + fp.x_max), 0.0);
  const double target = (2.0 + foot.total_mass_kg) * kGravity;

  const RampTrace trace = ramp_load(foot, flat, centroid, target, 20, settings);
  REQUIRE(trace.failed_step == -1);
  REQUIRE(trace.steps.size() == 20);
  CHECK(trace.settle.converged);
  CHECK(trace.settle.reaction_force.z() ==
        Catch::Approx(foot.total_mass_kg * kGravity).epsilon(0.01));
  for (const auto& st : trace.steps) CHECK(st.eq.converged);
  CHECK(trace.steps.back().displacement_mm < 1.0);
  CHECK(trace.steps.back().total_vertical_n == Catch::Approx(target));
  CHECK(detect_instability(trace).stable());

  SECTION("force is nondecreasing along the ramp") {
    double prev = trace.foot_weight_n;
    for (const auto& st : trace.steps) {
      CHECK(st.total_vertical_n >= prev);
      prev = st.total_vertical_n;
    }
  }

  SECTION("a single step reaches the same equilibrium") {
    const RampTrace one = ramp_load(foot, flat, centroid, target, 1, settings);
    REQUIRE(one.failed_step == -1);
    const VecX& qa = trace.steps.back().eq.q;
    const VecX& qb = one.steps.back().eq.q;
    CHECK((qa - qb).cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("a load outside the footprint topples the rigid foot") {
  const auto foot = build_foot("RIGID");
  const Terrain flat = flat_terrain();
  SolverSettings settings;
  const double target = (2.0 + foot.total_mass_kg) * kGravity;

  const RampTrace trace = ramp_load(foot, flat, Vec2(150.0, 60.0), target, 20, settings);
  const Classification cls = detect_instability(trace);
  CHECK_FALSE(cls.stable());
  // either the solver diverges chasing the fall or a threshold is crossed
  CHECK((cls.mode == InstabilityMode::Diverged ||
         cls.mode == InstabilityMode::Rotation ||
         cls.mode == InstabilityMode::Displacement));
}

TEST_CASE("instability detector follows the strict thresholds") {
  RampTrace trace;
  trace.target_force_n = 30.0;
  trace.foot_weight_n = 11.0;
  auto add_step = [&](double force, double disp, double rot_deg, bool ok) {
    RampStep st;
    st.total_vertical_n = force;
    st.displacement_mm = disp;
    st.rotation_deg = Vec3(rot_deg, 0.1, -0.2);
    st.eq.converged = ok;
    st.eq.status = ok ? SolveStatus::Converged : SolveStatus::Diverged;
    trace.steps.push_back(st);
  };

  SECTION("stable: thresholds untouched, target reached") {
    for (int k = 1; k <= 10; ++k) add_step(11.0 + 1.9 * k, 3.0, 2.0, true);
    const Classification cls = detect_instability(trace);
    CHECK(cls.stable());
  }
  SECTION("rotation at 46 degrees is unstable") {
    add_step(13.0, 3.0, 2.0, true);
    add_step(15.0, 4.0, 46.0, true);
    const Classification cls = detect_instability(trace);
    CHECK_FALSE(cls.stable());
    CHECK(cls.mode == InstabilityMode::Rotation);
  }
  SECTION("99.9 mm and 44.9 degrees stay stable") {
    for (int k = 1; k <= 10; ++k) add_step(11.0 + 1.9 * k, 99.9, 44.9, true);
    CHECK(detect_instability(trace).stable());
  }
  SECTION("solver failure marks the step") {
    add_step(13.0, 3.0, 2.0, true);
    add_step(15.0, 5.0, 3.0, false);
    trace.failed_step = 2;
    const Classification cls = detect_instability(trace);
    CHECK_FALSE(cls.stable());
    CHECK(cls.mode == InstabilityMode::Diverged);
    CHECK(cls.at_step == 2);
  }
  SECTION("empty trace throws") {
    RampTrace empty;
    CHECK_THROWS_AS(detect_instability(empty), std::invalid_argument);
  }
}

TEST_CASE("soft foot settles on an obstacle and balances forces") {
  const auto foot = build_foot("KRK");
  const Terrain terrain = make_terrain(ObstacleSize::S, FootRegion::Forefoot);
  SolverSettings settings;
  const double target = (2.0 + foot.total_mass_kg) * kGravity;

  const RampTrace trace = ramp_load(foot, terrain, Vec2(0.0, 0.0), target, 10, settings);
  REQUIRE(trace.settle.converged);
  CHECK(trace.settle.reaction_force.z() ==
        Catch::Approx(foot.total_mass_kg * kGravity).epsilon(0.01));
  for (const auto& st : trace.steps) {
    if (!st.eq.converged) continue;
    CHECK(st.eq.vertical_balance_error <= 0.01);
    for (const auto& c : st.eq.contacts) {
      CHECK(c.normal_n >= 0.0);
      CHECK(c.normal_n * std::max(0.0, c.gap_mm) <= 0.01);
    }
  }
}

TEST_CASE("identical trials produce bitwise-identical traces") {
  const auto foot = build_foot("KKF");
  const Terrain terrain = make_terrain(ObstacleSize::M, FootRegion::Heel);
  SolverSettings settings;
  const double target = (2.0 + foot.total_mass_kg) * kGravity;

  const RampTrace a = ramp_load(foot, terrain, Vec2(-120.0, 30.0), target, 6, settings);
  const RampTrace b = ramp_load(foot, terrain, Vec2(-120.0, 30.0), target, 6, settings);
  CHECK(serialize_trace(a) == serialize_trace(b));
}

TEST_CASE("mirrored trials classify identically with mirrored kinematics") {
  const auto foot = build_foot("KRK");
  const Terrain terrain = make_terrain(ObstacleSize::L, FootRegion::Forefoot);
  SolverSettings settings;
  const double target = (2.0 + foot.total_mass_kg) * kGravity;

  const RampTrace up = ramp_load(foot, terrain, Vec2(60.0, 30.0), target, 6, settings);
  const RampTrace dn = ramp_load(foot, terrain, Vec2(60.0, -30.0), target, 6, settings);
  REQUIRE(up.steps.size() == dn.steps.size());
  for (size_t i = 0; i < up.steps.size(); ++i) {
    CHECK(up.steps[i].displacement_mm == dn.steps[i].displacement_mm);
    CHECK(up.steps[i].eq.energy == dn.steps[i].eq.energy);
    CHECK(up.steps[i].eq.converged == dn.steps[i].eq.converged);
  }
  CHECK(detect_instability(up).stable() == detect_instability(dn).stable());
}
