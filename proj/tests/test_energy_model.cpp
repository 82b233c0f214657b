#include "softfoot/energy_model.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace softfoot;

namespace {

// central finite differences; returns the worst floored relative error
double fd_max_relative_error(const EnergyModel& model, const VecX& q) {
  VecX g;
  model.energy_and_gradient(q, g);
  double worst = 0.0;
  VecX qp = q, qm = q;
  for (int i = 0; i < q.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(q[i]));
    qp[i] = q[i] + h;
    qm[i] = q[i] - h;
    const double fd = (model.energy(qp) - model.energy(qm)) / (2.0 * h);
    qp[i] = q[i];
    qm[i] = q[i];
    const double rel = std::abs(g[i] - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

// random configuration near the lifted rest pose, away from activation
// boundaries (contact and tendon engagement kinks are only C1)
VecX random_feasible(const EnergyModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lift(5.0, 30.0);
  std::uniform_real_distribution<double> rot(-0.05, 0.05);
  std::uniform_real_distribution<double> joint(-0.08, 0.08);
  for (;;) {
    VecX q = VecX::Zero(model.coord_count());
    q[2] = lift(rng);
    for (int i = 3; i < 6; ++i) q[i] = rot(rng);
    for (int i = 6; i < q.size(); ++i) q[i] = joint(rng);
    if (model.max_penetration(q) > 5.0) continue;
    bool near_kink = false;
    std::vector<ContactRecord> contacts;
    model.contacts(q, contacts);
    for (const auto& c : contacts) {
      if (std::abs(c.gap_mm) < 1e-4) near_kink = true;
    }
    if (!model.foot().rigid) {
      for (int m = 0; m < model.foot().geometry.module_count; ++m) {
        const double slack =
            model.tendon_length(q, m) - model.tendon_engagement_length();
        if (std::abs(slack) < 1e-4) near_kink = true;
      }
    }
    if (!near_kink) return q;
  }
}

}  // namespace

TEST_CASE("rigid foot resting flat carries gravity energy only") {
  const auto foot = build_foot("RIGID");
  const Terrain flat = flat_terrain();
  EnergyModel model(foot, &flat, SolverSettings{});
  const VecX q0 = VecX::Zero(6);

  const EnergyBreakdown bd = model.breakdown(q0);
  CHECK(bd.coil == 0.0);
  CHECK(bd.bands == 0.0);
  CHECK(bd.tendon == 0.0);
  CHECK(bd.sheets == 0.0);
  CHECK(bd.loop == 0.0);
  CHECK(bd.contact == 0.0);  // exactly touching, zero penetration
  CHECK(bd.load == 0.0);
  CHECK(model.energy(q0) == Catch::Approx(bd.gravity));
  CHECK(bd.gravity ==
        Catch::Approx(foot.total_mass_kg * kGravity * foot.com_rest.z()).margin(1e-9));
}

TEST_CASE("raising the root by 10 mm adds m*g*10 of gravity energy") {
  const auto foot = build_foot("KKK");
  const Terrain flat = flat_terrain();
  EnergyModel model(foot, &flat, SolverSettings{});
  VecX q = VecX::Zero(foot.dof_count());
  const double e0 = model.energy(q);
  q[2] += 10.0;
  const double e1 = model.energy(q);
  CHECK(e1 - e0 ==
        Catch::Approx(1.115 * kGravity * 10.0).epsilon(1e-9));
}

TEST_CASE("one perturbed sole hinge stores the configured band energy") {
  const auto foot = build_foot("KRK");
  EnergyModel model(foot, nullptr, SolverSettings{});
  VecX q = VecX::Zero(foot.dof_count());
  q[2] = 50.0;  // airborne so no contact term can move

  const EnergyBreakdown before = model.breakdown(q);
  const int hinge = foot.modules[2].bodies[static_cast<size_t>(
      foot.modules[2].first_sole)].coord;
  q[hinge] += 0.1;
  const EnergyBreakdown after = model.breakdown(q);

  const double k_rot = foot.materials.band_rot_k();
  CHECK(after.bands - before.bands == Catch::Approx(0.5 * k_rot * 0.1 * 0.1));
}

TEST_CASE("elastic terms vanish and have zero gradient at the rest pose") {
  for (const char* label : {"KKF", "KRK", "RRR"}) {
    const auto foot = build_foot(label);
    EnergyModel model(foot, nullptr, SolverSettings{});
    VecX q = VecX::Zero(foot.dof_count());
    q[2] = 120.0;  // airborne

    const EnergyBreakdown bd = model.breakdown(q);
    CHECK(bd.coil == 0.0);
    CHECK(bd.bands == 0.0);
    CHECK(bd.tendon == 0.0);
    CHECK(bd.sheets == 0.0);
    CHECK(bd.loop == Catch::Approx(0.0).margin(1e-18));

    VecX g;
    model.energy_and_gradient(q, g, kElasticTerms);
    CHECK(model.scaled_grad_norm(g) == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(20240817);
  const Terrain flat = flat_terrain();
  const Terrain bumpy = make_terrain(ObstacleSize::M, FootRegion::Heel);
  for (const char* label : {"RIGID", "KKF", "KRK", "KRR", "RRR"}) {
    const auto foot = build_foot(label);
    for (const Terrain* terrain : {&flat, &bumpy}) {
      EnergyModel model(foot, terrain, SolverSettings{});
      model.set_load(19.62, Vec3(20.0, 5.0, 80.0));
      for (int trial = 0; trial < 5; ++trial) {
        const VecX q = random_feasible(model, rng);
        const double err = fd_max_relative_error(model, q);
        INFO(label << " on " << terrain->id << " trial " << trial);
        CHECK(err <= 1e-5);
      }
    }
  }
}

TEST_CASE("stick anchoring gradient matches finite differences") {
  std::mt19937_64 rng(4242);
  const Terrain bumpy = make_terrain(ObstacleSize::S, FootRegion::Heel);
  const auto foot = build_foot("KRK");
  EnergyModel model(foot, &bumpy, SolverSettings{});
  model.set_load(12.0, Vec3(-40.0, 0.0, 80.0));

  // anchor the contacts of a slightly pressed pose, then evaluate nearby
  VecX q_ref = VecX::Zero(model.coord_count());
  q_ref[2] = -0.2;
  std::vector<ContactRecord> recs;
  model.contacts(q_ref, recs);
  model.set_stick_anchors(recs);

  std::uniform_real_distribution<double> d(-0.004, 0.004);
  for (int trial = 0; trial < 3; ++trial) {
    VecX q = q_ref;
    q[0] += 50.0 * d(rng);
    q[1] += 50.0 * d(rng);
    for (int i = 3; i < q.size(); ++i) q[i] += d(rng);
    const double err = fd_max_relative_error(model, q);
    INFO("stick trial " << trial);
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("tendon force is unilateral in the routed length") {
  const auto foot = build_foot("KRK");
  EnergyModel model(foot, nullptr, SolverSettings{});
  VecX q = VecX::Zero(foot.dof_count());
  q[2] = 80.0;

  SECTION("at rest the tendon is exactly at engagement length") {
    for (int m = 0; m < 5; ++m) {
      CHECK(model.tendon_force(q, m) == 0.0);
      CHECK(model.tendon_length(q, m) ==
            Catch::Approx(model.tendon_engagement_length()));
    }
  }

  SECTION("curling the sole concave-down slackens, concave-up engages") {
    const auto& mod = foot.modules[1];
    VecX curled = q;
    for (int i = 0; i < foot.geometry.sole_body_count - 1; ++i) {
      curled[mod.bodies[static_cast<size_t>(mod.first_sole + i)].coord] = 0.05;
    }
    VecX arched = q;
    for (int i = 0; i < foot.geometry.sole_body_count - 1; ++i) {
      arched[mod.bodies[static_cast<size_t>(mod.first_sole + i)].coord] = -0.05;
    }
    const double f_curl = model.tendon_force(curled, 1);
    const double f_arch = model.tendon_force(arched, 1);
    // exactly one bending sense lengthens the bottom-routed path
    CHECK(((f_curl > 0.0) != (f_arch > 0.0)));
    CHECK(std::min(f_curl, f_arch) == 0.0);
    CHECK(std::max(f_curl, f_arch) > 0.0);
  }
}

TEST_CASE("sheet couplings exert equal and opposite generalized forces") {
  const auto foot = build_foot("KKK");  // elastic at every coupled site
  EnergyModel model(foot, nullptr, SolverSettings{});
  auto front_coord = [&](int m) {
    const auto& mod = foot.modules[static_cast<size_t>(m)];
    return mod.bodies[static_cast<size_t>(mod.frontal_arch)].coord;
  };

  // activate only the (0,1) pair: equal frontal angles carry neither sheet
  // moment nor anchor offset, so pairs (1,2)..(3,4) stay silent
  VecX q = VecX::Zero(foot.dof_count());
  q[2] = 90.0;
  q[front_coord(0)] = 0.07;
  for (int m = 1; m < 5; ++m) q[front_coord(m)] = -0.02;

  VecX g;
  model.energy_and_gradient(q, g, kSheetTerm);
  const double f0 = g[front_coord(0)];
  const double f1 = g[front_coord(1)];
  CHECK(std::abs(f0) > 1.0);                          // the pair carries load
  CHECK(f0 + f1 == Catch::Approx(0.0).margin(1e-9));  // action equals reaction
  for (int m = 2; m < 5; ++m) {
    CHECK(g[front_coord(m)] == Catch::Approx(0.0).margin(1e-12));
  }

  // telescoping over the whole chain: a common rotation of all frontal
  // arches about the shared shaft leaves the sheet energy unchanged
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-0.06, 0.06);
  for (int m = 0; m < 5; ++m) q[front_coord(m)] = d(rng);
  model.energy_and_gradient(q, g, kSheetTerm);
  double front_sum = 0.0;
  for (int m = 0; m < 5; ++m) front_sum += g[front_coord(m)];
  CHECK(front_sum == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("mirrored configurations evaluate bitwise identically") {
  const auto foot = build_foot("KRK");
  const Terrain terrain = make_terrain(ObstacleSize::L, FootRegion::Forefoot);
  EnergyModel model(foot, &terrain, SolverSettings{});
  model.set_load(15.0, Vec3(10.0, 35.0, 80.0));
  EnergyModel model_m(foot, &terrain, SolverSettings{});
  model_m.set_load(15.0, Vec3(10.0, -35.0, 80.0));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  VecX q = VecX::Zero(foot.dof_count());
  q[0] = 3.0;
  q[1] = -7.0;
  q[2] = 18.0;
  for (int i = 3; i < q.size(); ++i) q[i] = d(rng);

  // mirror map: flip ty, roll, yaw; swap module blocks m <-> 4-m
  VecX qm = q;
  qm[1] = -q[1];
  qm[3] = -q[3];
  qm[5] = -q[5];
  const auto& spans = foot.layout.module_span;
  for (size_t m = 0; m < spans.size() / 2; ++m) {
    const auto [b0, e0] = spans[m];
    const auto [b1, e1] = spans[spans.size() - 1 - m];
    REQUIRE(e0 - b0 == e1 - b1);
    for (int i = 0; i < e0 - b0; ++i) {
      qm[b0 + i] = q[b1 + i];
      qm[b1 + i] = q[b0 + i];
    }
  }

  CHECK(model.energy(q) == model_m.energy(qm));

  VecX g, gm;
  model.energy_and_gradient(q, g);
  model_m.energy_and_gradient(qm, gm);
  CHECK(g[2] == gm[2]);
  CHECK(g[1] == -gm[1]);
  CHECK(g[3] == -gm[3]);
  for (size_t m = 0; m < spans.size() / 2; ++m) {
    const auto [b0, e0] = spans[m];
    const auto [b1, e1] = spans[spans.size() - 1 - m];
    (void)e1;
    for (int i = 0; i < e0 - b0; ++i) {
      CHECK(g[b0 + i] == gm[b1 + i]);
    }
  }
}

TEST_CASE("energy decreases along minus the gradient") {
  const auto foot = build_foot("KKF");
  const Terrain flat = flat_terrain();
  EnergyModel model(foot, &flat, SolverSettings{});
  VecX q = VecX::Zero(foot.dof_count());
  q[2] = 2.0;
  VecX g;
  const double e0 = model.energy_and_gradient(q, g);
  // the loop-closure penalty makes the landscape stiff, so probe with a
  // step well inside the quadratic region
  const VecX q1 = q - 1e-9 * g;
  CHECK(model.energy(q1) < e0);
}
