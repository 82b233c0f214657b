#include "softfoot/foot_assembly.hpp"
#include "softfoot/terrain.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace softfoot;

TEST_CASE("build_foot realizes the coupling label") {
  SECTION("KRK") {
    const auto foot = build_foot("KRK");
    CHECK(foot.coupling(Site::FrontalArch).type == Connection::Elastic);
    CHECK(foot.coupling(Site::RearArch).type == Connection::Rigid);
    CHECK(foot.coupling(Site::Heel).type == Connection::Elastic);
    CHECK(foot.coupling(Site::Heel).pairs.size() == 4);
  }
  SECTION("KKF: free heels have no coupling elements") {
    const auto foot = build_foot("KKF");
    CHECK(foot.coupling(Site::Heel).type == Connection::Free);
    CHECK(foot.coupling(Site::Heel).pairs.empty());
  }
  SECTION("RIGID collapses to one body with zero internal DoFs") {
    const auto foot = build_foot("RIGID");
    CHECK(foot.rigid);
    CHECK(foot.internal_dof_count() == 0);
    CHECK(foot.dof_count() == 6);
  }
  SECTION("unknown label and bad geometry throw") {
    CHECK_THROWS_AS(build_foot("KFK"), std::invalid_argument);
    ModuleGeometry g;
    g.sole_body_length = -1.0;
    CHECK_THROWS_AS(build_foot("KRK", g), std::invalid_argument);
  }
}

TEST_CASE("coordinate counts per configuration") {
  CHECK(build_foot("KKF").dof_count() == 70);
  CHECK(build_foot("KKK").dof_count() == 70);
  CHECK(build_foot("KRF").dof_count() == 66);
  CHECK(build_foot("KRK").dof_count() == 66);
  CHECK(build_foot("KRR").dof_count() == 62);
  CHECK(build_foot("RRR").dof_count() == 58);
  CHECK(build_foot("RIGID").dof_count() == 6);
}

TEST_CASE("site mobility strictly decreases from free to elastic to rigid") {
  const auto kkf = build_foot("KKF");  // heel free
  const auto kkk = build_foot("KKK");  // heel elastic
  const auto krr = build_foot("KRR");  // heel rigid
  const int free_idx = kkf.site_mobility_index(Site::Heel);
  const int elastic_idx = kkk.site_mobility_index(Site::Heel);
  const int rigid_idx = krr.site_mobility_index(Site::Heel);
  CHECK(free_idx > elastic_idx);
  CHECK(elastic_idx > rigid_idx);
  CHECK(rigid_idx == 0);
}

TEST_CASE("RRR keeps only per-module sole-chain coordinates") {
  const auto foot = build_foot("RRR");
  // shared frontal-arch and heel coordinates plus per-module chains
  CHECK(foot.layout.shared_front >= 0);
  CHECK(foot.layout.shared_heel >= 0);
  for (const auto& mod : foot.modules) {
    CHECK(mod.bodies[static_cast<size_t>(mod.rear_arch)].coord == kFixedCoord);
    CHECK(mod.bodies[static_cast<size_t>(mod.frontal_arch)].coord ==
          foot.layout.shared_front);
    CHECK(mod.bodies[static_cast<size_t>(mod.heel_assembly)].coord ==
          foot.layout.shared_heel);
  }
  // 6 root + 2 shared + 5 * (7 sole + mtp + 2 ip)
  CHECK(foot.dof_count() == 6 + 2 + 5 * 10);
}

TEST_CASE("tendon pretension anchors to the per-slip plantar tension") {
  CHECK(tendon_pretension_per_module(100.0) == Catch::Approx(294.3).margin(1e-9));
  CHECK(tendon_pretension_per_module(50.0) == Catch::Approx(147.15).margin(1e-9));
  // per-foot total over the five modules equals 1.5 body weights
  const double total = 5.0 * tendon_pretension_per_module(100.0);
  CHECK(total == Catch::Approx(1.5 * 100.0 * kGravity).margin(1e-9));
  CHECK(total == Catch::Approx(1471.5).margin(1e-9));
  CHECK(tendon_rated_tension(100.0, 2.0) == Catch::Approx(588.6).margin(1e-9));
  CHECK_THROWS_AS(tendon_pretension_per_module(0.0), std::invalid_argument);
  CHECK_THROWS_AS(tendon_pretension_per_module(-5.0), std::invalid_argument);
}

TEST_CASE("unloaded footprint covers exactly 50 grid points") {
  const auto foot = build_foot("KRK");
  const Rect fp = foot.unloaded_footprint();

  CHECK(fp.height() == Catch::Approx(5 * foot.geometry.module_width));
  CHECK(fp.contains(0.0, 0.0));  // ankle projection

  int covered = 0;
  for (const auto& p : grid_points(Plate{})) {
    if (fp.contains(p.x(), p.y())) ++covered;
  }
  CHECK(covered == 50);
}

TEST_CASE("mass properties match the published totals") {
  const auto soft = build_foot("KRK");
  const auto rigid = build_foot("RIGID");
  CHECK(soft.mass_properties().mass_kg == Catch::Approx(1.115).margin(1e-9));
  CHECK(rigid.mass_properties().mass_kg == Catch::Approx(1.13).margin(1e-9));

  // centers of mass nearly coincide by design
  const Vec3 d = rigid.mass_properties().com - soft.mass_properties().com;
  CHECK(d.norm() <= 5.0);

  // symmetric mass layout
  CHECK(std::abs(soft.mass_properties().com.y()) < 1e-9);
  CHECK(std::abs(rigid.mass_properties().com.y()) < 1e-9);
}

TEST_CASE("assemblies are mirror-symmetric about the central module") {
  for (const char* label : {"KKF", "KKK", "KRF", "KRK", "KRR", "RRR"}) {
    const auto foot = build_foot(label);
    const int n = foot.geometry.module_count;
    for (int m = 0; m < n; ++m) {
      const auto& a = foot.modules[static_cast<size_t>(m)];
      const auto& b = foot.modules[static_cast<size_t>(n - 1 - m)];
      CHECK(a.y_offset == Catch::Approx(-b.y_offset).margin(1e-12));
      REQUIRE(a.bodies.size() == b.bodies.size());
      for (size_t i = 0; i < a.bodies.size(); ++i) {
        CHECK(a.bodies[i].pivot == b.bodies[i].pivot);
        CHECK(a.bodies[i].contact_samples.size() == b.bodies[i].contact_samples.size());
      }
    }
    for (const auto& c : foot.couplings) {
      for (const auto& [i, j] : c.pairs) CHECK(j == i + 1);
    }
  }
}

TEST_CASE("rigid bottom grid includes the footprint corners") {
  const auto foot = build_foot("RIGID");
  const Rect fp = foot.unloaded_footprint();
  int corners = 0;
  for (const auto& s : foot.rigid_body.contact_samples) {
    const double x = s.pos.x(), y = s.y_rel;
    if ((x == fp.x_min || x == fp.x_max) && (y == fp.y_min || y == fp.y_max)) ++corners;
  }
  CHECK(corners == 4);
}
