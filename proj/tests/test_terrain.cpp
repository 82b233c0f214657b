#include "softfoot/terrain.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

using namespace softfoot;

TEST_CASE("grid holds 91 points, symmetric and inside the plate") {
  const Plate plate;
  const auto pts = grid_points(plate);
  REQUIRE(pts.size() == 91);

  std::set<std::pair<double, double>> set;
  double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
  for (const auto& p : pts) {
    set.insert({p.x(), p.y()});
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  // invariant under mirrors about both plate axes
  for (const auto& p : pts) {
    CHECK(set.count({p.x(), -p.y()}) == 1);
    CHECK(set.count({-p.x(), p.y()}) == 1);
  }
  CHECK(max_x - min_x <= plate.size_x);
  CHECK(max_y - min_y <= plate.size_y);
}

TEST_CASE("obstacle layouts match their size class and symmetry") {
  const Plate plate;

  SECTION("S: one obstacle on the longitudinal axis") {
    const auto layout = build_layout(ObstacleSize::S, FootRegion::Heel, plate);
    REQUIRE(layout.obstacles.size() == 1);
    CHECK(layout.obstacles[0].center.y() == 0.0);
  }

  SECTION("L forefoot: five obstacles one pitch apart") {
    const auto layout = build_layout(ObstacleSize::L, FootRegion::Forefoot, plate);
    REQUIRE(layout.obstacles.size() == 5);
    std::set<double> ys;
    for (const auto& ob : layout.obstacles) ys.insert(ob.center.y());
    const double p = plate.pitch_y;
    CHECK(ys == std::set<double>{-2 * p, -p, 0.0, p, 2 * p});
  }

  SECTION("M heel mirrored in y equals itself") {
    const auto layout = build_layout(ObstacleSize::M, FootRegion::Heel, plate);
    REQUIRE(layout.obstacles.size() == 3);
    std::set<std::pair<double, double>> centers, mirrored;
    for (const auto& ob : layout.obstacles) {
      centers.insert({ob.center.x(), ob.center.y()});
      mirrored.insert({ob.center.x(), -ob.center.y()});
    }
    CHECK(centers == mirrored);
  }

  SECTION("all six layouts: centers on grid holes, no overlap") {
    const auto pts = grid_points(plate);
    std::set<std::pair<double, double>> holes;
    for (const auto& p : pts) holes.insert({p.x(), p.y()});
    for (const auto& terrain : study_terrains(plate)) {
      REQUIRE(terrain.layout.has_value());
      const auto& obs = terrain.layout->obstacles;
      CHECK(obs.size() ==
            static_cast<size_t>(obstacle_count(terrain.layout->size_class)));
      for (size_t i = 0; i < obs.size(); ++i) {
        CHECK(holes.count({obs[i].center.x(), obs[i].center.y()}) == 1);
        for (size_t j = i + 1; j < obs.size(); ++j) {
          CHECK((obs[i].center - obs[j].center).norm() >
                obs[i].radius() + obs[j].radius());
        }
      }
    }
  }
}

TEST_CASE("height query is exact on the disk boundary") {
  SECTION("flat terrain is zero everywhere") {
    const Terrain flat = flat_terrain();
    CHECK(height_at(flat, 0, 0) == 0.0);
    CHECK(height_at(flat, -150, 80) == 0.0);
  }

  const Terrain t = make_terrain(ObstacleSize::S, FootRegion::Heel);
  const Vec2 c = t.layout->obstacles[0].center;

  SECTION("obstacle top and radial boundary") {
    CHECK(height_at(t, c.x(), c.y()) == 22.0);
    CHECK(height_at(t, c.x() + 12.4, c.y()) == 22.0);
    CHECK(height_at(t, c.x() + 12.6, c.y()) == 0.0);
  }

  SECTION("out-of-plate queries throw") {
    CHECK_THROWS_AS(height_at(t, 250.0, 0.0), std::out_of_range);
    CHECK_THROWS_AS(height_at(t, 0.0, 120.0), std::out_of_range);
  }

  SECTION("height is y-mirror invariant on all six layouts") {
    for (const auto& terrain : study_terrains()) {
      for (double x : {-150.0, -120.0, -60.0, 0.0, 55.0, 60.0, 72.5, 120.0}) {
        for (double y : {-75.0, -60.0, -31.0, -12.0, 0.0, 12.0, 31.0, 60.0, 75.0}) {
          CHECK(height_at(terrain, x, y) == height_at(terrain, x, -y));
        }
      }
    }
  }
}

TEST_CASE("smoothed height matches the exact query away from rims") {
  const Terrain t = make_terrain(ObstacleSize::M, FootRegion::Forefoot);
  const Vec2 c = t.layout->obstacles[1].center;
  const double w = 2.0;

  CHECK(height_smooth(t, c.x(), c.y(), w).h == 22.0);
  CHECK(height_smooth(t, c.x() + 20.0, c.y(), w).h == 0.0);

  // C2 blend: monotone in radius across the rim band and mirror-invariant
  double prev = 23.0;
  for (double r = 10.0; r <= 15.0; r += 0.125) {
    const auto s = height_smooth(t, c.x() + r, c.y(), w);
    CHECK(s.h <= prev + 1e-12);
    prev = s.h;
    const auto sm = height_smooth(t, c.x() + r, -c.y(), w);
    CHECK(s.h == sm.h);
  }
}
