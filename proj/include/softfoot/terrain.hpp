#pragma once

// Sensorized plate, load grid, and obstacle layouts.
//
// The plate carries a 13x7 grid of threaded holes used both as load
// application points and as obstacle mounts. Obstacles are flat-topped
// vertical cylinders screwed into grid holes. The exact height query is
// piecewise constant; the solver uses a rim-smoothed variant so contact
// energies stay C2 (the rubber cover rounds physical edges anyway).

#include "softfoot/geometry.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace softfoot {

struct Plate {
  double size_x = 400.0;
  double size_y = 200.0;
  int grid_nx = 13;
  int grid_ny = 7;
  double pitch_x = 30.0;
  double pitch_y = 30.0;
  double cover_thickness = 1.0;  // neoprene, cancels out of relative height

  int grid_count() const { return grid_nx * grid_ny; }
};

// The 91 hole centers, row-major (y rows outer, x within a row), centered on
// the plate and symmetric about both axes.
inline std::vector<Vec2> grid_points(const Plate& plate) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<size_t>(plate.grid_count()));
  const double x0 = -0.5 * (plate.grid_nx - 1) * plate.pitch_x;
  const double y0 = -0.5 * (plate.grid_ny - 1) * plate.pitch_y;
  for (int iy = 0; iy < plate.grid_ny; ++iy) {
    for (int ix = 0; ix < plate.grid_nx; ++ix) {
      pts.emplace_back(x0 + ix * plate.pitch_x, y0 + iy * plate.pitch_y);
    }
  }
  return pts;
}

struct Obstacle {
  Vec2 center = Vec2::Zero();
  double diameter = 25.0;
  double height = 22.0;
  double radius() const { return 0.5 * diameter; }
};

enum class ObstacleSize { S, M, L };
enum class FootRegion { Heel, Forefoot };

inline int obstacle_count(ObstacleSize s) {
  switch (s) {
    case ObstacleSize::S: return 1;
    case ObstacleSize::M: return 3;
    case ObstacleSize::L: return 5;
  }
  return 0;
}

inline std::string_view obstacle_size_name(ObstacleSize s) {
  switch (s) {
    case ObstacleSize::S: return "S";
    case ObstacleSize::M: return "M";
    case ObstacleSize::L: return "L";
  }
  return "?";
}

inline std::string_view region_name(FootRegion r) {
  return r == FootRegion::Heel ? "heel" : "forefoot";
}

struct ObstacleLayout {
  ObstacleSize size_class = ObstacleSize::S;
  FootRegion region = FootRegion::Heel;
  std::vector<Obstacle> obstacles;
};

// Grid columns carrying the obstacle rows. The heel row sits under the rear
// quarter of the default footprint, the forefoot row under the metatarsal
// band; both are grid holes and overridable.
inline constexpr double kHeelRowX = -120.0;
inline constexpr double kForefootRowX = 60.0;

// A transverse row of 1/3/5 obstacles centered on the longitudinal axis,
// one grid pitch apart, in the requested foot region.
inline ObstacleLayout build_layout(ObstacleSize size, FootRegion region,
                                   const Plate& plate,
                                   double heel_row_x = kHeelRowX,
                                   double fore_row_x = kForefootRowX) {
  ObstacleLayout layout{size, region, {}};
  const double row_x = region == FootRegion::Heel ? heel_row_x : fore_row_x;
  const int n = obstacle_count(size);
  const int half = n / 2;
  for (int i = -half; i <= half; ++i) {
    Obstacle ob;
    ob.center = Vec2(row_x, i * plate.pitch_y);
    layout.obstacles.push_back(ob);
  }
  return layout;
}

struct Terrain {
  std::string id = "flat";
  Plate plate;
  std::optional<ObstacleLayout> layout;
  double friction_mu = 0.8;
};

// Exact piecewise-constant height: obstacle top inside a disk, plate
// elsewhere. The 1 mm cover lies on both and cancels out.
inline double height_at(const Terrain& terrain, double x, double y) {
  if (std::abs(x) > 0.5 * terrain.plate.size_x || std::abs(y) > 0.5 * terrain.plate.size_y) {
    throw std::out_of_range("height_at: query outside the plate");
  }
  if (terrain.layout) {
    for (const auto& ob : terrain.layout->obstacles) {
      const double dx = x - ob.center.x();
      const double dy = y - ob.center.y();
      if (dx * dx + dy * dy <= ob.radius() * ob.radius()) return ob.height;
    }
  }
  return 0.0;
}

struct HeightSample {
  double h = 0.0;
  double hx = 0.0;  // d h / d x
  double hy = 0.0;  // d h / d y
};

// Rim-smoothed height for the contact model: C2 quintic blend over
// [radius - w, radius + w]. Out-of-plate queries clamp to the plate level so
// a toppling foot can leave the instrumented area without faulting.
inline HeightSample height_smooth(const Terrain& terrain, double x, double y,
                                  double rim_width) {
  HeightSample s;
  if (!terrain.layout) return s;
  for (const auto& ob : terrain.layout->obstacles) {
    const double dx = x - ob.center.x();
    const double dy = y - ob.center.y();
    const double r = std::sqrt(dx * dx + dy * dy);
    const double lo = ob.radius() - rim_width;
    const double hi = ob.radius() + rim_width;
    double h, dh_dr;
    if (r <= lo) {
      h = ob.height;
      dh_dr = 0.0;
    } else if (r >= hi) {
      continue;
    } else {
      const double t = (hi - r) / (hi - lo);
      h = ob.height * smoothstep5(t);
      dh_dr = -ob.height * smoothstep5_deriv(t) / (hi - lo);
    }
    if (h > s.h) {
      s.h = h;
      if (r > 1e-12) {
        s.hx = dh_dr * dx / r;
        s.hy = dh_dr * dy / r;
      } else {
        s.hx = s.hy = 0.0;
      }
    }
  }
  return s;
}

inline Terrain flat_terrain() { return Terrain{}; }

inline Terrain make_terrain(ObstacleSize size, FootRegion region,
                            const Plate& plate = Plate{}) {
  Terrain t;
  t.plate = plate;
  t.layout = build_layout(size, region, plate);
  t.id = std::string(region == FootRegion::Heel ? "heel_" : "fore_") +
         (size == ObstacleSize::S ? "s" : size == ObstacleSize::M ? "m" : "l");
  return t;
}

// The six obstacle terrains of the study, heel rows first.
inline std::vector<Terrain> study_terrains(const Plate& plate = Plate{}) {
  std::vector<Terrain> out;
  for (FootRegion region : {FootRegion::Heel, FootRegion::Forefoot}) {
    for (ObstacleSize size : {ObstacleSize::S, ObstacleSize::M, ObstacleSize::L}) {
      out.push_back(make_terrain(size, region, plate));
    }
  }
  return out;
}

// Terrain by id: "flat", "heel_s", "heel_m", "heel_l", "fore_s", "fore_m",
// "fore_l". Throws on unknown ids.
inline Terrain terrain_from_id(const std::string& id, const Plate& plate = Plate{}) {
  if (id == "flat") {
    Terrain t;
    t.plate = plate;
    return t;
  }
  FootRegion region;
  if (id.rfind("heel_", 0) == 0) {
    region = FootRegion::Heel;
  } else if (id.rfind("fore_", 0) == 0) {
    region = FootRegion::Forefoot;
  } else {
    throw std::invalid_argument("unknown terrain id: " + id);
  }
  const char size_ch = id.back();
  ObstacleSize size;
  switch (size_ch) {
    case 's': size = ObstacleSize::S; break;
    case 'm': size = ObstacleSize::M; break;
    case 'l': size = ObstacleSize::L; break;
    default: throw std::invalid_argument("unknown terrain id: " + id);
  }
  return make_terrain(size, region, plate);
}

}  // namespace softfoot
