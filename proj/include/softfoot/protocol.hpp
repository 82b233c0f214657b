#pragma once

// Trial orchestration and footprint-stability statistics.
//
// One sweep loads one foot on one terrain at all 91 grid holes. Trials are
// deterministic and independent, so sweeps parallelize over grid points with
// results written to indexed slots; the outcome does not depend on the
// schedule.

#include "softfoot/statics_solver.hpp"
#include "softfoot/terrain.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

namespace softfoot {

struct TrialParams {
  double load_mass_kg = 2.0;  // added mass; target force = (m_load + m_foot) g
  int ramp_steps = 20;
  SolverSettings solver;

  double target_force(const FootAssembly& foot) const {
    return (load_mass_kg + foot.total_mass_kg) * kGravity;
  }
};

struct StepRow {
  double total_vertical_n = 0.0;
  double displacement_mm = 0.0;
  double rot_x_deg = 0.0, rot_y_deg = 0.0, rot_z_deg = 0.0;
  int contact_count = 0;
  bool converged = false;
};

struct TrialOutcome {
  int grid_index = -1;
  Vec2 point = Vec2::Zero();
  Stability stability = Stability::Unstable;
  InstabilityMode mode = InstabilityMode::Diverged;
  double final_force_n = 0.0;      // last converged total vertical force
  double max_displacement_mm = 0.0;
  double max_rotation_deg = 0.0;
  StepRow settle;
  std::vector<StepRow> steps;
  bool cone_violation = false;
  std::string error;  // internal failure, distinct from an unstable outcome

  bool stable() const { return stability == Stability::Stable && error.empty(); }
};

inline StepRow make_step_row(double force, double disp, const Vec3& rot_deg,
                             const EquilibriumResult& eq) {
  StepRow row;
  row.total_vertical_n = force;
  row.displacement_mm = disp;
  row.rot_x_deg = rot_deg.x();
  row.rot_y_deg = rot_deg.y();
  row.rot_z_deg = rot_deg.z();
  row.converged = eq.converged;
  for (const auto& c : eq.contacts) {
    if (c.normal_n > 1e-9) ++row.contact_count;
  }
  return row;
}

// Runs the four-phase trial at one grid point. Solver failures and internal
// errors surface as unstable outcomes with diagnostics; they never throw.
inline TrialOutcome run_trial(const FootAssembly& foot, const Terrain& terrain,
                              int grid_index, const Vec2& point,
                              const TrialParams& params) {
  TrialOutcome out;
  out.grid_index = grid_index;
  out.point = point;
  try {
    const double target = params.target_force(foot);
    RampTrace trace = ramp_load(foot, terrain, point, target, params.ramp_steps,
                                params.solver);
    out.cone_violation = trace.cone_violation;
    if (trace.settle.converged) {
      out.settle = make_step_row(trace.foot_weight_n, 0.0, Vec3::Zero(), trace.settle);
      out.final_force_n = trace.foot_weight_n;
    }
    for (const auto& st : trace.steps) {
      out.steps.push_back(
          make_step_row(st.total_vertical_n, st.displacement_mm, st.rotation_deg, st.eq));
      if (st.eq.converged) {
        out.final_force_n = st.total_vertical_n;
        out.max_displacement_mm = std::max(out.max_displacement_mm, st.displacement_mm);
        out.max_rotation_deg =
            std::max(out.max_rotation_deg, st.rotation_deg.cwiseAbs().maxCoeff());
      }
    }
    const Classification cls =
        detect_instability(trace, params.solver.displacement_threshold_mm,
                           params.solver.rotation_threshold_deg);
    out.stability = cls.stability;
    out.mode = cls.mode;
  } catch (const std::exception& e) {
    out.stability = Stability::Unstable;
    out.mode = InstabilityMode::Diverged;
    out.error = e.what();
  }
  return out;
}

// Re-derives the classification from the stored per-step rows under
// different thresholds. Solver failures stay unstable.
inline Stability reclassify(const TrialOutcome& out, double displacement_threshold_mm,
                            double rotation_threshold_deg) {
  if (!out.error.empty() || out.cone_violation) return Stability::Unstable;
  for (const auto& row : out.steps) {
    if (!row.converged) return Stability::Unstable;
    if (row.displacement_mm >= displacement_threshold_mm) return Stability::Unstable;
    const double r = std::max({std::abs(row.rot_x_deg), std::abs(row.rot_y_deg),
                               std::abs(row.rot_z_deg)});
    if (r >= rotation_threshold_deg) return Stability::Unstable;
  }
  if (out.steps.empty()) return Stability::Unstable;
  return Stability::Stable;
}

struct SweepResult {
  std::string foot_label;
  std::string terrain_id;
  bool stiff_springs = false;
  std::vector<Vec2> grid;
  std::vector<TrialOutcome> outcomes;  // one per grid point, index-aligned

  int stable_count() const {
    int n = 0;
    for (const auto& o : outcomes) n += o.stable() ? 1 : 0;
    return n;
  }
  bool any_internal_error() const {
    for (const auto& o : outcomes) {
      if (!o.error.empty()) return true;
    }
    return false;
  }
};

// All 91 trials of one foot on one terrain, parallel over grid points.
inline SweepResult run_sweep(const FootAssembly& foot, const Terrain& terrain,
                             const TrialParams& params, int jobs = 1) {
  SweepResult sweep;
  sweep.foot_label = foot.label;
  sweep.terrain_id = terrain.id;
  sweep.grid = grid_points(terrain.plate);
  sweep.outcomes.resize(sweep.grid.size());

  const int n = static_cast<int>(sweep.grid.size());
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) {
      sweep.outcomes[static_cast<size_t>(i)] =
          run_trial(foot, terrain, i, sweep.grid[static_cast<size_t>(i)], params);
    }
    return sweep;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      sweep.outcomes[static_cast<size_t>(i)] =
          run_trial(foot, terrain, i, sweep.grid[static_cast<size_t>(i)], params);
    }
  };
  std::vector<std::thread> threads;
  const int nt = std::min(jobs, n);
  threads.reserve(static_cast<size_t>(nt));
  for (int t = 0; t < nt; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return sweep;
}

struct StabilityStats {
  int n = 0;           // stable points
  int n_external = 0;  // stable points strictly outside the unloaded footprint
  double pct = 0.0;    // 100 * n / n_reference, raw ratio
  double pct_external = 0.0;  // 100 * n_external / n, raw ratio

  // table values round half away from zero, as printed
  long pct_rounded() const { return std::lround(pct); }
  long pct_external_rounded() const { return std::lround(pct_external); }
};

// n, n_E and the two percentages of the stability table. `external` means
// strictly outside the unloaded footprint rectangle; boundary points count
// as internal.
inline StabilityStats compute_stats(const SweepResult& sweep,
                                    const SweepResult& reference,
                                    const Rect& footprint) {
  if (sweep.terrain_id != reference.terrain_id) {
    throw std::invalid_argument("compute_stats: sweeps are on different terrains");
  }
  const int n_ref = reference.stable_count();
  if (n_ref <= 0) {
    throw std::invalid_argument("compute_stats: reference sweep has no stable points");
  }
  StabilityStats st;
  for (const auto& o : sweep.outcomes) {
    if (!o.stable()) continue;
    ++st.n;
    if (!footprint.contains(o.point.x(), o.point.y())) ++st.n_external;
  }
  st.pct = 100.0 * st.n / n_ref;
  st.pct_external = st.n > 0 ? 100.0 * st.n_external / st.n : 0.0;
  return st;
}

// Direct form used for table arithmetic checks.
inline StabilityStats stats_from_counts(int n, int n_external, int n_reference) {
  if (n_reference <= 0) throw std::invalid_argument("stats_from_counts: empty reference");
  StabilityStats st;
  st.n = n;
  st.n_external = n_external;
  st.pct = 100.0 * n / n_reference;
  st.pct_external = n > 0 ? 100.0 * n_external / n : 0.0;
  return st;
}

enum class ColorBucket { Red, Orange, Yellow, Green };

inline std::string_view color_bucket_name(ColorBucket b) {
  switch (b) {
    case ColorBucket::Red: return "red";
    case ColorBucket::Orange: return "orange";
    case ColorBucket::Yellow: return "yellow";
    case ColorBucket::Green: return "green";
  }
  return "?";
}

// Table cell color: red below 90, orange in [90, 110), yellow in [110, 130],
// green strictly above 130.
inline ColorBucket color_bucket(double pct) {
  if (pct < 0.0) throw std::invalid_argument("color_bucket: negative percentage");
  if (pct < 90.0) return ColorBucket::Red;
  if (pct < 110.0) return ColorBucket::Orange;
  if (pct <= 130.0) return ColorBucket::Yellow;
  return ColorBucket::Green;
}

// Arithmetic mean of stable counts across terrains, as in the table's last
// column.
inline double average_stable_count(const std::vector<int>& counts) {
  if (counts.empty()) return 0.0;
  double sum = 0.0;
  for (int c : counts) sum += c;
  return sum / static_cast<double>(counts.size());
}

}  // namespace softfoot
