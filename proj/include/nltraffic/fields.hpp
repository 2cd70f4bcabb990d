#pragma once

#include <span>
#include <vector>

#include "nltraffic/network.hpp"
#include "nltraffic/scenario.hpp"

namespace nltraffic {

/// Uniform cell grid on one edge.
struct EdgeGrid {
  EdgeId edge = 0;
  std::size_t n_cells = 0;
  double dx = 0.0;
  double length = 0.0;
  std::size_t offset = 0;  // index of the first cell in flat storage

  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx; }
  double face(std::size_t i) const { return static_cast<double>(i) * dx; }
};

/// Cell grids of every edge, laid out back to back in flat storage.
class Grid {
 public:
  Grid() = default;
  /// One grid per edge with n = max(2, round(length / dx)) cells.
  static Grid uniform(const Network& net, double dx);
  static Grid with_cells(const Network& net, std::size_t cells_per_edge);
  static Grid for_scenario(const Scenario& scn);

  const std::vector<EdgeGrid>& edges() const { return edges_; }
  const EdgeGrid& edge(EdgeId e) const { return edges_.at(e); }
  std::size_t total_cells() const { return total_; }
  double min_dx() const { return min_dx_; }
  bool operator==(const Grid& other) const;

 private:
  explicit Grid(std::vector<EdgeGrid> edges);
  std::vector<EdgeGrid> edges_;
  std::size_t total_ = 0;
  double min_dx_ = 0.0;
};

/// Cell-averaged values (mass per unit length) of one snapshot in time.
struct DensityField {
  std::vector<double> values;

  static DensityField zeros(const Grid& grid) { return {std::vector<double>(grid.total_cells(), 0.0)}; }
  std::span<double> on(const EdgeGrid& g) { return {values.data() + g.offset, g.n_cells}; }
  std::span<const double> on(const EdgeGrid& g) const { return {values.data() + g.offset, g.n_cells}; }
  double mass(const Grid& grid) const;
  double edge_mass(const EdgeGrid& g) const;
};

/// Full forward history: one snapshot per time node plus the per-step
/// boundary fluxes and the head traces needed by the gradient formula.
struct SpaceTimeField {
  std::vector<double> times;             // t_0 = 0 < ... < t_N = T
  std::vector<DensityField> snapshots;   // one per time node
  std::vector<std::vector<double>> outflow;  // [step][edge] flux through the head
  std::vector<std::vector<double>> inflow;   // [step][edge] flux through the tail
  std::vector<std::vector<double>> head_trace;  // [node][edge] upwind boundary cell value

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  double dt(std::size_t n) const { return times[n + 1] - times[n]; }
};

/// Exact cell averages of a sum of indicator blocks (overlap-weighted); tabulated
/// profiles are copied as cell values.
DensityField discretize_density(const InitialDensity& spec, const Grid& grid);

/// Left-endpoint rectangle rule sum_n sum_cells f * dx * dt. `integrand` holds one
/// field per step (time nodes 0..N-1) or per node (the last one is ignored).
double integrate_space_time(const Grid& grid, std::span<const double> times,
                            std::span<const DensityField> integrand);

/// L1 distance between the cumulative mass profiles of two fields on one edge.
double edge_cdf_distance(std::span<const double> a, std::span<const double> b, double dx);
double edge_cdf_distance(const DensityField& a, const DensityField& b, const EdgeGrid& g);

/// Linear interpolation between the stored snapshots bracketing t.
DensityField interpolate_in_time(const SpaceTimeField& traj, double t);

}  // namespace nltraffic
