#include "nltraffic/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nltraffic/errors.hpp"

namespace nltraffic {

Grid::Grid(std::vector<EdgeGrid> edges) : edges_(std::move(edges)) {
  min_dx_ = edges_.empty() ? 0.0 : edges_.front().dx;
  for (auto& g : edges_) {
    g.offset = total_;
    total_ += g.n_cells;
    min_dx_ = std::min(min_dx_, g.dx);
  }
}

Grid Grid::uniform(const Network& net, double dx) {
  if (!(dx > 0.0)) throw ValidationError("grid: dx must be positive");
  std::vector<EdgeGrid> grids;
  for (const auto& e : net.edges()) {
    const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(e.length / dx)));
    grids.push_back({e.id, n, e.length / static_cast<double>(n), e.length, 0});
  }
  return Grid(std::move(grids));
}

Grid Grid::with_cells(const Network& net, std::size_t cells_per_edge) {
  if (cells_per_edge < 2) throw ValidationError("grid: need at least two cells per edge");
  std::vector<EdgeGrid> grids;
  for (const auto& e : net.edges())
    grids.push_back({e.id, cells_per_edge, e.length / static_cast<double>(cells_per_edge), e.length, 0});
  return Grid(std::move(grids));
}

Grid Grid::for_scenario(const Scenario& scn) {
  if (scn.grid.dx > 0.0) return uniform(scn.network, scn.grid.dx);
  return with_cells(scn.network, static_cast<std::size_t>(scn.grid.cells_per_edge));
}

bool Grid::operator==(const Grid& other) const {
  if (edges_.size() != other.edges_.size()) return false;
  for (std::size_t i = 0; i < edges_.size(); ++i)
    if (edges_[i].n_cells != other.edges_[i].n_cells || edges_[i].dx != other.edges_[i].dx) return false;
  return true;
}

double DensityField::edge_mass(const EdgeGrid& g) const {
  const auto cells = on(g);
  return std::accumulate(cells.begin(), cells.end(), 0.0) * g.dx;
}

double DensityField::mass(const Grid& grid) const {
  if (values.size() != grid.total_cells()) throw ShapeError("density field does not match the grid");
  double m = 0.0;
  for (const auto& g : grid.edges()) m += edge_mass(g);
  return m;
}

DensityField discretize_density(const InitialDensity& spec, const Grid& grid) {
  DensityField field = DensityField::zeros(grid);
  for (const auto& [e, blocks] : spec.blocks) {
    if (e >= grid.edges().size()) throw ValidationError("initial density: unknown edge");
    const EdgeGrid& g = grid.edge(e);
    auto cells = field.on(g);
    for (const auto& b : blocks) {
      if (!(b.begin >= 0.0 && b.end <= g.length && b.begin <= b.end))
        throw ValidationError("initial density: block outside edge " + std::to_string(e));
      const auto first = static_cast<std::size_t>(std::floor(b.begin / g.dx));
      for (std::size_t i = std::min(first, g.n_cells - 1); i < g.n_cells; ++i) {
        const double lo = std::max(b.begin, g.face(i));
        const double hi = std::min(b.end, g.face(i + 1));
        if (g.face(i) >= b.end) break;
        if (hi > lo) cells[i] += b.height * (hi - lo) / g.dx;
      }
    }
  }
  for (const auto& [e, table] : spec.tables) {
    const EdgeGrid& g = grid.edge(e);
    if (table.size() != g.n_cells)
      throw ShapeError("initial density: table for edge " + std::to_string(e) + " has " +
                       std::to_string(table.size()) + " values, grid has " + std::to_string(g.n_cells));
    std::copy(table.begin(), table.end(), field.on(g).begin());
  }
  return field;
}

double integrate_space_time(const Grid& grid, std::span<const double> times,
                            std::span<const DensityField> integrand) {
  if (times.size() < 2) return 0.0;
  const std::size_t steps = times.size() - 1;
  if (integrand.size() != steps && integrand.size() != times.size())
    throw ShapeError("space-time integral: integrand has " + std::to_string(integrand.size()) +
                     " snapshots for " + std::to_string(steps) + " steps");
  double total = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double dt = times[n + 1] - times[n];
    total += integrand[n].mass(grid) * dt;
  }
  return total;
}

double edge_cdf_distance(std::span<const double> a, std::span<const double> b, double dx) {
  if (a.size() != b.size()) throw ShapeError("cdf distance: grid mismatch");
  // Cumulative profiles are piecewise linear inside each cell, so |F_a - F_b|
  // integrates exactly cell by cell.
  double diff_left = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff_right = diff_left + (a[i] - b[i]) * dx;
    const double l = std::abs(diff_left);
    const double r = std::abs(diff_right);
    if ((diff_left >= 0.0) == (diff_right >= 0.0) || l + r == 0.0)
      total += 0.5 * (l + r) * dx;
    else
      total += 0.5 * (l * l + r * r) / (l + r) * dx;
    diff_left = diff_right;
  }
  return total;
}

double edge_cdf_distance(const DensityField& a, const DensityField& b, const EdgeGrid& g) {
  if (a.values.size() != b.values.size()) throw ShapeError("cdf distance: grid mismatch");
  return edge_cdf_distance(a.on(g), b.on(g), g.dx);
}

DensityField interpolate_in_time(const SpaceTimeField& traj, double t) {
  if (traj.snapshots.empty() || traj.snapshots.size() != traj.times.size())
    throw SolverError("interpolation needs the full forward history");
  if (t <= traj.times.front()) return traj.snapshots.front();
  if (t >= traj.times.back()) return traj.snapshots.back();
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - traj.times.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - traj.times[lo]) / (traj.times[hi] - traj.times[lo]);
  DensityField out = traj.snapshots[lo];
  const auto& next = traj.snapshots[hi].values;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = (1.0 - w) * out.values[i] + w * next[i];
  return out;
}

}  // namespace nltraffic
