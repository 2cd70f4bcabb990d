#include "nltraffic/velocity.hpp"

#include <algorithm>
#include <cmath>

#include "nltraffic/errors.hpp"

namespace nltraffic {

namespace {

// Cell centers at exactly the radius count as inside the visual field.
constexpr double kRadiusSlack = 1e-9;

DistributionRow route_weights(const Network& net, const KernelParams& kernel, EdgeId from) {
  if (auto it = kernel.alpha.find(from); it != kernel.alpha.end()) return it->second;
  DistributionRow row;
  const auto& outs = net.outgoing(net.edge(from).head);
  for (EdgeId j : outs) row[j] = 1.0 / static_cast<double>(outs.size());
  return row;
}

}  // namespace

double VelocityField::max_speed() const {
  double v = 0.0;
  for (double f : faces) v = std::max(v, f);
  return v;
}

InteractionOperator::InteractionOperator(const Network& net, const Grid& grid, const KernelParams& kernel) {
  if (!kernel.active()) return;
  if (kernel.radius >= net.min_edge_length())
    throw ConstraintError("interaction radius must be smaller than the minimal edge length");
  active_ = true;
  k0_ = kernel(0.0);
  const double radius = kernel.radius;
  const double slack = kRadiusSlack * grid.min_dx();

  col_dx_.resize(grid.total_cells());
  for (const auto& g : grid.edges()) std::fill_n(col_dx_.begin() + static_cast<long>(g.offset), g.n_cells, g.dx);

  // Downstream cells of the next edges whose center lies within `reach` of the inlet.
  auto spill = [&](EdgeId from, double reach, std::vector<Entry>& row) {
    if (reach < 0.0) return;
    for (const auto& [to, alpha] : route_weights(net, kernel, from)) {
      if (alpha == 0.0) continue;
      const EdgeGrid& h = grid.edge(to);
      for (std::size_t j = 0; j < h.n_cells && h.center(j) <= reach + slack; ++j)
        row.push_back({h.offset + j, alpha * kernel(radius - reach + h.center(j))});
    }
  };

  cell_rows_.resize(grid.total_cells());
  outlet_rows_.resize(grid.edges().size());
  for (const auto& g : grid.edges()) {
    for (std::size_t i = 0; i < g.n_cells; ++i) {
      auto& row = cell_rows_[g.offset + i];
      const double x = g.center(i);
      for (std::size_t j = i; j < g.n_cells && g.center(j) - x <= radius + slack; ++j)
        row.push_back({g.offset + j, kernel(g.center(j) - x)});
      spill(g.edge, radius - (g.length - x), row);
    }
    spill(g.edge, radius, outlet_rows_[g.edge]);
  }
}

PointValues InteractionOperator::apply(const DensityField& m) const {
  PointValues out{std::vector<double>(cell_rows_.size(), 0.0), std::vector<double>(outlet_rows_.size(), 0.0)};
  if (!active_) return out;
  if (m.values.size() != cell_rows_.size()) throw ShapeError("interaction: field does not match the grid");
  auto dot = [&](const std::vector<Entry>& row) {
    double acc = 0.0;
    for (const auto& e : row) acc += e.weight * m.values[e.col] * col_dx_[e.col];
    return acc;
  };
  for (std::size_t i = 0; i < cell_rows_.size(); ++i) out.cells[i] = dot(cell_rows_[i]);
  for (std::size_t e = 0; e < outlet_rows_.size(); ++e) out.outlet[e] = dot(outlet_rows_[e]);
  return out;
}

std::vector<double> InteractionOperator::apply_reversed(std::span<const double> phi,
                                                        std::span<const double> outlet_phi,
                                                        const std::vector<std::uint8_t>* mask) const {
  std::vector<double> out(cell_rows_.size(), 0.0);
  if (!active_) return out;
  if (phi.size() != cell_rows_.size()) throw ShapeError("interaction: field does not match the grid");
  for (std::size_t y = 0; y < cell_rows_.size(); ++y) {
    if (mask && (*mask)[y]) continue;
    const double w = phi[y] * col_dx_[y];
    if (w == 0.0) continue;
    for (const auto& e : cell_rows_[y]) out[e.col] += e.weight * w;
  }
  for (std::size_t k = 0; k < outlet_phi.size() && k < outlet_rows_.size(); ++k) {
    if (outlet_phi[k] == 0.0) continue;
    for (const auto& e : outlet_rows_[k]) out[e.col] += e.weight * outlet_phi[k];
  }
  return out;
}

std::vector<LightRamp> light_ramps(const Scenario& scn, const Grid& grid, const LightGroup& light) {
  std::vector<LightRamp> ramps;
  for (EdgeId e : light.edges) {
    if (scn.network.edge(e).head != light.junction)
      throw ValidationError("light: edge '" + scn.network.edge(e).name + "' is not incident to its junction");
    const EdgeGrid& g = grid.edge(e);
    const auto vf = scn.free_flow_on(e);
    auto ramp = [&](double x) { return vf(x) * std::max(1.0 - (g.length - x) / light.radius, 0.0); };
    LightRamp r{e, std::vector<double>(g.n_cells), std::vector<double>(g.n_cells + 1)};
    for (std::size_t i = 0; i < g.n_cells; ++i) r.cells[i] = ramp(g.center(i));
    for (std::size_t i = 0; i <= g.n_cells; ++i) r.faces[i] = ramp(g.face(i));
    r.faces[g.n_cells] = ramp(g.length);
    ramps.push_back(std::move(r));
  }
  return ramps;
}

PointValues interaction_velocity(const Network& net, const Grid& grid, const KernelParams& kernel,
                                 const DensityField& m) {
  return InteractionOperator(net, grid, kernel).apply(m);
}

namespace {

void add_light_terms(const Grid& grid, const std::vector<std::vector<LightRamp>>& ramps, const LightSignals& signals,
                     PointValues& out) {
  if (signals.size() != ramps.size()) throw ShapeError("light signals: expected one entry per light group");
  for (std::size_t l = 0; l < ramps.size(); ++l) {
    if (signals[l].size() != ramps[l].size()) throw ShapeError("light signals: expected one value per lighted edge");
    for (std::size_t k = 0; k < ramps[l].size(); ++k) {
      const double u = signals[l][k];
      if (u == 0.0) continue;
      const auto& r = ramps[l][k];
      const EdgeGrid& g = grid.edge(r.edge);
      for (std::size_t i = 0; i < g.n_cells; ++i) out.cells[g.offset + i] += u * r.cells[i];
      out.outlet[r.edge] += u * r.faces.back();
    }
  }
}

}  // namespace

PointValues light_interaction_velocity(const Scenario& scn, const Grid& grid, const LightSignals& signals) {
  std::vector<std::vector<LightRamp>> ramps;
  for (const auto& light : scn.lights) ramps.push_back(light_ramps(scn, grid, light));
  PointValues out = PointValues::zeros(grid);
  add_light_terms(grid, ramps, signals, out);
  return out;
}

PointValues sample_free_flow(const Scenario& scn, const Grid& grid) {
  PointValues out = PointValues::zeros(grid);
  for (const auto& g : grid.edges()) {
    const auto vf = scn.free_flow_on(g.edge);
    for (std::size_t i = 0; i < g.n_cells; ++i) out.cells[g.offset + i] = vf(g.center(i));
    out.outlet[g.edge] = vf(g.length);
  }
  return out;
}

VelocityField effective_velocity(const Grid& grid, const PointValues& free_flow, const PointValues& interaction,
                                 const PointValues& light) {
  const std::size_t n = grid.total_cells();
  if (free_flow.cells.size() != n || interaction.cells.size() != n || light.cells.size() != n)
    throw ShapeError("effective velocity: inputs do not match the grid");
  VelocityField v;
  v.cells.resize(n);
  v.clamped.assign(n, 0);
  v.faces.resize(n + grid.edges().size());
  for (std::size_t i = 0; i < n; ++i) {
    if (free_flow.cells[i] < 0.0) throw ValidationError("effective velocity: negative free-flow speed");
    const double raw = free_flow.cells[i] - interaction.cells[i] - light.cells[i];
    v.cells[i] = std::max(raw, 0.0);
    if (raw < 0.0) {
      v.clamped[i] = 1;
      v.clamp_active = true;
    }
  }
  for (const auto& g : grid.edges()) {
    double* faces = v.faces.data() + g.offset + g.edge;
    const double* cells = v.cells.data() + g.offset;
    faces[0] = cells[0];
    for (std::size_t i = 1; i < g.n_cells; ++i) faces[i] = 0.5 * (cells[i - 1] + cells[i]);
    const double raw = free_flow.outlet[g.edge] - interaction.outlet[g.edge] - light.outlet[g.edge];
    faces[g.n_cells] = std::max(raw, 0.0);
  }
  return v;
}

VelocityModel::VelocityModel(const Scenario& scn, const Grid& grid)
    : grid_(grid),
      free_flow_(sample_free_flow(scn, grid)),
      interaction_(scn.network, grid, scn.kernel) {
  for (const auto& light : scn.lights) ramps_.push_back(light_ramps(scn, grid, light));
}

VelocityField VelocityModel::evaluate(const DensityField& m, const LightSignals& signals,
                                      const PointValues* extra) const {
  PointValues vi = interaction_.empty() ? PointValues::zeros(grid_) : interaction_.apply(m);
  PointValues ve = PointValues::zeros(grid_);
  add_light_terms(grid_, ramps_, signals, ve);
  if (extra) {
    for (std::size_t i = 0; i < ve.cells.size(); ++i) ve.cells[i] += extra->cells[i];
    for (std::size_t e = 0; e < ve.outlet.size(); ++e) ve.outlet[e] += extra->outlet[e];
  }
  return effective_velocity(grid_, free_flow_, vi, ve);
}

}  // namespace nltraffic
