#pragma once

#include <cstdint>
#include <vector>

#include "nltraffic/fields.hpp"
#include "nltraffic/scenario.hpp"

namespace nltraffic {

/// A scalar sampled at every cell center plus at the outlet (head end) of
/// every edge.
struct PointValues {
  std::vector<double> cells;
  std::vector<double> outlet;

  static PointValues zeros(const Grid& grid) {
    return {std::vector<double>(grid.total_cells(), 0.0), std::vector<double>(grid.edges().size(), 0.0)};
  }
};

/// Effective speeds at one time level. Faces are stored n+1 per edge: face 0
/// is the inlet, face n the outlet.
struct VelocityField {
  std::vector<double> cells;
  std::vector<double> faces;
  std::vector<std::uint8_t> clamped;  // per cell: max{., 0} was active
  bool clamp_active = false;

  double face(const EdgeGrid& g, std::size_t i) const { return faces[g.offset + g.edge + i]; }
  double outlet(const EdgeGrid& g) const { return face(g, g.n_cells); }
  double max_speed() const;
};

/// Nonlocal interaction v_i[m](x) = sum_j alpha_kj * int k(d(x, y)) chi_{D(x) cap (e_k u e_j)}(y) dm(y),
/// discretized by the rectangle rule over cell centers. Stored as a sparse
/// kernel matrix K(x, y) so the reversed-kernel sums of the adjoint reuse it.
class InteractionOperator {
 public:
  InteractionOperator() = default;
  InteractionOperator(const Network& net, const Grid& grid, const KernelParams& kernel);

  bool empty() const { return !active_; }
  PointValues apply(const DensityField& m) const;
  /// (nu * phi)(x) = sum_y K(y, x) phi(y) dy over cells y with mask[y] == 0
  /// (all cells without a mask), plus sum_e K(L_e, x) outlet_phi[e] when
  /// outlet weights are given.
  std::vector<double> apply_reversed(std::span<const double> phi, std::span<const double> outlet_phi = {},
                                     const std::vector<std::uint8_t>* mask = nullptr) const;
  double kernel_at_zero() const { return k0_; }

 private:
  struct Entry {
    std::size_t col;
    double weight;  // alpha * k(d)
  };
  bool active_ = false;
  double k0_ = 0.0;
  std::vector<double> col_dx_;                  // dx of every cell
  std::vector<std::vector<Entry>> cell_rows_;   // per cell
  std::vector<std::vector<Entry>> outlet_rows_; // per edge
};

/// Ramp kernel H(x, V) = v_f(x) max{1 - d(x, V)/R, 0} of one lighted edge,
/// sampled at cells and faces.
struct LightRamp {
  EdgeId edge = 0;
  std::vector<double> cells;
  std::vector<double> faces;  // n+1 values
};

std::vector<LightRamp> light_ramps(const Scenario& scn, const Grid& grid, const LightGroup& light);

/// Per-edge signal values for every light group (1 = red), usually step averages.
using LightSignals = std::vector<std::vector<double>>;

/// v_i at cell centers and outlets.
PointValues interaction_velocity(const Network& net, const Grid& grid, const KernelParams& kernel,
                                 const DensityField& m);

/// v_e = u_j(t) H(x, V) on every lighted edge, zero elsewhere.
PointValues light_interaction_velocity(const Scenario& scn, const Grid& grid, const LightSignals& signals);

/// Free-flow speed sampled on the grid.
PointValues sample_free_flow(const Scenario& scn, const Grid& grid);

/// v = max{v_f - v_i - v_e, 0} cellwise; interior faces average adjacent cells,
/// outlets use the endpoint values.
VelocityField effective_velocity(const Grid& grid, const PointValues& free_flow, const PointValues& interaction,
                                 const PointValues& light);

/// Bundles the precomputed operators of a scenario.
class VelocityModel {
 public:
  VelocityModel(const Scenario& scn, const Grid& grid);

  /// `extra` is an additional slowdown (e.g. the fleet term) subtracted after
  /// the interaction and light terms.
  VelocityField evaluate(const DensityField& m, const LightSignals& signals, const PointValues* extra = nullptr) const;

  const InteractionOperator& interaction() const { return interaction_; }
  const PointValues& free_flow() const { return free_flow_; }
  const std::vector<std::vector<LightRamp>>& ramps() const { return ramps_; }

 private:
  Grid grid_;
  PointValues free_flow_;
  InteractionOperator interaction_;
  std::vector<std::vector<LightRamp>> ramps_;  // per light group, per lighted edge
};

}  // namespace nltraffic
