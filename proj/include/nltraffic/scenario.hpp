#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nltraffic/control.hpp"
#include "nltraffic/network.hpp"

namespace nltraffic {

/// Piecewise-linear function given by knots; constant outside the knot range.
struct PiecewiseLinear {
  std::vector<double> x;
  std::vector<double> y;

  static PiecewiseLinear constant(double value) { return {{0.0}, {value}}; }
  double operator()(double at) const;
  double max() const;
  double min() const;
};

/// Sparse row of a distribution matrix: target edge -> fraction.
using DistributionRow = std::map<EdgeId, double>;

/// Row-stochastic matrix over edge pairs, one row per edge whose head is a
/// junction. Piecewise constant in time.
struct DistributionSchedule {
  std::vector<double> breakpoints;  // interior switch times, increasing
  std::vector<std::vector<DistributionRow>> pieces;  // pieces[piece][edge]
  double horizon = 0.0;

  std::size_t piece_at(double t) const;
};

/// The active row of edge `edge` at time t (right-continuous). Empty for an
/// edge ending at a sink. Throws RangeError when t is outside [0, T].
DistributionRow distribution_row(const DistributionSchedule& sched, EdgeId edge, double t);

/// Default schedule where each junction splits evenly over its outgoing edges.
DistributionSchedule uniform_distribution(const Network& net, double horizon);

struct InflowSchedule {
  struct Source {
    VertexId vertex = 0;
    std::vector<double> times;  // start time of each piece, times[0] == 0
    std::vector<double> rates;  // mass per unit time, >= 0
  };
  std::vector<Source> sources;

  /// Mean rate entering at vertex v over [t0, t1].
  double average_rate(VertexId v, double t0, double t1) const;
  bool empty() const;
};

enum class KernelKind { none, cucker_smale, tabulated };

/// Interaction kernel k(r) = mu2 / (mu1 + r)^beta, or tabulated values.
struct KernelParams {
  KernelKind kind = KernelKind::none;
  double mu1 = 1.0;
  double mu2 = 0.0;
  double beta = 0.0;
  PiecewiseLinear table;
  double radius = 0.0;
  /// Route weights alpha_kj for edges ending at a junction. Missing rows mean
  /// an even split over the outgoing edges.
  std::map<EdgeId, DistributionRow> alpha;

  bool active() const { return kind != KernelKind::none; }
  double operator()(double r) const;
};

/// Traffic light at a junction acting on its incoming edges. With a schedule
/// the phases cycle through the lighted edges (for two edges this is the
/// binary u / 1-u pair); `fixed` holds constant per-edge values instead.
struct LightGroup {
  VertexId junction = 0;
  std::vector<EdgeId> edges;
  double radius = 0.0;
  std::optional<SwitchSchedule> schedule;
  std::vector<int> fixed;
};

struct Block {
  double begin = 0.0;
  double end = 0.0;
  double height = 1.0;
};

struct InitialDensity {
  std::map<EdgeId, std::vector<Block>> blocks;
  std::map<EdgeId, std::vector<double>> tables;  // cell values, overrides blocks
};

enum class Limiter { superbee, minmod, none };

struct GridSpec {
  double dx = 0.0;           // target cell width
  int cells_per_edge = 0;    // alternative to dx
  double cfl = 0.99;
  Limiter limiter = Limiter::superbee;
  int record_stride = 1;
};

struct FleetConfig {
  InitialDensity initial;
  DistributionSchedule q;
  KernelParams kernel;  // fleet-to-driver slowdown
  /// Control u(x, t) = ux_e(x) * ut(t), clipped to [0, 1].
  std::map<EdgeId, PiecewiseLinear> control_space;
  PiecewiseLinear control_time = PiecewiseLinear::constant(1.0);
  double control_default = 1.0;
  double lipschitz = 1e9;
};

struct FeedbackRegion {
  std::vector<Segment> segments;
  double weight = 1.0;
};

struct Scenario {
  std::string name;
  Network network;
  GridSpec grid;
  double horizon = 0.0;
  std::map<EdgeId, PiecewiseLinear> free_flow;  // missing edges use default_free_flow
  double default_free_flow = 1.0;
  KernelParams kernel;
  std::vector<LightGroup> lights;
  InitialDensity initial;
  DistributionSchedule matrix_p;
  InflowSchedule inflow;
  std::optional<FleetConfig> fleet;
  std::optional<FeedbackRegion> feedback;

  PiecewiseLinear free_flow_on(EdgeId e) const;
  double max_free_flow() const;
};

/// Checks every invariant eagerly; throws ValidationError / ConstraintError.
void validate(const Scenario& scn);

/// Parses the sectioned key/value scenario format documented in
/// docs/scenario_format.md.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<string>");

/// Serializes a scenario; reparsing the output reproduces every number bit for bit.
std::string write_scenario(const Scenario& scn);

/// Resolves a scenario argument: an existing path, or a bundled scenario name.
std::filesystem::path resolve_scenario_path(const std::string& arg);

}  // namespace nltraffic
