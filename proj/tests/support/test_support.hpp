#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nltraffic/adjoint.hpp"
#include "nltraffic/scenario.hpp"

namespace testsupport {

inline std::string scenario_path(const std::string& name) {
  return std::string(NLTRAFFIC_TEST_SCENARIOS) + "/" + name + ".ini";
}

inline nltraffic::Scenario load(const std::string& name) { return nltraffic::parse_scenario(scenario_path(name)); }

inline nltraffic::Scenario from_text(const std::string& text) { return nltraffic::parse_scenario_text(text, "test"); }

/// The 2-1 merge V1, V2 -> V0 -> V3 with unit edges and e3 terminal.
inline std::string merge_text(const std::string& extra, double horizon = 1.25, double dx = 0.01) {
  std::ostringstream s;
  s << "[network]\ne1 = V1 -> V0, 1.0\ne2 = V2 -> V0, 1.0\ne3 = V0 -> V3, 1.0, terminal\n"
    << "[grid]\nT = " << horizon << "\ndx = " << dx << "\n"
    << extra;
  return s.str();
}

/// Cumulative-mass L1 distance by brute-force midpoint quadrature of
/// |F_a - F_b| with 64 sample points per cell.
inline double cdf_distance(const std::vector<double>& a, const std::vector<double>& b, double dx) {
  constexpr int sub = 64;
  double ca = 0.0, cb = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < sub; ++k) {
      const double w = (k + 0.5) / sub * dx;
      acc += std::abs((ca + a[i] * w) - (cb + b[i] * w)) * dx / sub;
    }
    ca += a[i] * dx;
    cb += b[i] * dx;
  }
  return acc;
}

inline std::vector<double> edge_values(const nltraffic::DensityField& f, const nltraffic::EdgeGrid& g) {
  return {f.values.begin() + static_cast<long>(g.offset), f.values.begin() + static_cast<long>(g.offset + g.n_cells)};
}

inline double total_variation(const std::vector<double>& v) {
  double tv = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
  return tv;
}

/// Random acyclic network of at most `max_edges` edges in scenario text form,
/// with random blocks, a random two-piece matrix P and an optional kernel.
inline std::string random_network_text(std::mt19937_64& rng, int max_edges = 6) {
  std::uniform_int_distribution<int> n_vert(3, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int nv = n_vert(rng);
  struct E {
    int a, b;
    double len;
  };
  std::vector<E> edges;
  for (int v = 1; v < nv && static_cast<int>(edges.size()) < max_edges; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    edges.push_back({pick(rng), v, 0.5 + 0.1 * std::floor(10.0 * unit(rng))});
  }
  while (static_cast<int>(edges.size()) < max_edges && unit(rng) < 0.6) {
    std::uniform_int_distribution<int> pick(0, nv - 1);
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    edges.push_back({a, b, 0.5 + 0.1 * std::floor(10.0 * unit(rng))});
  }
  std::ostringstream s;
  s << "[network]\n";
  for (std::size_t i = 0; i < edges.size(); ++i)
    s << "r" << i << " = W" << edges[i].a << " -> W" << edges[i].b << ", " << edges[i].len << "\n";
  s << "[grid]\nT = 0.8\ndx = 0.02\n";
  s << "[velocity]\nvf = " << 0.5 + unit(rng) << "\n";
  if (unit(rng) < 0.5) s << "[kernel]\ntype = cucker_smale\nmu1 = 1\nmu2 = " << 5.0 * unit(rng) << "\nbeta = 1\nradius = 0.1\n";
  s << "[initial]\n";
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double a = 0.3 * unit(rng) * edges[i].len;
    const double b = a + 0.1 + 0.3 * unit(rng) * (edges[i].len - a - 0.1);
    s << "r" << i << " = [" << a << ", " << b << "] * " << 0.2 + unit(rng) << "\n";
  }
  s << "[matrixP]\nbreakpoints = 0.4\n";
  for (std::size_t i = 0; i < edges.size(); ++i) {
    std::vector<std::size_t> outs;
    for (std::size_t j = 0; j < edges.size(); ++j)
      if (edges[j].a == edges[i].b) outs.push_back(j);
    if (outs.empty()) continue;
    s << "r" << i << " = ";
    for (int piece = 0; piece < 2; ++piece) {
      std::vector<double> w(outs.size());
      for (auto& x : w) x = 0.1 + unit(rng);
      const double sum = std::accumulate(w.begin(), w.end(), 0.0);
      double used = 0.0;
      if (piece) s << " | ";
      for (std::size_t k = 0; k < outs.size(); ++k) {
        char buf[64];
        const double p = k + 1 == outs.size() ? 1.0 - used : w[k] / sum;
        used += p;
        std::snprintf(buf, sizeof buf, "%.17g", p);
        s << (k ? ", " : "") << "r" << outs[k] << ":" << buf;
      }
    }
    s << "\n";
  }
  return s.str();
}

}  // namespace testsupport
