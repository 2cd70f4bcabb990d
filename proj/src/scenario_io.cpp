#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "nltraffic/errors.hpp"
#include "nltraffic/scenario.hpp"

namespace nltraffic {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

/// Parsed INI tree plus a (section, key) -> line index for error context.
class Document {
 public:
  Document(const std::string& text, std::string origin) : origin_(std::move(origin)) {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ValidationError(origin_ + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    std::istringstream lines(text);
    std::string line, section;
    for (int n = 1; std::getline(lines, line); ++n) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == ';' || t[0] == '#') continue;
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
        lines_[{section, ""}] = n;
      } else if (auto eq = t.find('='); eq != std::string::npos) {
        lines_[{section, trim(t.substr(0, eq))}] = n;
      }
    }
  }

  std::string where(const std::string& section, const std::string& key = "") const {
    std::string loc = origin_;
    if (auto it = lines_.find({section, key}); it != lines_.end()) loc += ":" + std::to_string(it->second);
    loc += ": [" + section + "]";
    if (!key.empty()) loc += " " + key;
    return loc;
  }

  const pt::ptree* section(const std::string& name) const {
    auto it = tree_.find(name);
    return it == tree_.not_found() ? nullptr : &it->second;
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    throw ValidationError(where(section, key) + ": " + msg);
  }

  double number(const std::string& section, const std::string& key, const std::string& text) const {
    const std::string t = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      fail(section, key, "expected a number, got '" + t + "'");
    return value;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key, const std::string& text) const {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& part : split(text, ',')) out.push_back(number(section, key, part));
    return out;
  }

  PiecewiseLinear profile(const std::string& section, const std::string& key, const std::string& text) const {
    PiecewiseLinear f;
    for (const auto& knot : split(text, ',')) {
      const auto kv = split(knot, ':');
      if (kv.size() != 2) fail(section, key, "expected knots 'x:value', got '" + knot + "'");
      f.x.push_back(number(section, key, kv[0]));
      f.y.push_back(number(section, key, kv[1]));
    }
    for (std::size_t i = 1; i < f.x.size(); ++i)
      if (!(f.x[i] > f.x[i - 1])) fail(section, key, "knots must increase");
    return f;
  }

 private:
  pt::ptree tree_;
  std::string origin_;
  std::map<std::pair<std::string, std::string>, int> lines_;
};

template <class Fn>
void for_each_key(const pt::ptree* sec, Fn&& fn) {
  if (!sec) return;
  for (const auto& [key, child] : *sec) fn(key, child.data());
}

std::optional<std::string> get(const pt::ptree* sec, const std::string& key) {
  if (!sec) return std::nullopt;
  auto it = sec->find(key);
  if (it == sec->not_found()) return std::nullopt;
  return it->second.get_value<std::string>();
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

DistributionRow parse_row(const Document& doc, const Network& net, const std::string& section,
                          const std::string& key, const std::string& text) {
  DistributionRow row;
  if (trim(text).empty()) return row;
  for (const auto& entry : split(text, ',')) {
    const auto kv = split(entry, ':');
    if (kv.size() != 2) doc.fail(section, key, "expected 'edge:fraction', got '" + entry + "'");
    auto target = net.find_edge(kv[0]);
    if (!target) doc.fail(section, key, "unknown edge '" + kv[0] + "'");
    row[*target] = doc.number(section, key, kv[1]);
  }
  return row;
}

/// Rows keyed `<prefix><edge>` with '|' separating the time pieces.
DistributionSchedule parse_distribution(const Document& doc, const Network& net, const pt::ptree* sec,
                                        const std::string& section, const std::string& prefix,
                                        double horizon) {
  DistributionSchedule sched = uniform_distribution(net, horizon);
  if (!sec) return sched;
  if (auto bp = get(sec, prefix + "breakpoints")) sched.breakpoints = doc.numbers(section, prefix + "breakpoints", *bp);
  const std::size_t n_pieces = sched.breakpoints.size() + 1;
  sched.pieces.assign(n_pieces, sched.pieces.front());
  for_each_key(sec, [&](const std::string& key, const std::string& value) {
    if (!starts_with(key, prefix) || key == prefix + "breakpoints") return;
    const std::string edge_name = key.substr(prefix.size());
    if (edge_name.find('.') != std::string::npos) return;
    auto from = net.find_edge(edge_name);
    if (!from) {
      if (prefix.empty()) doc.fail(section, key, "unknown edge '" + edge_name + "'");
      return;
    }
    const auto parts = split(value, '|');
    if (parts.size() != n_pieces)
      doc.fail(section, key, "expected " + std::to_string(n_pieces) + " '|'-separated rows");
    for (std::size_t p = 0; p < n_pieces; ++p) sched.pieces[p][*from] = parse_row(doc, net, section, key, parts[p]);
  });
  return sched;
}

std::vector<Block> parse_blocks(const Document& doc, const std::string& section, const std::string& key,
                                const std::string& text) {
  static const std::regex block_re(R"(^\[\s*([^,\]]+)\s*,\s*([^\]]+)\s*\]\s*(?:\*\s*(\S+))?$)");
  std::vector<Block> blocks;
  if (trim(text).empty()) return blocks;
  // Exponent signs ("1e+3") also contain '+': glue pieces that do not open a block.
  std::vector<std::string> terms;
  for (auto& piece : split(text, '+')) {
    if (!terms.empty() && (piece.empty() || piece.front() != '['))
      terms.back() += "+" + piece;
    else
      terms.push_back(piece);
  }
  for (const auto& term : terms) {
    std::smatch m;
    if (!std::regex_match(term, m, block_re)) doc.fail(section, key, "expected '[a, b]' or '[a, b]*h', got '" + term + "'");
    Block b;
    b.begin = doc.number(section, key, m[1].str());
    b.end = doc.number(section, key, m[2].str());
    if (m[3].matched) b.height = doc.number(section, key, m[3].str());
    blocks.push_back(b);
  }
  return blocks;
}

void parse_initial(const Document& doc, const Network& net, const pt::ptree* sec, const std::string& section,
                   const std::string& prefix, InitialDensity& out) {
  for_each_key(sec, [&](const std::string& key, const std::string& value) {
    if (!starts_with(key, prefix)) return;
    std::string rest = key.substr(prefix.size());
    const bool table = starts_with(rest, "table.");
    if (table) rest = rest.substr(6);
    if (rest.find('.') != std::string::npos) return;
    auto e = net.find_edge(rest);
    if (!e) {
      if (prefix.empty()) doc.fail(section, key, "unknown edge '" + rest + "'");
      return;
    }
    if (table)
      out.tables[*e] = doc.numbers(section, key, value);
    else
      out.blocks[*e] = parse_blocks(doc, section, key, value);
  });
}

KernelParams parse_kernel(const Document& doc, const Network& net, const pt::ptree* sec, const std::string& section,
                          double dx, bool with_alpha) {
  KernelParams k;
  if (!sec) return k;
  const std::string type = get(sec, "type").value_or(sec->empty() ? "none" : "cucker_smale");
  if (type == "none" || type == "local") {
    k.kind = KernelKind::none;
  } else if (type == "cucker_smale") {
    k.kind = KernelKind::cucker_smale;
  } else if (type == "tabulated") {
    k.kind = KernelKind::tabulated;
  } else {
    doc.fail(section, "type", "unknown kernel type '" + type + "'");
  }
  if (auto v = get(sec, "mu1")) k.mu1 = doc.number(section, "mu1", *v);
  if (auto v = get(sec, "mu2")) k.mu2 = doc.number(section, "mu2", *v);
  if (auto v = get(sec, "beta")) k.beta = doc.number(section, "beta", *v);
  if (auto v = get(sec, "table")) k.table = doc.profile(section, "table", *v);
  if (auto v = get(sec, "radius")) k.radius = doc.number(section, "radius", *v);
  if (auto v = get(sec, "radius_cells")) {
    if (!(dx > 0.0)) doc.fail(section, "radius_cells", "needs a grid cell width");
    k.radius = doc.number(section, "radius_cells", *v) * dx;
  }
  if (with_alpha)
    for_each_key(sec, [&](const std::string& key, const std::string& value) {
      if (!starts_with(key, "alpha.")) return;
      auto from = net.find_edge(key.substr(6));
      if (!from) doc.fail(section, key, "unknown edge");
      k.alpha[*from] = parse_row(doc, net, section, key, value);
    });
  return k;
}

Limiter parse_limiter(const Document& doc, const std::string& text) {
  if (text == "superbee") return Limiter::superbee;
  if (text == "minmod") return Limiter::minmod;
  if (text == "none" || text == "upwind") return Limiter::none;
  doc.fail("grid", "limiter", "unknown limiter '" + text + "'");
}

Scenario build(const Document& doc) {
  Scenario scn;
  if (auto meta = doc.section("meta")) scn.name = get(meta, "name").value_or("");

  const auto* net_sec = doc.section("network");
  if (!net_sec || net_sec->empty()) doc.fail("network", "", "section is missing or empty");
  std::vector<EdgeSpec> specs;
  static const std::regex edge_re(R"(^(\S+)\s*->\s*(\S+)\s*,\s*([^,]+?)\s*(?:,\s*(terminal))?$)");
  for_each_key(net_sec, [&](const std::string& key, const std::string& value) {
    std::smatch m;
    const std::string v = trim(value);
    if (!std::regex_match(v, m, edge_re)) doc.fail("network", key, "expected 'tail -> head, length[, terminal]'");
    specs.push_back({key, m[1].str(), m[2].str(), doc.number("network", key, m[3].str()), m[4].matched});
  });
  try {
    scn.network = build_network(specs);
  } catch (const ValidationError& e) {
    throw ValidationError(doc.where("network") + ": " + e.what());
  }
  const Network& net = scn.network;

  const auto* grid = doc.section("grid");
  if (!grid) doc.fail("grid", "", "section is missing");
  auto horizon = get(grid, "T");
  if (!horizon) doc.fail("grid", "T", "horizon is required");
  scn.horizon = doc.number("grid", "T", *horizon);
  if (auto v = get(grid, "dx")) scn.grid.dx = doc.number("grid", "dx", *v);
  if (auto v = get(grid, "cells")) scn.grid.cells_per_edge = static_cast<int>(doc.number("grid", "cells", *v));
  if (auto v = get(grid, "cfl")) scn.grid.cfl = doc.number("grid", "cfl", *v);
  if (auto v = get(grid, "limiter")) scn.grid.limiter = parse_limiter(doc, trim(*v));
  if (auto v = get(grid, "stride")) scn.grid.record_stride = static_cast<int>(doc.number("grid", "stride", *v));
  const double dx = scn.grid.dx > 0.0 ? scn.grid.dx
                    : scn.grid.cells_per_edge > 0 ? net.min_edge_length() / scn.grid.cells_per_edge
                                                  : 0.0;

  if (const auto* vel = doc.section("velocity")) {
    for_each_key(vel, [&](const std::string& key, const std::string& value) {
      if (key == "vf") {
        scn.default_free_flow = doc.number("velocity", key, value);
        return;
      }
      auto e = net.find_edge(key);
      if (!e) doc.fail("velocity", key, "unknown edge");
      scn.free_flow[*e] = value.find(':') == std::string::npos
                              ? PiecewiseLinear::constant(doc.number("velocity", key, value))
                              : doc.profile("velocity", key, value);
    });
  }

  scn.kernel = parse_kernel(doc, net, doc.section("kernel"), "kernel", dx, true);

  if (const auto* lights = doc.section("lights")) {
    LightGroup g;
    auto junction = get(lights, "junction");
    if (!junction) doc.fail("lights", "junction", "junction vertex is required");
    auto v = net.find_vertex(trim(*junction));
    if (!v) doc.fail("lights", "junction", "unknown vertex '" + trim(*junction) + "'");
    g.junction = *v;
    for (const auto& name : split(get(lights, "edges").value_or(""), ',')) {
      auto e = net.find_edge(name);
      if (!e) doc.fail("lights", "edges", "unknown edge '" + name + "'");
      g.edges.push_back(*e);
    }
    if (auto r = get(lights, "radius")) g.radius = doc.number("lights", "radius", *r);
    if (auto d = get(lights, "durations")) {
      SwitchSchedule s;
      s.durations = doc.numbers("lights", "durations", *d);
      if (auto u0 = get(lights, "u0")) s.u0 = static_cast<int>(doc.number("lights", "u0", *u0));
      if (auto tg = get(lights, "T_G")) s.t_green = doc.number("lights", "T_G", *tg);
      if (auto tr = get(lights, "T_R")) s.t_red = doc.number("lights", "T_R", *tr);
      g.schedule = s;
    }
    if (auto f = get(lights, "fixed")) {
      for (double x : doc.numbers("lights", "fixed", *f)) g.fixed.push_back(static_cast<int>(x));
      if (g.fixed.size() == 1 && g.edges.size() > 1) g.fixed.assign(g.edges.size(), g.fixed.front());
    }
    scn.lights.push_back(std::move(g));
  }

  parse_initial(doc, net, doc.section("initial"), "initial", "", scn.initial);
  scn.matrix_p = parse_distribution(doc, net, doc.section("matrixP"), "matrixP", "", scn.horizon);

  if (const auto* inflow = doc.section("inflow")) {
    for_each_key(inflow, [&](const std::string& key, const std::string& value) {
      auto v = net.find_vertex(key);
      if (!v) doc.fail("inflow", key, "unknown vertex");
      InflowSchedule::Source s;
      s.vertex = *v;
      if (value.find(':') == std::string::npos) {
        s.times = {0.0};
        s.rates = {doc.number("inflow", key, value)};
      } else {
        auto f = doc.profile("inflow", key, value);
        s.times = f.x;
        s.rates = f.y;
      }
      scn.inflow.sources.push_back(std::move(s));
    });
  }

  if (const auto* fleet = doc.section("fleet")) {
    FleetConfig f;
    parse_initial(doc, net, fleet, "fleet", "initial.", f.initial);
    f.q = parse_distribution(doc, net, fleet, "fleet", "Q.", scn.horizon);
    f.kernel = parse_kernel(doc, net, fleet, "fleet", dx, false);
    if (!get(fleet, "type")) f.kernel.kind = KernelKind::none;
    f.kernel.alpha = scn.kernel.alpha;
    if (auto v = get(fleet, "control")) f.control_default = doc.number("fleet", "control", *v);
    if (auto v = get(fleet, "control_time")) f.control_time = doc.profile("fleet", "control_time", *v);
    if (auto v = get(fleet, "lipschitz")) f.lipschitz = doc.number("fleet", "lipschitz", *v);
    for_each_key(fleet, [&](const std::string& key, const std::string& value) {
      if (!starts_with(key, "control.")) return;
      auto e = net.find_edge(key.substr(8));
      if (!e) doc.fail("fleet", key, "unknown edge");
      f.control_space[*e] = doc.profile("fleet", key, value);
    });
    scn.fleet = std::move(f);
  }

  if (const auto* fb = doc.section("feedback")) {
    FeedbackRegion region;
    if (auto w = get(fb, "weight")) region.weight = doc.number("feedback", "weight", *w);
    for (const auto& seg : split(get(fb, "segments").value_or(""), ',')) {
      const auto parts = split(seg, ':');
      if (parts.size() != 3) doc.fail("feedback", "segments", "expected 'edge:begin:end'");
      auto e = net.find_edge(parts[0]);
      if (!e) doc.fail("feedback", "segments", "unknown edge '" + parts[0] + "'");
      region.segments.push_back({*e, doc.number("feedback", "segments", parts[1]),
                                 doc.number("feedback", "segments", parts[2])});
    }
    scn.feedback = std::move(region);
  }
  return scn;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_numbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + num(values[i]);
  return out;
}

std::string profile_text(const PiecewiseLinear& f) {
  std::string out;
  for (std::size_t i = 0; i < f.x.size(); ++i) out += (i ? ", " : "") + num(f.x[i]) + ":" + num(f.y[i]);
  return out;
}

std::string row_text(const Network& net, const DistributionRow& row) {
  std::string out;
  for (const auto& [to, p] : row) out += (out.empty() ? "" : ", ") + net.edge(to).name + ":" + num(p);
  return out;
}

void write_distribution(std::ostringstream& out, const Network& net, const DistributionSchedule& s,
                        const std::string& prefix) {
  if (!s.breakpoints.empty()) out << prefix << "breakpoints = " << join_numbers(s.breakpoints) << "\n";
  for (const auto& e : net.edges()) {
    if (net.classify(e.head) != VertexClass::junction) continue;
    out << prefix << e.name << " = ";
    for (std::size_t p = 0; p < s.pieces.size(); ++p) out << (p ? " | " : "") << row_text(net, s.pieces[p][e.id]);
    out << "\n";
  }
}

void write_initial(std::ostringstream& out, const Network& net, const InitialDensity& init, const std::string& prefix) {
  for (const auto& [e, blocks] : init.blocks) {
    if (blocks.empty()) continue;
    out << prefix << net.edge(e).name << " = ";
    for (std::size_t i = 0; i < blocks.size(); ++i)
      out << (i ? " + " : "") << "[" << num(blocks[i].begin) << ", " << num(blocks[i].end) << "]*"
          << num(blocks[i].height);
    out << "\n";
  }
  for (const auto& [e, table] : init.tables)
    out << prefix << "table." << net.edge(e).name << " = " << join_numbers(table) << "\n";
}

void write_kernel(std::ostringstream& out, const KernelParams& k) {
  switch (k.kind) {
    case KernelKind::none:
      out << "type = none\n";
      return;
    case KernelKind::cucker_smale:
      out << "type = cucker_smale\nmu1 = " << num(k.mu1) << "\nmu2 = " << num(k.mu2) << "\nbeta = " << num(k.beta)
          << "\n";
      break;
    case KernelKind::tabulated:
      out << "type = tabulated\ntable = " << profile_text(k.table) << "\n";
      break;
  }
  out << "radius = " << num(k.radius) << "\n";
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
  Document doc(text, origin);
  Scenario scn = build(doc);
  try {
    validate(scn);
  } catch (const Error& e) {
    // Attach the file name; the message already names the section.
    if (dynamic_cast<const ConstraintError*>(&e)) throw ConstraintError(origin + ": " + e.what());
    throw ValidationError(origin + ": " + e.what());
  }
  return scn;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scenario file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  Scenario scn = parse_scenario_text(text.str(), path.string());
  if (scn.name.empty()) scn.name = path.stem().string();
  return scn;
}

std::string write_scenario(const Scenario& scn) {
  const Network& net = scn.network;
  std::ostringstream out;
  if (!scn.name.empty()) out << "[meta]\nname = " << scn.name << "\n\n";

  out << "[network]\n";
  for (const auto& e : net.edges())
    out << e.name << " = " << net.vertex_name(e.tail) << " -> " << net.vertex_name(e.head) << ", " << num(e.length)
        << (e.terminal ? ", terminal" : "") << "\n";

  out << "\n[grid]\nT = " << num(scn.horizon) << "\n";
  if (scn.grid.dx > 0.0) out << "dx = " << num(scn.grid.dx) << "\n";
  if (scn.grid.cells_per_edge > 0) out << "cells = " << scn.grid.cells_per_edge << "\n";
  out << "cfl = " << num(scn.grid.cfl) << "\nlimiter = "
      << (scn.grid.limiter == Limiter::superbee ? "superbee" : scn.grid.limiter == Limiter::minmod ? "minmod" : "none")
      << "\nstride = " << scn.grid.record_stride << "\n";

  out << "\n[velocity]\nvf = " << num(scn.default_free_flow) << "\n";
  for (const auto& [e, f] : scn.free_flow) out << net.edge(e).name << " = " << profile_text(f) << "\n";

  out << "\n[kernel]\n";
  write_kernel(out, scn.kernel);
  for (const auto& [from, row] : scn.kernel.alpha) out << "alpha." << net.edge(from).name << " = " << row_text(net, row) << "\n";

  for (const auto& g : scn.lights) {
    out << "\n[lights]\njunction = " << net.vertex_name(g.junction) << "\nedges = ";
    for (std::size_t i = 0; i < g.edges.size(); ++i) out << (i ? ", " : "") << net.edge(g.edges[i]).name;
    out << "\nradius = " << num(g.radius) << "\n";
    if (g.schedule) {
      out << "u0 = " << g.schedule->u0 << "\ndurations = " << join_numbers(g.schedule->durations) << "\n";
      if (g.schedule->t_green != 0.0 || g.schedule->t_red != 0.0)
        out << "T_G = " << num(g.schedule->t_green) << "\nT_R = " << num(g.schedule->t_red) << "\n";
    }
    if (!g.fixed.empty()) {
      out << "fixed = ";
      for (std::size_t i = 0; i < g.fixed.size(); ++i) out << (i ? ", " : "") << g.fixed[i];
      out << "\n";
    }
    break;  // the file format carries a single light group
  }

  out << "\n[initial]\n";
  write_initial(out, net, scn.initial, "");

  out << "\n[matrixP]\n";
  write_distribution(out, net, scn.matrix_p, "");

  if (!scn.inflow.sources.empty()) {
    out << "\n[inflow]\n";
    for (const auto& s : scn.inflow.sources) {
      out << net.vertex_name(s.vertex) << " = ";
      for (std::size_t i = 0; i < s.times.size(); ++i) out << (i ? ", " : "") << num(s.times[i]) << ":" << num(s.rates[i]);
      out << "\n";
    }
  }

  if (scn.fleet) {
    const FleetConfig& f = *scn.fleet;
    out << "\n[fleet]\n";
    write_kernel(out, f.kernel);
    write_initial(out, net, f.initial, "initial.");
    write_distribution(out, net, f.q, "Q.");
    out << "control = " << num(f.control_default) << "\ncontrol_time = " << profile_text(f.control_time)
        << "\nlipschitz = " << num(f.lipschitz) << "\n";
    for (const auto& [e, prof] : f.control_space) out << "control." << net.edge(e).name << " = " << profile_text(prof) << "\n";
  }

  if (scn.feedback) {
    out << "\n[feedback]\nweight = " << num(scn.feedback->weight) << "\nsegments = ";
    for (std::size_t i = 0; i < scn.feedback->segments.size(); ++i) {
      const auto& s = scn.feedback->segments[i];
      out << (i ? ", " : "") << net.edge(s.edge).name << ":" << num(s.begin) << ":" << num(s.end);
    }
    out << "\n";
  }
  return out.str();
}

std::filesystem::path resolve_scenario_path(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::exists(arg)) return arg;
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("NLTRAFFIC_SCENARIO_DIR")) dirs.emplace_back(env);
#ifdef NLTRAFFIC_SCENARIO_DIR
  dirs.emplace_back(NLTRAFFIC_SCENARIO_DIR);
#endif
  for (const auto& dir : dirs) {
    for (const auto& candidate : {dir / arg, dir / (arg + ".ini")})
      if (fs::exists(candidate)) return candidate;
  }
  throw IoError("scenario '" + arg + "' not found (neither a file nor a bundled scenario)");
}

}  // namespace nltraffic
