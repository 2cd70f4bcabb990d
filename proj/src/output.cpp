#include "nltraffic/output.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "nltraffic/errors.hpp"

namespace nltraffic {

const char* library_version() { return NLTRAFFIC_VERSION; }

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : path_(path), width_(columns.size()) {
  file_ = std::fopen(path.string().c_str(), "w");
  if (!file_) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  std::string header;
  for (std::size_t i = 0; i < columns.size(); ++i) header += (i ? "," : "") + columns[i];
  std::fprintf(file_, "# schema: %s\n%s\n", header.c_str(), header.c_str());
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw ShapeError("csv row width does not match the schema of " + path_.string());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) std::fputc(',', file_);
    std::fputs(format_number(values[i]).c_str(), file_);
  }
  std::fputc('\n', file_);
}

void CsvWriter::close() {
  if (!file_) return;
  const bool failed = std::ferror(file_) != 0;
  const bool close_failed = std::fclose(file_) != 0;
  file_ = nullptr;
  if (failed || close_failed) throw IoError("write error on '" + path_.string() + "'");
}

void write_field_csv(const std::filesystem::path& path, const Grid& grid, const std::vector<FieldFrame>& frames,
                     bool with_lambda) {
  std::vector<std::string> cols{"edge_id", "t", "x_center", "m", "v"};
  if (with_lambda) cols.push_back("lambda");
  CsvWriter csv(path, cols);
  std::vector<double> row(cols.size());
  for (const auto& f : frames) {
    for (const auto& g : grid.edges()) {
      for (std::size_t i = 0; i < g.n_cells; ++i) {
        const std::size_t c = g.offset + i;
        row[0] = static_cast<double>(g.edge);
        row[1] = f.t;
        row[2] = g.center(i);
        row[3] = f.m->values[c];
        row[4] = f.v ? f.v->cells[c] : 0.0;
        if (with_lambda) row[5] = f.lambda ? f.lambda->values[c] : 0.0;
        csv.row(row);
      }
    }
  }
  csv.close();
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep) {
  CsvWriter csv(path, {"tau", "J", "vbar"});
  for (const auto& p : sweep.points) csv.row({p.tau, p.cost, p.mean_velocity});
  csv.close();
}

void write_descent_csv(const std::filesystem::path& path, const DescentReport& report, std::size_t n_durations) {
  std::vector<std::string> cols{"iter", "J"};
  for (std::size_t i = 1; i <= n_durations; ++i) cols.push_back("s_" + std::to_string(i));
  cols.push_back("beta");
  CsvWriter csv(path, cols);
  for (const auto& it : report.iterates) {
    std::vector<double> row{static_cast<double>(it.iter), it.cost};
    row.insert(row.end(), it.durations.begin(), it.durations.end());
    row.push_back(it.beta);
    csv.row(row);
  }
  csv.close();
}

void write_gradcheck_csv(const std::filesystem::path& path, const std::vector<GradcheckRow>& rows) {
  CsvWriter csv(path, {"component", "analytic", "finite_diff", "rel_err"});
  for (const auto& r : rows) csv.row({static_cast<double>(r.component), r.analytic, r.finite_diff, r.rel_err});
  csv.close();
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["scenario"] = scenario;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version;
  j["timestamp"] = timestamp;
  j["outputs"] = outputs;
  j["status"] = status;
  if (!error_kind.empty()) j["error"] = {{"kind", error_kind}, {"message", error_message}};
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << to_json();
  if (!out) throw IoError("write error on manifest '" + path.string() + "'");
}

}  // namespace nltraffic
