#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nltraffic/adjoint.hpp"
#include "nltraffic/optimizer.hpp"

namespace nltraffic {

/// CSV file whose first line is "# schema: <columns>", followed by the column
/// header. Numbers use 12 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void close();

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::size_t width_ = 0;
};

std::string format_number(double x);

/// One snapshot of the field CSV, with lambda when the adjoint was solved.
struct FieldFrame {
  double t = 0.0;
  const DensityField* m = nullptr;
  const VelocityField* v = nullptr;
  const DensityField* lambda = nullptr;
};

/// Columns edge_id,t,x_center,m,v[,lambda]; one row per cell per frame.
void write_field_csv(const std::filesystem::path& path, const Grid& grid, const std::vector<FieldFrame>& frames,
                     bool with_lambda);
/// Columns tau,J,vbar.
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep);
/// Columns iter,J,s_1..s_S,beta.
void write_descent_csv(const std::filesystem::path& path, const DescentReport& report, std::size_t n_durations);
/// Columns component,analytic,finite_diff,rel_err.
void write_gradcheck_csv(const std::filesystem::path& path, const std::vector<GradcheckRow>& rows);

/// Provenance record of one CLI run, written as JSON.
struct RunManifest {
  std::string command;
  std::string scenario;
  std::map<std::string, std::string> config;  // every option, defaults included
  std::uint64_t seed = 0;
  std::string version;
  std::string timestamp;
  std::vector<std::string> outputs;
  std::string status = "running";
  std::string error_kind;
  std::string error_message;

  std::string to_json() const;
  void write(const std::filesystem::path& path) const;
};

const char* library_version();

}  // namespace nltraffic
