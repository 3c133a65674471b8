#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stefan/harness.hpp"

namespace stefan {

/// A file could not be written or read.
class IoError : public Error {
 public:
  IoError(const std::filesystem::path& path, const std::string& message);
  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// 17 significant digits; "nan" for NaN.
[[nodiscard]] std::string format_csv(double v);

/// One segment per line: t,x0,y0,x1,y1.
void write_interface_csv(const std::filesystem::path& path, double t, const std::vector<Segment>& segs);

/// `# n=<n> origin=<x>,<y> dx=<dx>` then one grid row per line (j outer,
/// i inner), covered cells as nan.
void write_field_csv(const std::filesystem::path& path, const Grid& grid, const std::vector<double>& values);

struct FieldCsv {
  int n = 0;
  Vec2 origin;
  double dx = 0.0;
  std::vector<double> values;
};
[[nodiscard]] FieldCsv read_field_csv(const std::filesystem::path& path);

void write_timeseries_csv(const std::filesystem::path& path, const std::vector<TimeseriesRow>& rows);

/// grid,dt,L1,order,Linf,order; the first row's orders are empty.
void write_convergence_csv(const std::filesystem::path& path, const ErrorReport& report);

/// Gnuplot script over the CSV files named in `csv_files` (relative to the
/// script's directory).
void write_plot_script(const std::filesystem::path& path, const std::vector<std::string>& csv_files);

struct RunManifest {
  std::string config_path;
  std::string config_hash;
  std::string code_version;
  std::string started;  // ISO-8601 UTC
  std::string finished;
  int steps = 0;
  double t_final = 0.0;
  double runtime_s = 0.0;
  int extension_failures = 0;
  int saddles = 0;
  StencilCounters stencils;
  InitCounters init;
  std::vector<std::string> files;  // relative to the manifest directory
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
[[nodiscard]] std::string utc_timestamp();

/// Writes snapshots of a run into one directory and keeps the list of files.
class OutputDirectory {
 public:
  explicit OutputDirectory(std::filesystem::path dir);

  [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }
  [[nodiscard]] const std::vector<std::string>& files() const noexcept { return files_; }

  void snapshot(const Snapshot& s);
  [[nodiscard]] SnapshotSink sink();

  void timeseries(const std::vector<TimeseriesRow>& rows);
  void convergence(const ErrorReport& report);
  /// Plot script over every CSV written so far.
  void plot_script();
  void manifest(RunManifest m);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;

  std::filesystem::path add(const std::string& name);
};

}  // namespace stefan
