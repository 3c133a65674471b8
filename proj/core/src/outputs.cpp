#include "stefan/outputs.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace stefan {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError(path, "write failed");
}

double parse_double(std::string_view s, const fs::path& path) {
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError(path, "bad number '" + std::string(s) + "'");
  return v;
}

std::string step_name(const char* prefix, int step, const char* suffix) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%s%06d%s", prefix, step, suffix);
  return buf.data();
}

}  // namespace

IoError::IoError(const fs::path& path, const std::string& message)
    : Error(path.string() + ": " + message), path_(path) {}

std::string format_csv(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 40> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void write_interface_csv(const fs::path& path, double t, const std::vector<Segment>& segs) {
  auto out = open_out(path);
  out << "t,x0,y0,x1,y1\n";
  const std::string ts = format_csv(t);
  for (const Segment& s : segs)
    out << ts << ',' << format_csv(s.a.x) << ',' << format_csv(s.a.y) << ',' << format_csv(s.b.x) << ','
        << format_csv(s.b.y) << '\n';
  close_out(out, path);
}

void write_field_csv(const fs::path& path, const Grid& grid, const std::vector<double>& values) {
  const int n = grid.n();
  if (values.size() != grid.cell_count()) throw IoError(path, "field size does not match the grid");
  auto out = open_out(path);
  out << "# n=" << n << " origin=" << format_csv(grid.origin().x) << ',' << format_csv(grid.origin().y)
      << " dx=" << format_csv(grid.dx()) << '\n';
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i) out << ',';
      out << format_csv(values[grid.index(i, j)]);
    }
    out << '\n';
  }
  close_out(out, path);
}

FieldCsv read_field_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string header;
  std::getline(in, header);
  FieldCsv f;
  std::array<char, 64> ox{};
  std::array<char, 64> oy{};
  std::array<char, 64> dx{};
  if (std::sscanf(header.c_str(), "# n=%d origin=%63[^,],%63s dx=%63s", &f.n, ox.data(), oy.data(), dx.data()) != 4)
    throw IoError(path, "bad header");
  f.origin = {parse_double(ox.data(), path), parse_double(oy.data(), path)};
  f.dx = parse_double(dx.data(), path);
  f.values.reserve(static_cast<std::size_t>(f.n) * static_cast<std::size_t>(f.n));
  std::string line;
  while (std::getline(in, line)) {
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      f.values.push_back(parse_double(rest.substr(0, comma), path));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  if (f.values.size() != static_cast<std::size_t>(f.n) * static_cast<std::size_t>(f.n))
    throw IoError(path, "expected n*n values");
  return f;
}

void write_timeseries_csv(const fs::path& path, const std::vector<TimeseriesRow>& rows) {
  auto out = open_out(path);
  out << "step,t,dt,mean_radius,radius_stddev,tip_x,tip_x_velocity,max_kappa,volume_solid,interface_length,"
         "max_speed\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const TimeseriesRow& r = rows[k];
    double vtip = std::nan("");
    if (k > 0 && rows[k].t > rows[k - 1].t) vtip = (rows[k].tip_x - rows[k - 1].tip_x) / (rows[k].t - rows[k - 1].t);
    out << r.step << ',' << format_csv(r.t) << ',' << format_csv(r.dt) << ',' << format_csv(r.mean_radius) << ','
        << format_csv(r.radius_stddev) << ',' << format_csv(r.tip_x) << ',' << format_csv(vtip) << ','
        << format_csv(r.max_kappa) << ',' << format_csv(r.volume_solid) << ',' << format_csv(r.interface_length)
        << ',' << format_csv(r.max_speed) << '\n';
  }
  close_out(out, path);
}

void write_convergence_csv(const fs::path& path, const ErrorReport& report) {
  auto out = open_out(path);
  out << "grid,dt,L1,order,Linf,order\n";
  for (std::size_t k = 0; k < report.grids.size(); ++k) {
    const GridResult& g = report.grids[k];
    out << g.n << ',' << format_csv(g.dt) << ',' << format_csv(g.l1) << ','
        << (k ? format_csv(report.l1_order(k)) : std::string()) << ',' << format_csv(g.linf) << ','
        << (k ? format_csv(report.linf_order(k)) : std::string()) << '\n';
  }
  close_out(out, path);
}

void write_plot_script(const fs::path& path, const std::vector<std::string>& csv_files) {
  auto out = open_out(path);
  out << "# gnuplot " << path.filename().string() << "\n";
  out << "set datafile separator ','\nset datafile missing 'nan'\nset key autotitle columnhead\n";
  std::vector<std::string> interfaces;
  for (const std::string& f : csv_files) {
    if (f == "timeseries.csv") {
      out << "\nset terminal pngcairo size 900,600\nset output 'timeseries.png'\nset xlabel 't'\n"
             "plot 'timeseries.csv' using 2:4 with lines title 'mean radius', \\\n"
             "     'timeseries.csv' using 2:6 with lines title 'tip x'\n";
    } else if (f == "convergence.csv") {
      out << "\nset terminal pngcairo size 900,600\nset output 'convergence.png'\nset logscale xy\n"
             "set xlabel 'grid'\nplot 'convergence.csv' using 1:3 with linespoints title 'L1', \\\n"
             "     'convergence.csv' using 1:5 with linespoints title 'Linf'\nunset logscale\n";
    } else if (f.rfind("interface_", 0) == 0) {
      interfaces.push_back(f);
    }
  }
  if (!interfaces.empty()) {
    out << "\nset terminal pngcairo size 800,800\nset output 'interfaces.png'\nset size ratio -1\n"
           "unset key\nplot \\\n";
    for (std::size_t k = 0; k < interfaces.size(); ++k)
      out << "  '" << interfaces[k] << "' using 2:3:($4-$2):($5-$3) with vectors nohead lc " << (k % 8 + 1)
          << (k + 1 < interfaces.size() ? ", \\\n" : "\n");
  }
  close_out(out, path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  nlohmann::json j;
  j["config_path"] = m.config_path;
  j["config_hash"] = m.config_hash;
  j["code_version"] = m.code_version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["diagnostics"] = {
      {"steps", m.steps},
      {"t_final", m.t_final},
      {"runtime_s", m.runtime_s},
      {"extension_failures", m.extension_failures},
      {"saddles", m.saddles},
      {"stencils",
       {{"second", m.stencils.second},
        {"first_order", m.stencils.first_order},
        {"cell_center", m.stencils.cell_center},
        {"missing", m.stencils.missing}}},
      {"emerging_init",
       {{"quadratic", m.init.quadratic},
        {"grid_line", m.init.grid_line},
        {"linear", m.init.linear},
        {"gamma_only", m.init.gamma_only}}},
  };
  j["files"] = m.files;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  close_out(out, path);
}

OutputDirectory::OutputDirectory(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw IoError(dir_, "cannot create directory");
}

fs::path OutputDirectory::add(const std::string& name) {
  files_.push_back(name);
  return dir_ / name;
}

void OutputDirectory::snapshot(const Snapshot& s) {
  write_interface_csv(add(step_name("interface_", s.step, ".csv")), s.t, s.interface);
  for (const auto& [name, values] : s.fields)
    write_field_csv(add(step_name(("field_" + name + "_").c_str(), s.step, ".csv")), *s.grid, values);
}

SnapshotSink OutputDirectory::sink() {
  return [this](const Snapshot& s) { snapshot(s); };
}

void OutputDirectory::timeseries(const std::vector<TimeseriesRow>& rows) {
  write_timeseries_csv(add("timeseries.csv"), rows);
}

void OutputDirectory::convergence(const ErrorReport& report) { write_convergence_csv(add("convergence.csv"), report); }

void OutputDirectory::plot_script() {
  std::vector<std::string> csv;
  for (const std::string& f : files_)
    if (f.size() > 4 && f.compare(f.size() - 4, 4, ".csv") == 0) csv.push_back(f);
  write_plot_script(add("plot.gp"), csv);
}

void OutputDirectory::manifest(RunManifest m) {
  files_.push_back("manifest.json");
  m.files = files_;
  write_manifest(dir_ / "manifest.json", m);
}

}  // namespace stefan
