// stefan_cut: run, sweep and verify front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "stefan/acceptance.hpp"
#include "stefan/config.hpp"
#include "stefan/outputs.hpp"

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kValidation = 3,
  kRuntime = 4,
  kCriteriaFailed = 5,
};

struct Common {
  std::string out = "stefan_out";
  long long seed = 0;  // reserved; the core is deterministic
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw stefan::IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

stefan::RunManifest base_manifest(const std::string& config_path, const stefan::CaseConfig& cfg) {
  stefan::RunManifest m;
  m.config_path = config_path;
  m.config_hash = stefan::config_hash(cfg);
  m.code_version = STEFAN_CUT_VERSION;
  m.started = stefan::utc_timestamp();
  return m;
}

int cmd_run(const std::string& config_path, const Common& common) {
  const stefan::CaseConfig cfg = stefan::parse_config(read_file(config_path));
  stefan::RunManifest m = base_manifest(config_path, cfg);
  stefan::OutputDirectory out(common.out);
  const stefan::CaseResult r = stefan::run_case(cfg, out.sink());
  out.timeseries(r.timeseries);
  out.plot_script();
  m.finished = stefan::utc_timestamp();
  m.steps = r.steps;
  m.t_final = r.t_final;
  m.runtime_s = r.runtime_s;
  m.extension_failures = r.extension_failures;
  m.saddles = r.saddles;
  m.stencils = r.stencils;
  m.init = r.init;
  out.manifest(m);

  std::printf("%s n=%d steps=%d t=%.6g runtime=%.2fs\n", std::string(stefan::scenario_name(cfg.scenario)).c_str(),
              cfg.n, r.steps, r.t_final, r.runtime_s);
  if (r.errors) std::printf("L1=%.6e Linf=%.6e\n", r.errors->l1, r.errors->linf);
  if (r.interface_error) std::printf("interface error=%.6e\n", *r.interface_error);
  if (r.onset_time) std::printf("onset t=%.6g\n", *r.onset_time);
  if (r.extension_failures) std::printf("warning: velocity extension did not converge in %d steps\n", r.extension_failures);
  std::printf("outputs in %s\n", out.dir().string().c_str());
  return kOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<int>& grids, const Common& common) {
  const stefan::CaseConfig cfg = stefan::parse_config(read_file(config_path));
  for (int n : grids) {
    stefan::CaseConfig c = cfg;
    c.n = n;
    if (const auto err = stefan::validate(c)) throw stefan::ValidationError(*err);
  }
  stefan::RunManifest m = base_manifest(config_path, cfg);
  stefan::OutputDirectory out(common.out);
  const stefan::ErrorReport rep = stefan::convergence_sweep(cfg, grids, stefan::threads_from_env());
  out.convergence(rep);
  out.plot_script();
  m.finished = stefan::utc_timestamp();
  for (const auto& g : rep.grids) m.runtime_s += g.runtime_s;
  out.manifest(m);

  std::printf("%6s %12s %12s %7s %12s %7s\n", "grid", "dt", "L1", "order", "Linf", "order");
  for (std::size_t k = 0; k < rep.grids.size(); ++k) {
    const auto& g = rep.grids[k];
    if (k == 0)
      std::printf("%6d %12.4e %12.4e %7s %12.4e %7s\n", g.n, g.dt, g.l1, "-", g.linf, "-");
    else
      std::printf("%6d %12.4e %12.4e %7.3f %12.4e %7.3f\n", g.n, g.dt, g.l1, rep.l1_order(k), g.linf,
                  rep.linf_order(k));
  }
  return kOk;
}

int cmd_verify(stefan::Profile profile, const std::vector<int>& ids, bool verbose) {
  stefan::AcceptanceOptions opt;
  opt.profile = profile;
  opt.threads = stefan::threads_from_env();
  if (verbose) opt.log = &std::cerr;
  std::vector<int> run = ids;
  if (run.empty())
    for (int k = 1; k <= stefan::kCriterionCount; ++k) run.push_back(k);
  bool failed = false;
  for (int id : run) {
    const stefan::CriterionResult r = stefan::run_criterion(id, opt);
    std::cout << stefan::format_result(r) << std::endl;
    failed = failed || r.status == stefan::Status::Fail;
  }
  return failed ? kCriteriaFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Level-set cut-cell Stefan solver"};
  app.require_subcommand(1);
  Common common;

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one case from a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", common.out, "Output directory");
  run->add_option("--seed", common.seed, "Reserved");

  std::string sweep_path;
  std::vector<int> grids{32, 64, 128, 256};
  auto* sweep = app.add_subcommand("sweep", "Convergence sweep over grid sizes");
  sweep->add_option("config", sweep_path, "Config file")->required();
  sweep->add_option("--grids", grids, "Grid sizes")->delimiter(',');
  sweep->add_option("--out", common.out, "Output directory");
  sweep->add_option("--seed", common.seed, "Reserved");

  std::string profile_name = "full";
  std::vector<int> criteria;
  bool verbose = false;
  auto* verify = app.add_subcommand("verify", "Run the acceptance criteria");
  verify->add_option("--profile", profile_name, "quick, full or long")
      ->check(CLI::IsMember({"quick", "full", "long"}));
  verify->add_option("--criterion", criteria, "Only these criteria (1-9)")->delimiter(',');
  verify->add_flag("-v,--verbose", verbose, "Progress on stderr");
  verify->add_option("--seed", common.seed, "Reserved");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(config_path, common);
    if (*sweep) return cmd_sweep(sweep_path, grids, common);
    if (*verify) return cmd_verify(*stefan::profile_from_name(profile_name), criteria, verbose);
  } catch (const stefan::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const stefan::ValidationError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
