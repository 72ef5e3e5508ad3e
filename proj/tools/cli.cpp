#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rsw/config.hpp"
#include "rsw/experiments.hpp"

namespace rsw::cli {

namespace {

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "run configuration file")->required();
  sub->add_option("--out", c.out, "output directory (default: output.dir of the config)");
  sub->add_option("--set", c.sets, "override, key=value (repeatable)");
}

std::string command_line(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

nlohmann::json run_summary(const SingleRun& r) {
  const IntegrationResult& res = r.result;
  nlohmann::json j{{"status", to_string(res.stop_reason)},
                   {"stop_time", res.stop_time},
                   {"steps", res.steps},
                   {"samples", res.records.size()}};
  if (r.windows > 0) j["windows"] = r.windows;
  if (!res.records.empty()) {
    const DiagnosticsRecord& last = res.records.back();
    j["final"] = {{"t", last.t},           {"l2_dist", last.l2_dist}, {"n_norm", last.n_norm},
                  {"entropy", last.entropy}, {"min_h", last.min_h},     {"mass", last.mass}};
  }
  return j;
}

int study(const std::string& name, const Common& c, const std::string& cmdline, std::ostream& out) {
  RunConfig cfg = parse_config(c.config, c.sets);
  const std::filesystem::path dir = c.out.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(c.out);
  if (!c.out.empty()) cfg.output_dir = c.out;

  if (name == "run") {
    const SingleRun r = run_single(cfg);
    persist(dir, cfg, cmdline, r.result.records, run_summary(r));
    out << "run " << to_string(r.result.stop_reason) << " at t=" << r.result.stop_time << ", "
        << r.result.records.size() << " samples written to " << dir.string() << '\n';
    return r.result.completed() ? kOk : kPartial;
  }

  StudyResult s;
  if (name == "sweep-eps") {
    s = eps_cauchy_sweep(cfg, cfg.study.eps_list, cfg.study.eps_ref);
  } else if (name == "small-data") {
    s = small_data_global(cfg, cfg.study.delta_list, cfg.horizon);
  } else if (name == "t0-scaling") {
    s = t0_scaling(cfg, cfg.study.amplitudes);
  } else {
    s = shock_probe(cfg, cfg.study.a_large);
  }
  persist(dir, cfg, cmdline, s.primary_records, to_json(s));
  for (const auto& [fit_name, f] : s.fits) {
    out << "fit " << fit_name << ": slope " << f.slope << " [" << f.ci_low << ", " << f.ci_high << "]\n";
  }
  for (const Verdict& v : s.verdicts) {
    out << (v.pass ? "PASS " : "FAIL ") << v.name << " measured=" << v.measured << "  (" << v.expectation << ")\n";
  }
  out << s.study << " written to " << dir.string() << '\n';
  return kOk;
}

int verify(const std::string& report, std::ostream& out, const VerifyOptions* given) {
  VerifyOptions opts = given ? *given : VerifyOptions{};
  opts.on_result = [&out](const CheckResult& c) { out << format_check(c) << std::endl; };
  const VerifyReport r = run_verification(opts);
  out << (r.passed() ? "all checks passed" : "verification FAILED") << " in " << r.seconds << " s\n";
  if (!report.empty()) write_json(report, to_json(r));
  return r.passed() ? kOk : kError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const VerifyOptions* verify_opts) {
  CLI::App app{"Rotating shallow water lab: solvers, diagnostics and studies"};
  app.require_subcommand(1);

  Common common;
  std::string report;
  const std::vector<std::pair<std::string, std::string>> studies{
      {"run", "single run of the configured solver"},
      {"sweep-eps", "vanishing-viscosity rate study"},
      {"small-data", "small-data long-horizon study"},
      {"t0-scaling", "norm-doubling time against amplitude"},
      {"shock-probe", "steepening and resolution loss at large amplitude"},
  };
  for (const auto& [name, help] : studies) add_common(app.add_subcommand(name, help), common);
  app.add_subcommand("verify", "property suite over all modules")
      ->add_option("--report", report, "write a JSON report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kError;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    if (sub->get_name() == "verify") return verify(report, out, verify_opts);
    return study(sub->get_name(), common, command_line(argc, argv), out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
}

}  // namespace rsw::cli
