#include "dichotomy_cli/cli.hpp"

#include "dichotomy/errors.hpp"
#include "dichotomy/verification.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#ifndef DICHOTOMY_VERSION
#define DICHOTOMY_VERSION "unknown"
#endif

namespace dichotomy::cli {

using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string output;
  std::optional<double> truncation_time;
  std::optional<std::size_t> grid;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> only;
  bool json = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config", "cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ProblemSpec load(const Options& o, std::ostream& err) {
  ProblemSpec spec = load_config(read_file(o.config));
  bool edited = false;
  if (o.truncation_time) {
    spec.numerics.truncation_time = *o.truncation_time;
    edited = true;
  }
  if (o.grid) {
    if (spec.space_config.topology == Topology::grid2d) {
      spec.space_config.grid.nx = spec.space_config.grid.ny = *o.grid;
    } else {
      spec.space_config.nodes = *o.grid;
    }
    edited = true;
  }
  if (o.seed) {
    if (spec.family_config.kind == "perturbed") {
      spec.family_config.seed = *o.seed;
      edited = true;
    } else {
      err << "note: --seed ignored, the family has no random perturbation\n";
    }
  }
  if (edited) rebuild(spec);
  return spec;
}

std::string fmt(double v, int precision = 10) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

void print_summary(const json& r, std::ostream& out) {
  out << r["command"].get<std::string>() << ": " << r["family"].get<std::string>() << " over "
      << r["topology"].get<std::string>() << ", " << r["nodes"].get<std::size_t>() << " nodes\n";
  const json& res = r["results"];
  if (res.contains("parities")) {
    for (const json& p : res["parities"]) {
      out << "  psi(" << fmt(p["lambda_a"]) << ", " << fmt(p["lambda_b"]) << ") = " << p["psi"].get<int>();
      if (p.contains("iota")) out << "  iota = " << p["iota"].get<int>();
      out << "\n";
    }
  }
  if (res.contains("zeros")) {
    for (const json& z : res["zeros"]) {
      const double width = z["bracket"][1].get<double>() - z["bracket"][0].get<double>();
      out << "  sign change of L_D at lambda = " << fmt(z["lambda"], 12) << " (bracket width " << fmt(width, 3)
          << ", margin " << fmt(z["margin"], 3) << ")\n";
    }
    for (const json& c : res["sigma_candidates"]) {
      out << "  zero without sign change near lambda = " << fmt(c["lambda"]) << " (no parity evidence)\n";
    }
  }
  if (res.contains("holonomy")) {
    for (const char* b : {"unstable", "stable"}) {
      if (!res["holonomy"].contains(b)) continue;
      const json& h = res["holonomy"][b];
      out << "  " << b << " bundle: holonomy " << h["sign"].get<int>() << ", w1 = " << h["w1"].get<int>() << "\n";
    }
    if (!res["pejsachowicz"].is_null()) {
      out << "  Pejsachowicz class = " << res["pejsachowicz"]["value"].get<int>() << "\n";
    }
  }
  if (res.contains("sign_map")) {
    const json& m = res["sign_map"];
    out << "  sign regions: " << m["positive_components"].get<std::size_t>() << " positive, "
        << m["negative_components"].get<std::size_t>() << " negative; zero set in "
        << m["zero_components"].get<std::size_t>() << " piece(s)\n";
    out << "  disconnects: " << (m["disconnects"].get<bool>() ? "true" : "false") << "\n";
    const json& b = res["boundary_changes"];
    out << "  boundary sign changes: " << b["total"].get<std::size_t>() << " (upper " << b["upper"].get<int>()
        << ", lower " << b["lower"].get<int>() << ")\n";
  }
}

int analyse(const std::string& command, const Options& o, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load(o, err);
  const Artifact a = command == "path" ? run_path(spec) : command == "circle" ? run_circle(spec) : run_grid(spec);
  const auto written = write_artifact(a, o.output);
  if (o.json) {
    std::ifstream in(written.front(), std::ios::binary);
    out << in.rdbuf();
  } else {
    print_summary(a.report, out);
    out << "wrote " << written.size() << " files to " << o.output << "\n";
  }
  return exit_ok;
}

int verify(const Options& o, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> names = check_names();
  for (const std::string& n : o.only) {
    if (std::find(names.begin(), names.end(), n) == names.end()) {
      err << "error: --only: unknown check '" << n << "'; known checks:";
      for (const std::string& k : names) err << " " << k;
      err << "\n";
      return exit_validation;
    }
  }

  VerifyOptions v;
  if (o.truncation_time) v.truncation_time = *o.truncation_time;
  if (o.seed) v.seed = *o.seed;

  json summary = {{"schema_version", kReportSchemaVersion},
                  {"generator", std::string("dichotomy ") + DICHOTOMY_VERSION},
                  {"command", "verify"},
                  {"checks", json::array()}};
  bool all = true;
  for (const std::string& name : names) {
    if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), name) == o.only.end()) continue;
    const CheckResult r = run_check(name, v);
    all = all && r.passed;
    json m = json::array();
    for (const Measurement& x : r.measurements) {
      m.push_back({{"label", x.label}, {"value", x.value}, {"bound", x.bound}, {"relation", x.relation},
                   {"passed", x.passed}});
    }
    json c = {{"criterion", r.criterion}, {"name", r.name},       {"title", r.title},
              {"passed", r.passed},       {"measurements", m},     {"seconds", r.seconds}};
    if (!r.error.empty()) c["error"] = r.error;
    summary["checks"].push_back(c);
    if (!o.json) out << format_check(r) << std::endl;
  }
  summary["passed"] = all;

  if (o.json) out << summary.dump(2) << "\n";
  if (!o.output.empty()) {
    std::filesystem::create_directories(o.output);
    std::ofstream f(std::filesystem::path(o.output) / "verify.json", std::ios::binary);
    f << summary.dump(2) << "\n";
  }
  return all ? exit_ok : exit_numerical;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exponential dichotomies, Evans determinants and parity invariants of linear ODE families",
               "dichotomy"};
  app.set_version_flag("--version", DICHOTOMY_VERSION);
  app.require_subcommand(1);

  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--output", o.output, "Directory for written files (analyses default to the current one)");
    sub->add_option("--truncation-time", o.truncation_time, "Override the truncation time T")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Seed for random perturbations");
    sub->add_flag("--json", o.json, "Print machine-readable output");
  };

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the built-in reference checks");
  common(verify_cmd);
  verify_cmd->add_option("--only", o.only, "Run only the named check(s)");

  std::vector<CLI::App*> analyses;
  for (const auto& [name, help] : {std::pair{"path", "Evans curve, parities and zeros along an interval"},
                                   {"circle", "Holonomy of the stable and unstable bundles over a circle"},
                                   {"grid", "Sign map of L_D over a planar grid"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    sub->add_option("--config", o.config, "Configuration file (JSON)")->required();
    sub->add_option("--grid", o.grid, "Override the node count (per axis on grids)")->check(CLI::Range(2, 100000));
    analyses.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (verify_cmd->parsed()) return verify(o, out, err);
    if (o.output.empty()) o.output = ".";
    for (CLI::App* sub : analyses) {
      if (sub->parsed()) return analyse(sub->get_name(), o, out, err);
    }
  } catch (const ValidationError& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return exit_validation;
  } catch (const ContractViolation& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return exit_validation;
  } catch (const RefinementNeededError& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const NumericalError& e) {
    err << "error: numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_validation;
}

}  // namespace dichotomy::cli
