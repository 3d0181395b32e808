#pragma once

// Drivers behind the `dichotomy` command: run a configured analysis, turn the
// result into report / samples / plot files, and read those files back.

#include "dichotomy/config.hpp"
#include "dichotomy/index.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dichotomy::cli {

inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_numerical = 3 };

struct PlotSeries {
  std::string name;    // file is plot_<name>.dat
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;
};

struct Artifact {
  nlohmann::json report;
  Topology topology = Topology::interval;
  std::vector<NodeSample> samples;
  std::vector<PlotSeries> plots;
};

Artifact run_path(const ProblemSpec& spec);
Artifact run_circle(const ProblemSpec& spec);
Artifact run_grid(const ProblemSpec& spec);

/// Header "lambda[,lambda_y],LD,sign,margin"; numbers printed with %.17g.
std::string samples_csv(const std::vector<NodeSample>& samples, Topology topology);
std::string plot_text(const PlotSeries& series);
std::string report_text(const nlohmann::json& report);

struct SamplesTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t lambda_columns() const { return header.size() - 3; }
};

// Parsers throw ValidationError naming the line (or key) at fault.
SamplesTable parse_samples_csv(const std::string& text);
std::vector<std::pair<double, double>> parse_plot_data(const std::string& text);
nlohmann::json parse_report(const std::string& text);

/// Writes report.json, samples.csv and one plot_<name>.dat per series.
/// Returns the written paths.
std::vector<std::filesystem::path> write_artifact(const Artifact& artifact, const std::filesystem::path& dir);

/// Full command line, including subcommand. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dichotomy::cli
