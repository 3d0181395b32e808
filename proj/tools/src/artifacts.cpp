#include "dichotomy_cli/cli.hpp"

#include "dichotomy/bifurcation.hpp"
#include "dichotomy/errors.hpp"
#include "dichotomy/subspaces.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef DICHOTOMY_VERSION
#define DICHOTOMY_VERSION "unknown"
#endif

namespace dichotomy::cli {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no inf/nan; they never appear in a healthy run, but a report must still parse.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json lambda_json(const ParameterValue& p, Topology topology) {
  if (topology == Topology::grid2d) return json::array({p.x, p.y});
  return json::array({p.x});
}

void require_topology(const ProblemSpec& spec, Topology want, const char* command) {
  if (spec.space.topology() != want) {
    throw ValidationError("space.topology", std::string("'") + command + "' needs topology " + to_string(want) +
                                                ", the configuration has " + to_string(spec.space.topology()));
  }
}

json envelope(const char* command, const ProblemSpec& spec) {
  json r;
  r["schema_version"] = kReportSchemaVersion;
  r["generator"] = std::string("dichotomy ") + DICHOTOMY_VERSION;
  r["command"] = command;
  r["family"] = spec.family->name();
  r["topology"] = to_string(spec.space.topology());
  r["nodes"] = spec.space.size();
  json l0 = json::array();
  for (std::size_t i : spec.space.lambda0()) {
    l0.push_back({{"node", i}, {"lambda", lambda_json(spec.space.node(i), spec.space.topology())}});
  }
  r["lambda0"] = l0;
  r["config"] = json::parse(serialize_config(spec));
  return r;
}

json parities_json(const IndexReport& rep, const ParameterSpace& space) {
  json out = json::array();
  for (const ParityEntry& p : rep.parities) {
    json e = {{"a", p.a}, {"b", p.b}, {"lambda_a", space.node(p.a).x}, {"lambda_b", space.node(p.b).x},
              {"psi", p.psi}};
    if (p.iota) e["iota"] = *p.iota;
    out.push_back(e);
  }
  return out;
}

json transversality_json(const std::vector<NodeSample>& samples) {
  double min_margin = INFINITY;
  std::size_t degenerate = 0;
  for (const NodeSample& s : samples) {
    min_margin = std::min(min_margin, s.margin);
    degenerate += !s.transversal;
  }
  return {{"min_margin", finite_or_null(min_margin)}, {"non_transversal_nodes", degenerate}};
}

json holonomy_json(const Holonomy& h) {
  return {{"sign", h.sign}, {"w1", h.w1}, {"overlap_determinant", h.overlap_determinant}};
}

std::vector<PlotSeries> evans_plots(const std::vector<NodeSample>& samples) {
  PlotSeries raw{"evans", "lambda", "LD", {}};
  PlotSeries normalized{"evans_normalized", "lambda", "LD_normalized", {}};
  bool all_normalized = !samples.empty();
  for (const NodeSample& s : samples) {
    raw.points.emplace_back(s.lambda.x, s.evans);
    if (s.normalized) {
      normalized.points.emplace_back(s.lambda.x, *s.normalized);
    } else {
      all_normalized = false;
    }
  }
  std::vector<PlotSeries> out{raw};
  if (all_normalized) out.push_back(normalized);
  return out;
}

// Splits on newlines, tolerating a trailing "\r".
std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& token, const std::string& where) {
  if (token.empty()) throw ValidationError(where, "empty field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE) {
    throw ValidationError(where, "not a number: '" + token + "'");
  }
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("output", "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw ValidationError("output", "write failed for " + path.string());
}

}  // namespace

Artifact run_path(const ProblemSpec& spec) {
  require_topology(spec, Topology::interval, "path");
  const FrameField field = frame_field(*spec.family, spec.space, spec.numerics);
  const IndexReport rep = index_report(*spec.family, field, spec.numerics);
  const BifurcationFinding found = locate_zeros_on_path(*spec.family, field, spec.numerics);

  json zeros = json::array();
  for (const LocatedZero& z : found.zeros) {
    zeros.push_back({{"lambda", z.lambda},
                     {"bracket", {z.lo, z.hi}},
                     {"sign_lo", z.sign_lo},
                     {"sign_hi", z.sign_hi},
                     {"residual", z.residual},
                     {"margin", z.margin},
                     {"margin_lo", z.margin_lo},
                     {"margin_hi", z.margin_hi},
                     {"bisection_steps", z.widths.size()}});
  }
  json candidates = json::array();
  for (const SigmaCandidate& c : found.candidates) {
    candidates.push_back({{"node", c.node}, {"lambda", c.lambda}, {"value", c.value}, {"parity_evidence", false}});
  }

  Artifact a;
  a.topology = Topology::interval;
  a.samples = rep.samples;
  a.plots = evans_plots(rep.samples);
  a.report = envelope("path", spec);
  a.report["results"] = {{"parities", parities_json(rep, spec.space)},
                         {"zeros", zeros},
                         {"sigma_candidates", candidates},
                         {"transversality", transversality_json(rep.samples)}};
  return a;
}

Artifact run_circle(const ProblemSpec& spec) {
  require_topology(spec, Topology::circle, "circle");
  const FrameField field = frame_field(*spec.family, spec.space, spec.numerics);
  const IndexReport rep = index_report(*spec.family, field, spec.numerics);

  json results;
  results["parities"] = parities_json(rep, spec.space);
  results["holonomy"] = json::object();
  if (rep.unstable_holonomy) results["holonomy"]["unstable"] = holonomy_json(*rep.unstable_holonomy);
  if (rep.stable_holonomy) results["holonomy"]["stable"] = holonomy_json(*rep.stable_holonomy);
  if (rep.pejsachowicz) {
    const PejsachowiczClass& p = *rep.pejsachowicz;
    results["pejsachowicz"] = {{"w1_plus", p.w1_plus}, {"w1_minus", p.w1_minus}, {"value", p.value}};
  } else {
    results["pejsachowicz"] = nullptr;
  }
  results["transversality"] = transversality_json(rep.samples);

  Artifact a;
  a.topology = Topology::circle;
  a.samples = rep.samples;
  a.plots = evans_plots(rep.samples);
  a.report = envelope("circle", spec);
  a.report["results"] = results;
  return a;
}

Artifact run_grid(const ProblemSpec& spec) {
  require_topology(spec, Topology::grid2d, "grid");
  const SignMap map = sign_map_2d(*spec.family, spec.space, spec.numerics);
  const std::vector<BoundaryChange> trace = boundary_trace(map, spec.space);

  json changes = json::array();
  int upper = 0, lower = 0;
  for (const BoundaryChange& c : trace) {
    changes.push_back({{"from", c.from}, {"to", c.to}, {"angle", c.angle}, {"semicircle", c.semicircle}});
    upper += c.semicircle == "upper";
    lower += c.semicircle == "lower";
  }

  Artifact a;
  a.topology = Topology::grid2d;
  a.samples = map.samples;
  a.report = envelope("grid", spec);
  a.report["results"] = {{"sign_map",
                          {{"positive_components", map.positive_components},
                           {"negative_components", map.negative_components},
                           {"zero_components", map.zero_components},
                           {"zero_nodes", map.zero_nodes.size()},
                           {"disconnects", map.disconnects},
                           {"lambda0_separated", map.lambda0_separated}}},
                         {"verdict", map.disconnects ? "disconnects" : "connected"},
                         {"boundary_trace", changes},
                         {"boundary_changes", {{"upper", upper}, {"lower", lower}, {"total", trace.size()}}},
                         {"transversality", transversality_json(map.samples)}};

  PlotSeries plus{"sign_positive", "x", "y", {}}, minus{"sign_negative", "x", "y", {}}, zero{"sign_zero", "x", "y", {}};
  for (std::size_t u = 0; u < spec.space.size(); ++u) {
    const ParameterValue& p = spec.space.node(u);
    (map.signs[u] > 0 ? plus : map.signs[u] < 0 ? minus : zero).points.emplace_back(p.x, p.y);
  }
  PlotSeries boundary{"boundary_changes", "x", "y", {}};
  for (const BoundaryChange& c : trace) boundary.points.emplace_back(std::cos(c.angle), std::sin(c.angle));
  a.plots = {plus, minus, zero, boundary};
  return a;
}

std::string samples_csv(const std::vector<NodeSample>& samples, Topology topology) {
  const bool planar = topology == Topology::grid2d;
  std::string out = planar ? "lambda_x,lambda_y,LD,sign,margin\n" : "lambda,LD,sign,margin\n";
  for (const NodeSample& s : samples) {
    out += num(s.lambda.x);
    if (planar) out += "," + num(s.lambda.y);
    out += "," + num(s.evans) + "," + std::to_string(s.sign) + "," + num(s.margin) + "\n";
  }
  return out;
}

std::string plot_text(const PlotSeries& series) {
  std::string out = "# " + series.x_label + " " + series.y_label + "\n";
  for (const auto& [x, y] : series.points) out += num(x) + " " + num(y) + "\n";
  return out;
}

std::string report_text(const json& report) { return report.dump(2) + "\n"; }

SamplesTable parse_samples_csv(const std::string& text) {
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty()) throw ValidationError("line 1", "missing header");

  SamplesTable t;
  {
    std::istringstream h(lines[0]);
    std::string cell;
    while (std::getline(h, cell, ',')) t.header.push_back(cell);
  }
  const std::vector<std::string> path{"lambda", "LD", "sign", "margin"};
  const std::vector<std::string> planar{"lambda_x", "lambda_y", "LD", "sign", "margin"};
  if (t.header != path && t.header != planar) {
    throw ValidationError("line 1", "header must be 'lambda,LD,sign,margin' or 'lambda_x,lambda_y,LD,sign,margin'");
  }

  const std::size_t sign_col = t.header.size() - 2;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = "line " + std::to_string(k + 1);
    if (lines[k].empty()) {
      if (k + 1 == lines.size()) break;
      throw ValidationError(where, "empty row");
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = lines[k].find(',', start);
      row.push_back(parse_double(lines[k].substr(start, comma - start), where));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (row.size() != t.header.size()) {
      throw ValidationError(where, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                       std::to_string(row.size()));
    }
    const double s = row[sign_col];
    if (s != -1.0 && s != 0.0 && s != 1.0) throw ValidationError(where, "sign must be -1, 0 or 1");
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<std::pair<double, double>> parse_plot_data(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  const std::vector<std::string> lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string where = "line " + std::to_string(k + 1);
    std::istringstream in(lines[k]);
    std::string x, y, extra;
    if (!(in >> x) || x[0] == '#') continue;
    if (!(in >> y) || (in >> extra)) throw ValidationError(where, "expected two columns");
    out.emplace_back(parse_double(x, where), parse_double(y, where));
  }
  return out;
}

json parse_report(const std::string& text) {
  json r;
  try {
    r = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("report", e.what());
  }
  if (!r.is_object()) throw ValidationError("report", "expected an object");
  if (!r.contains("schema_version") || r["schema_version"] != kReportSchemaVersion) {
    throw ValidationError("schema_version", "unsupported report schema (expected " +
                                                std::to_string(kReportSchemaVersion) + ")");
  }
  for (const char* key : {"generator", "command", "family", "topology", "nodes", "lambda0", "config", "results"}) {
    if (!r.contains(key)) throw ValidationError(key, "required key is missing");
  }
  if (!r["nodes"].is_number_unsigned()) throw ValidationError("nodes", "expected an unsigned integer");
  if (!r["lambda0"].is_array()) throw ValidationError("lambda0", "expected an array");
  if (!r["results"].is_object()) throw ValidationError("results", "expected an object");

  const std::string command = r["command"].is_string() ? r["command"].get<std::string>() : "";
  std::vector<const char*> required;
  if (command == "path") {
    required = {"parities", "zeros", "sigma_candidates", "transversality"};
  } else if (command == "circle") {
    required = {"parities", "holonomy", "pejsachowicz", "transversality"};
  } else if (command == "grid") {
    required = {"sign_map", "verdict", "boundary_trace", "boundary_changes", "transversality"};
  } else {
    throw ValidationError("command", "expected path, circle or grid");
  }
  for (const char* key : required) {
    if (!r["results"].contains(key)) throw ValidationError(std::string("results.") + key, "required key is missing");
  }

  // The embedded configuration must itself be a valid one.
  try {
    load_config(r["config"].dump());
  } catch (const ValidationError& e) {
    throw ValidationError("config." + e.field(), e.what());
  }
  return r;
}

std::vector<std::filesystem::path> write_artifact(const Artifact& artifact, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("output", "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  json report = artifact.report;
  json files = {{"samples", "samples.csv"}, {"plots", json::array()}};
  for (const PlotSeries& p : artifact.plots) files["plots"].push_back("plot_" + p.name + ".dat");
  report["files"] = files;

  written.push_back(dir / "report.json");
  write_file(written.back(), report_text(report));
  written.push_back(dir / "samples.csv");
  write_file(written.back(), samples_csv(artifact.samples, artifact.topology));
  for (const PlotSeries& p : artifact.plots) {
    written.push_back(dir / ("plot_" + p.name + ".dat"));
    write_file(written.back(), plot_text(p));
  }
  return written;
}

}  // namespace dichotomy::cli
