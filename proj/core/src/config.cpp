#include "dichotomy/config.hpp"

#include "dichotomy/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace dichotomy {

using nlohmann::json;

namespace {

// JSON object reader that remembers which keys were consumed so leftovers can
// be reported as unknown.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json* find(const std::string& key) {
    auto it = node_.find(key);
    if (it == node_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) throw ValidationError(field(key), "required key is missing");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, field(key)) : fallback;
  }

  double required_number(const std::string& key) { return as_number(require(key), field(key)); }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ValidationError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    return as_count(*v, field(key));
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!used_.count(it.key())) throw ValidationError(field(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ValidationError(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(field, "must be finite");
    return x;
  }

  static std::size_t as_count(const json& v, const std::string& field) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ValidationError(field, "expected a non-negative integer");
    return v.get<std::size_t>();
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

std::pair<double, double> number_pair(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) throw ValidationError(field, "expected [min, max]");
  return {Reader::as_number(v[0], field), Reader::as_number(v[1], field)};
}

std::vector<double> number_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw ValidationError(field, "expected an array of numbers");
  std::vector<double> out;
  for (const json& e : v) out.push_back(Reader::as_number(e, field));
  return out;
}

MatrixForm parse_form(const std::string& s, const std::string& field) {
  for (MatrixForm f : {MatrixForm::saddle, MatrixForm::reflection, MatrixForm::reflection_flipped}) {
    if (to_string(f) == s) return f;
  }
  throw ValidationError(field, "unknown matrix form '" + s + "' (saddle, reflection, reflection-flipped)");
}

AngleMap::Shape parse_shape(const std::string& s, const std::string& field) {
  for (auto shape : {AngleMap::Shape::linear, AngleMap::Shape::radial_bump, AngleMap::Shape::product}) {
    if (to_string(shape) == s) return shape;
  }
  throw ValidationError(field, "unknown angle map '" + s + "' (linear, radial-bump, product)");
}

Topology parse_topology(const std::string& s, const std::string& field) {
  for (Topology t : {Topology::interval, Topology::circle, Topology::grid2d}) {
    if (to_string(t) == s) return t;
  }
  throw ValidationError(field, "unknown topology '" + s + "' (interval, circle, grid2d)");
}

const std::vector<std::string> kKinds = {"piecewise_scalar", "second_order", "perturbed", "constant"};

FamilyConfig parse_family(const json& node, const std::string& path) {
  Reader r(node, path);
  FamilyConfig c;
  if (const json* b = r.find("builtin")) {
    if (!b->is_string()) throw ValidationError(r.field("builtin"), "expected a string");
    try {
      c = builtin_family_config(b->get<std::string>());
    } catch (const ValidationError& e) {
      throw ValidationError(r.field("builtin"), e.what());
    }
  } else {
    c.label = "custom";
  }
  if (const json* k = r.find("kind")) {
    if (!k->is_string()) throw ValidationError(r.field("kind"), "expected a string");
    const std::string kind = k->get<std::string>();
    if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
      throw ValidationError(r.field("kind"), "unknown family kind '" + kind + "'");
    }
    if (!c.kind.empty() && c.kind != kind) {
      throw ValidationError(r.field("kind"), "builtin '" + c.label + "' has kind " + c.kind);
    }
    c.kind = kind;
  }
  if (c.kind.empty()) throw ValidationError(r.field("kind"), "required key is missing");

  if (c.kind == "piecewise_scalar") {
    if (const json* p = r.find("profile")) {
      Reader pr(*p, r.field("profile"));
      const std::string shape = pr.string("shape", "tanh2");
      if (shape != "tanh2") throw ValidationError(pr.field("shape"), "only 'tanh2' is available");
      c.a_plus = pr.number("a_plus", c.a_plus);
      c.t0 = pr.number("t0", c.t0);
      pr.finish();
    }
    if (r.has("past_matrix")) c.past = parse_form(r.string("past_matrix", ""), r.field("past_matrix"));
    if (r.has("future_matrix")) c.future = parse_form(r.string("future_matrix", ""), r.field("future_matrix"));
    if (const json* a = r.find("angle_map")) {
      Reader ar(*a, r.field("angle_map"));
      c.angle.shape = parse_shape(ar.string("map", to_string(c.angle.shape)), ar.field("map"));
      c.angle.scale = ar.number("scale", c.angle.scale);
      c.angle.offset = ar.number("offset", c.angle.offset);
      ar.finish();
    }
    if (!(c.a_plus > 0.0)) throw ValidationError(path + ".profile.a_plus", "must be positive");
    if (!(c.t0 > 0.0)) throw ValidationError(path + ".profile.t0", "must be positive");
  } else if (c.kind == "second_order") {
    c.potential = r.string("potential", c.potential);
    if (c.potential != "poschl-teller") throw ValidationError(r.field("potential"), "only 'poschl-teller' is available");
    c.depth = r.number("depth", c.depth);
    c.asymptotic_time = r.number("t0", c.asymptotic_time);
    if (!(c.asymptotic_time > 0.0)) throw ValidationError(r.field("t0"), "must be positive");
  } else if (c.kind == "perturbed") {
    if (const json* b = r.find("base")) {
      c.base = std::make_shared<FamilyConfig>(parse_family(*b, r.field("base")));
    }
    if (!c.base) throw ValidationError(r.field("base"), "required key is missing");
    if (c.base->kind == "perturbed") throw ValidationError(r.field("base"), "nested perturbations are not supported");
    c.support = r.number("support", c.support);
    c.sup_norm = r.number("sup_norm", c.sup_norm);
    if (const json* s = r.find("seed")) {
      if (!s->is_number_unsigned()) throw ValidationError(r.field("seed"), "expected an unsigned integer");
      c.seed = s->get<std::uint64_t>();
    }
    if (!(c.support > 0.0)) throw ValidationError(r.field("support"), "must be positive");
    if (!(c.sup_norm >= 0.0)) throw ValidationError(r.field("sup_norm"), "must be non-negative");
  } else {
    if (const json* m = r.find("matrix")) {
      const std::string f = r.field("matrix");
      if (!m->is_array() || m->empty()) throw ValidationError(f, "expected a non-empty array of rows");
      const auto n = static_cast<Eigen::Index>(m->size());
      c.matrix.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::vector<double> row = number_list((*m)[i], f);
        if (static_cast<Eigen::Index>(row.size()) != n) throw ValidationError(f, "matrix must be square");
        for (Eigen::Index j = 0; j < n; ++j) c.matrix(i, j) = row[j];
      }
    }
    if (c.matrix.size() == 0) throw ValidationError(r.field("matrix"), "required key is missing");
  }
  r.finish();
  return c;
}

SpaceConfig parse_space(const json& node) {
  Reader r(node, "space");
  SpaceConfig c;
  c.topology = parse_topology(r.string("topology", ""), r.field("topology"));
  if (!r.has("lambda0")) throw ValidationError(r.field("lambda0"), "required key is missing");
  switch (c.topology) {
    case Topology::interval: {
      std::tie(c.lo, c.hi) = number_pair(r.require("range"), r.field("range"));
      c.nodes = Reader::as_count(r.require("nodes"), r.field("nodes"));
      c.lambda0 = number_list(r.require("lambda0"), r.field("lambda0"));
      break;
    }
    case Topology::circle: {
      c.nodes = Reader::as_count(r.require("nodes"), r.field("nodes"));
      c.lambda0 = number_list(r.require("lambda0"), r.field("lambda0"));
      break;
    }
    case Topology::grid2d: {
      if (const json* v = r.find("x_range")) std::tie(c.grid.x_min, c.grid.x_max) = number_pair(*v, r.field("x_range"));
      if (const json* v = r.find("y_range")) std::tie(c.grid.y_min, c.grid.y_max) = number_pair(*v, r.field("y_range"));
      const json& res = r.require("resolution");
      if (res.is_array() && res.size() == 2) {
        c.grid.nx = Reader::as_count(res[0], r.field("resolution"));
        c.grid.ny = Reader::as_count(res[1], r.field("resolution"));
      } else {
        c.grid.nx = c.grid.ny = Reader::as_count(res, r.field("resolution"));
      }
      const std::string mask = r.string("mask", "disc");
      if (mask != "disc" && mask != "none") throw ValidationError(r.field("mask"), "expected 'disc' or 'none'");
      c.grid.disc_mask = mask == "disc";
      const json& pts = r.require("lambda0");
      if (!pts.is_array()) throw ValidationError(r.field("lambda0"), "expected an array of [x, y] points");
      for (const json& p : pts) {
        const auto [x, y] = number_pair(p, r.field("lambda0"));
        c.lambda0_points.push_back({x, y});
      }
      break;
    }
  }
  r.finish();
  return c;
}

Numerics parse_numerics(const json& node) {
  Reader r(node, "numerics");
  Numerics n;
  if (r.has("truncation_time") && r.has("T")) {
    throw ValidationError("numerics.T", "give either truncation_time or T, not both");
  }
  n.truncation_time = r.has("T") ? r.required_number("T") : r.required_number("truncation_time");
  n.ode_tol = r.required_number("ode_tol");
  n.reortho_interval = r.required_number("reortho_interval");
  n.zero_tol = r.required_number("zero_tol");
  n.continuity_bound = r.number("continuity_bound", n.continuity_bound);
  n.gap_tol = r.number("gap_tol", n.gap_tol);
  r.finish();
  for (auto [key, value] : {std::pair{"ode_tol", n.ode_tol}, {"reortho_interval", n.reortho_interval},
                            {"zero_tol", n.zero_tol}, {"gap_tol", n.gap_tol}}) {
    if (!(value > 0.0)) throw ValidationError(std::string("numerics.") + key, "must be positive");
  }
  if (!(n.continuity_bound > 0.0 && n.continuity_bound <= std::numbers::pi / 2)) {
    throw ValidationError("numerics.continuity_bound", "must lie in (0, pi/2]");
  }
  return n;
}

json family_to_json(const FamilyConfig& c) {
  json j;
  if (c.label != "custom") j["builtin"] = c.label;
  j["kind"] = c.kind;
  if (c.kind == "piecewise_scalar") {
    j["profile"] = {{"shape", "tanh2"}, {"a_plus", c.a_plus}, {"t0", c.t0}};
    j["past_matrix"] = to_string(c.past);
    j["future_matrix"] = to_string(c.future);
    j["angle_map"] = {{"map", to_string(c.angle.shape)}, {"scale", c.angle.scale}, {"offset", c.angle.offset}};
  } else if (c.kind == "second_order") {
    j["potential"] = c.potential;
    j["depth"] = c.depth;
    j["t0"] = c.asymptotic_time;
  } else if (c.kind == "perturbed") {
    j["base"] = family_to_json(*c.base);
    j["support"] = c.support;
    j["sup_norm"] = c.sup_norm;
    j["seed"] = c.seed;
  } else {
    json rows = json::array();
    for (Eigen::Index i = 0; i < c.matrix.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < c.matrix.cols(); ++k) row.push_back(c.matrix(i, k));
      rows.push_back(row);
    }
    j["matrix"] = rows;
  }
  return j;
}

json space_to_json(const SpaceConfig& c) {
  json j;
  j["topology"] = to_string(c.topology);
  switch (c.topology) {
    case Topology::interval:
      j["range"] = {c.lo, c.hi};
      j["nodes"] = c.nodes;
      j["lambda0"] = c.lambda0;
      break;
    case Topology::circle:
      j["nodes"] = c.nodes;
      j["lambda0"] = c.lambda0;
      break;
    case Topology::grid2d: {
      j["x_range"] = {c.grid.x_min, c.grid.x_max};
      j["y_range"] = {c.grid.y_min, c.grid.y_max};
      j["resolution"] = {c.grid.nx, c.grid.ny};
      j["mask"] = c.grid.disc_mask ? "disc" : "none";
      json pts = json::array();
      for (const ParameterValue& p : c.lambda0_points) pts.push_back({p.x, p.y});
      j["lambda0"] = pts;
      break;
    }
  }
  return j;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

std::vector<std::string> builtin_family_names() {
  return {"paper-sec4-BC", "paper-sec4-exBC", "disc-radial", "disc-product", "poschl-teller", "constant-saddle"};
}

FamilyConfig builtin_family_config(const std::string& name) {
  FamilyConfig c;
  c.label = name;
  if (name == "paper-sec4-BC" || name == "paper-sec4-exBC" || name == "disc-radial" || name == "disc-product") {
    c.kind = "piecewise_scalar";
    c.past = name == "paper-sec4-exBC" ? MatrixForm::saddle : MatrixForm::reflection_flipped;
    c.future = MatrixForm::reflection;
    if (name == "disc-radial") c.angle.shape = AngleMap::Shape::radial_bump;
    if (name == "disc-product") c.angle.shape = AngleMap::Shape::product;
  } else if (name == "poschl-teller") {
    c.kind = "second_order";
  } else if (name == "constant-saddle") {
    c.kind = "constant";
    c.matrix = Matrix::Zero(2, 2);
    c.matrix(0, 0) = -1.0;
    c.matrix(1, 1) = 1.0;
  } else {
    throw ValidationError("family.builtin", "unknown builtin family '" + name + "'");
  }
  return c;
}

FamilyPtr build_family(const FamilyConfig& c) {
  if (c.kind == "piecewise_scalar") {
    return std::make_shared<PiecewiseScalarFamily>(c.label, ScalarProfile(c.a_plus, c.t0), c.past, c.future, c.angle);
  }
  if (c.kind == "second_order") return make_poschl_teller(c.depth, c.asymptotic_time);
  if (c.kind == "perturbed") {
    if (!c.base) throw ValidationError("family.base", "required key is missing");
    FamilyPtr base = build_family(*c.base);
    return std::make_shared<PerturbedFamily>(base, Perturbation(base->dimension(), c.support, c.sup_norm, c.seed));
  }
  if (c.kind == "constant") return make_constant_family(c.matrix, c.label);
  throw ValidationError("family.kind", "unknown family kind '" + c.kind + "'");
}

ParameterSpace build_space(const SpaceConfig& c) {
  switch (c.topology) {
    case Topology::interval: return ParameterSpace::interval(c.lo, c.hi, c.nodes, c.lambda0);
    case Topology::circle: return ParameterSpace::circle(c.nodes, c.lambda0);
    case Topology::grid2d: return ParameterSpace::grid2d(c.grid, c.lambda0_points);
  }
  throw ValidationError("space.topology", "unknown topology");
}

void rebuild(ProblemSpec& spec) {
  try {
    spec.family = build_family(spec.family_config);
  } catch (const ContractViolation& e) {
    throw ValidationError("family", e.what());
  }
  spec.space = build_space(spec.space_config);

  const double t0 = spec.family->asymptotic_time();
  if (!(spec.numerics.truncation_time > t0)) {
    std::ostringstream msg;
    msg << "T = " << spec.numerics.truncation_time << " must exceed the asymptotic time t0 = " << t0;
    throw ValidationError("truncation_time", msg.str());
  }
  for (const ParameterValue& p : spec.space.nodes()) {
    try {
      spec.family->check_parameter(p);
    } catch (const ContractViolation& e) {
      throw ValidationError("space", std::string("node outside the family's parameter domain: ") + e.what());
    }
  }
}

ProblemSpec load_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("line " + std::to_string(line_of(text, e.byte)), e.what());
  }
  Reader r(root, "");
  if (const json* v = r.find("schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != kConfigSchemaVersion) {
      throw ValidationError("schema_version", "unsupported schema version (expected 1)");
    }
  }
  ProblemSpec spec;
  spec.family_config = parse_family(r.require("family"), "family");
  spec.space_config = parse_space(r.require("space"));
  spec.numerics = parse_numerics(r.require("numerics"));
  r.finish();
  rebuild(spec);
  return spec;
}

std::string serialize_config(const ProblemSpec& spec) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["family"] = family_to_json(spec.family_config);
  j["space"] = space_to_json(spec.space_config);
  const Numerics& n = spec.numerics;
  j["numerics"] = {{"truncation_time", n.truncation_time}, {"ode_tol", n.ode_tol},
                   {"reortho_interval", n.reortho_interval}, {"zero_tol", n.zero_tol},
                   {"continuity_bound", n.continuity_bound}, {"gap_tol", n.gap_tol}};
  return j.dump(2) + "\n";
}

}  // namespace dichotomy
