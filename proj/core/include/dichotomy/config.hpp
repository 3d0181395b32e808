#pragma once

// Problem configuration: a JSON document naming a coefficient family, a
// discretized parameter space and numerical settings. See README.md for the
// key schema.

#include "dichotomy/model.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dichotomy {

inline constexpr int kConfigSchemaVersion = 1;

struct FamilyConfig {
  std::string label;  // builtin name, or "custom"
  std::string kind;   // piecewise_scalar | second_order | perturbed | constant

  // piecewise_scalar
  double a_plus = 1.0;
  double t0 = 1.0;
  MatrixForm past = MatrixForm::reflection_flipped;
  MatrixForm future = MatrixForm::reflection;
  AngleMap angle{};

  // second_order
  std::string potential = "poschl-teller";
  double depth = 2.0;
  double asymptotic_time = 3.0;

  // perturbed
  std::shared_ptr<FamilyConfig> base;
  double support = 4.0;
  double sup_norm = 0.0;
  std::uint64_t seed = 0;

  // constant
  Matrix matrix;
};

struct SpaceConfig {
  Topology topology = Topology::interval;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t nodes = 101;
  std::vector<double> lambda0;  // interval values / circle angles
  GridSpec grid{};
  std::vector<ParameterValue> lambda0_points;  // grid2d
};

struct ProblemSpec {
  FamilyConfig family_config;
  SpaceConfig space_config;
  Numerics numerics;
  FamilyPtr family;
  ParameterSpace space;
};

/// Names accepted by family.builtin.
std::vector<std::string> builtin_family_names();

FamilyConfig builtin_family_config(const std::string& name);
FamilyPtr build_family(const FamilyConfig& config);
ParameterSpace build_space(const SpaceConfig& config);

/// Parses and validates a configuration document. Syntax errors throw
/// ValidationError with field "line N"; unknown keys and invariant violations
/// name the offending key.
ProblemSpec load_config(const std::string& text);

/// Canonical JSON form; load_config(serialize_config(p)) reproduces p.
std::string serialize_config(const ProblemSpec& spec);

/// Rebuilds family and space after the config structs were edited.
void rebuild(ProblemSpec& spec);

}  // namespace dichotomy
