#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "logsymp/deformations.hpp"

namespace logsymp::cli {

/// Coefficients keyed by index strings ("01", or coordinate names "z,th"),
/// values in the expression language of the manifold's coordinates.
struct FormInput {
  int degree = 0;
  Frame frame = Frame::B;
  std::map<std::string, std::string> coefficients;
};

struct BivectorInput {
  Frame frame = Frame::Coordinate;
  std::map<std::string, std::string> coefficients;
};

/// One run of the command-line front end. Parsed completely (and checked
/// against the manifold) before anything executes.
struct Scenario {
  std::string command;
  std::string manifold = "s2";
  bool manifold_given = false;

  std::optional<BivectorInput> pi;        ///< replaces the catalog structure
  std::optional<FormInput> omega;         ///< replaces the catalog structure
  std::vector<double> epsilon, delta;     ///< deformation parameters
  std::optional<FormInput> exact;         ///< beta: adds d(beta) to omega
  std::optional<BivectorInput> perturbation;  ///< added to the bivector
  std::string locus_shift;                ///< Z moved to the graph of this

  std::optional<FormInput> form;          ///< operand of single-form commands
  std::optional<FormInput> primitive;     ///< carried primitive for moser
  std::optional<FormInput> mu0, mu1;      ///< nambu operands
  std::string rescale;                    ///< nambu: mu1 = rescale * mu0
  std::optional<BivectorInput> sigma;     ///< norms operand

  std::string example3;                   ///< "plateau" or "three-circles"
  double example3_eps = 0.1;
  std::optional<BivectorInput> sweep_direction;
  std::vector<double> sweep_scales;

  int steps = 200;
  std::vector<int> grid;                  ///< seed grid (t points, periodic points)
  std::vector<int> convergence;           ///< step counts for a convergence study
  int trials = 0;                         ///< randomized round trips
  unsigned seed = 1;

  std::map<std::string, double> tolerances;
  std::map<std::string, double> expect_numbers;
  std::map<std::string, std::string> expect_strings;

  std::string out_dir;
  bool csv = false;
};

/// Parses a JSON document. Throws Error(Parse) on syntax errors, unknown keys
/// and ill-typed values.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Canonical serialization (sorted keys) used for the input digest.
std::string canonical(const Scenario& s);

/// Built inputs; throws Error(Parse) for unknown coefficient keys or
/// expressions that do not parse.
BForm build_form(const FormInput& f, const BManifoldSpec& spec);
BMultiVector build_bivector(const BivectorInput& b, const BManifoldSpec& spec);
ScalarField build_scalar(const std::string& text, const BManifoldSpec& spec);
Mask parse_mask(const std::string& key, const BManifoldSpec& spec);

/// The structure a scenario describes: catalog (or its omega/pi override),
/// deformed by (epsilon, delta), plus d(exact). The bivector additionally
/// carries the perturbation and locus shift.
LogSymplecticStructure scenario_structure(const Scenario& s, const BManifoldSpec& spec);
BMultiVector scenario_bivector(const Scenario& s, const BManifoldSpec& spec);

/// Declared tolerance, or the default.
double tolerance(const Scenario& s, const std::string& name, double fallback);

}  // namespace logsymp::cli
