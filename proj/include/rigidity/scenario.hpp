#ifndef RIGIDITY_SCENARIO_HPP
#define RIGIDITY_SCENARIO_HPP

#include "rigidity/cocycle.hpp"
#include "rigidity/conjugacy.hpp"
#include "rigidity/subres.hpp"
#include "rigidity/toral.hpp"
#include "rigidity/trig_poly.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rigidity {

/// Declared expected outcome of one predicate on a scenario.  `provenance`
/// records whether the expectation comes from a proved statement about the
/// family ("theorem") or from calibration runs ("calibrated").
struct PredicateSpec {
    std::string name;
    std::string comparison;  // "lt" | "gt"
    double threshold = 0;
    std::string provenance;  // "theorem" | "calibrated"
};

/// One perturbation term: amplitude * sin(2 pi k.x) along a named direction
/// of the linear splitting (u | ss | ws).
struct ScenarioTerm {
    std::vector<int> k;
    std::string direction;
};

struct Scenario {
    std::string name;
    std::string description;
    IntMatrix matrix;
    SplittingSpec splitting;
    std::vector<ScenarioTerm> terms;
    double default_amplitude = 1e-3;
    Role strong_role = Role::SS;   // sampling direction for strong preservation
    bool leaf_predicates = false;  // 1-d u/ss/ws machinery applies
    std::vector<PredicateSpec> expectations;
};

std::vector<Scenario> builtin_scenarios();
const Scenario& find_scenario(const std::string& name);

/// Validates and instantiates the perturbation at the given amplitude.
Perturbation make_perturbation(const Scenario& s, double amplitude);

struct RunOverrides {
    std::optional<double> amplitude;
    std::optional<int> samples;      // quasi-random sample count
    std::optional<double> tolerance; // conjugacy series tolerance
    std::optional<std::vector<std::string>> only;  // restrict to these predicates
};

/// Deterministic seeded low-discrepancy points in [0,1)^d.
std::vector<Eigen::VectorXd> quasi_random_points(int n, int d, std::uint64_t seed);

/// Runs the scenario's declared predicates; per-predicate errors are captured
/// in the report instead of aborting the batch.  Deterministic given seed.
nlohmann::json run_scenario(const Scenario& s, const RunOverrides& o, std::uint64_t seed);

/// True iff every declared predicate ran and met its threshold.
bool report_all_pass(const nlohmann::json& report);

/// Structural check of the report schema; returns problems (empty = valid).
std::vector<std::string> validate_report(const nlohmann::json& report);

/// Writes JSON atomically (temp file + rename).
void write_report_atomic(const nlohmann::json& report, const std::string& path);

// serialization helpers
nlohmann::json matrix_to_json(const IntMatrix& m);
IntMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json perturbation_to_json(const Perturbation& p);

/// {chi, eps, dims, terms: [{block, type, indices, coeff}]}; indices are the
/// monomial exponents over the graded coordinates.
nlohmann::json poly_map_to_json(const GradedPolyMap& g);
GradedPolyMap poly_map_from_json(const nlohmann::json& j);

} // namespace rigidity

#endif
