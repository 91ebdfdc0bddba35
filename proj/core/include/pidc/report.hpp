#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "pidc/baselines.hpp"
#include "pidc/pid.hpp"
#include "pidc/reduction.hpp"
#include "pidc/toys.hpp"

namespace pidc {

// JSON renderings of library results.  Numbers are emitted with full
// double precision so reports round-trip.

nlohmann::json lattice_json(const RedundancyLattice& lattice);
nlohmann::json pid_result_json(const PidResult& result, const std::string& input);
nlohmann::json reduction_json(const ReductionReport& report);
nlohmann::json directed_differences_json(const DirectedDifferences& differences,
                                         std::optional<double> reing_complexity);
nlohmann::json comparison_json(const Comparison& comparison);
nlohmann::json toy_json(const ToyResult& result);

}  // namespace pidc
