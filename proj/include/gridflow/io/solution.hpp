#pragma once

#include <string>
#include <string_view>

#include "gridflow/grid/network.hpp"
#include "gridflow/powerflow/cim.hpp"
#include "gridflow/powerflow/newton.hpp"
#include "gridflow/threephase/network.hpp"

namespace gridflow {

enum class OutputFormat { json, csv };

/// "json" or "csv"; throws std::invalid_argument otherwise.
OutputFormat parse_output_format(std::string_view name);

// CSV columns: bus,vm_pu,va_deg (single-phase) or bus,phase,vm_pu,va_deg
// (three-phase); magnitudes with 6 decimals, angles in degrees with 3.
// JSON carries every voltage at full precision plus the iteration history
// and the timing split.

std::string write_solution(const PowerFlowSolution& sol, const SinglePhaseNetwork& net, OutputFormat format);
std::string write_solution(const ThreePhaseSolution& sol, const ThreePhaseNetwork& net, OutputFormat format);

}  // namespace gridflow
