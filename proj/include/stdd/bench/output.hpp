#pragma once

#include <string>
#include <vector>

#include "stdd/bench/experiment.hpp"

namespace stdd::bench {

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

std::string trace_csv(const IterationTrace& trace);
std::string summary_csv(const ExperimentReport& report);
std::string sweep_csv(const std::vector<SweepRow>& rows);
/// SVG 1.1 plot of e_e against iteration on a log y-axis, one polyline per method.
std::string error_svg(const ExperimentReport& report);
/// One row per space-time coefficient: a, k, value.
std::string field_csv(const SpaceTimeField& field);

void write_file(const std::string& path, const std::string& contents);

}  // namespace stdd::bench
