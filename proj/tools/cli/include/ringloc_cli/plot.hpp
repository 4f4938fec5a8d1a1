#pragma once

#include <span>
#include <string>

#include "ringloc/eval.hpp"

namespace ringloc::cli {

/// id, x, y, z, deviation per successful run.
std::string scatter_csv(const eval::RepeatabilityReport& report);
/// x/y and x/z offsets from the mean center, one panel each.
std::string scatter_svg(const eval::RepeatabilityReport& report, const std::string& title);

struct TrendPoint {
  double value = 0.0;
  eval::RepeatabilityReport report;
};

std::string trend_csv(std::span<const TrendPoint> points, const std::string& axis);
/// Mean deviation and per-axis std against the sweep value.
std::string trend_svg(std::span<const TrendPoint> points, const std::string& axis);

}  // namespace ringloc::cli
