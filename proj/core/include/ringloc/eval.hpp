#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ringloc/types.hpp"

namespace ringloc::eval {

/// Denominator used for the per-axis standard deviation.
enum class StdConvention {
  population,  ///< divide by n
  sample,      ///< divide by n - 1
};

/// One localisation attempt; no center means the run failed.
struct RunRecord {
  std::string id;
  std::optional<Point3> center;
};

struct RepeatabilityReport {
  std::size_t n_runs = 0;
  std::size_t n_failures = 0;
  Point3 mean = Point3::Zero();
  Vector3 std_dev = Vector3::Zero();
  StdConvention convention = StdConvention::population;
  std::vector<std::string> ids;   ///< successful runs, input order
  std::vector<Point3> centers;    ///< successful runs, input order
  std::vector<double> deviations;  ///< distance of each center to the mean
  double mean_deviation = 0.0;

  std::size_t successes() const noexcept { return n_runs - n_failures; }
  double failure_rate() const noexcept {
    return n_runs == 0 ? 0.0 : static_cast<double>(n_failures) / static_cast<double>(n_runs);
  }
  friend bool operator==(const RepeatabilityReport&, const RepeatabilityReport&) = default;
};

/// Failures are counted and excluded from the statistics. Throws
/// InvalidArgument with fewer than two successful runs.
RepeatabilityReport repeatability(std::span<const RunRecord> runs,
                                  StdConvention convention = StdConvention::population);
RepeatabilityReport repeatability(std::span<const Point3> centers,
                                  StdConvention convention = StdConvention::population);

/// Baseline over refined: values above 1 mean the refined method is tighter.
struct Comparison {
  double deviation_ratio = 1.0;
  Vector3 std_ratio = Vector3::Ones();
  double baseline_failure_rate = 0.0;
  double refined_failure_rate = 0.0;
  bool deviation_improved = false;
  bool failures_improved = false;
};

Comparison compare(const RepeatabilityReport& baseline, const RepeatabilityReport& refined);

std::string to_json(const RepeatabilityReport& report);
RepeatabilityReport report_from_json(const std::string& document);
std::string to_json(const Comparison& comparison);

/// Fixed-width table: one row per run, then mean and standard deviation rows.
std::string format_table(const RepeatabilityReport& report);

/// Reads rows of "x y z" (or "x,y,z"); a row reading "failed" counts as a
/// failure. Blank lines and '#' comments are skipped.
std::vector<RunRecord> parse_runs_table(const std::string& text);

}  // namespace ringloc::eval
