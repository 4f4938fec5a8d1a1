#include "ringloc/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ringloc::eval {
namespace {

double ratio(double num, double den) {
  if (num == den) return 1.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

std::string convention_name(StdConvention c) { return c == StdConvention::sample ? "sample" : "population"; }

StdConvention parse_convention(const std::string& s) {
  if (s == "sample") return StdConvention::sample;
  if (s == "population") return StdConvention::population;
  throw ParseError("unknown std convention '" + s + "'");
}

// JSON has no infinity; encode it as null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

RepeatabilityReport repeatability(std::span<const RunRecord> runs, StdConvention convention) {
  RepeatabilityReport report;
  report.n_runs = runs.size();
  report.convention = convention;
  for (const auto& run : runs) {
    if (!run.center) {
      ++report.n_failures;
      continue;
    }
    if (!run.center->allFinite()) throw InvalidArgument("repeatability: non-finite center in run " + run.id);
    report.ids.push_back(run.id);
    report.centers.push_back(*run.center);
  }
  const std::size_t n = report.centers.size();
  if (n < 2) throw InvalidArgument("repeatability: needs at least two successful runs");

  for (const auto& c : report.centers) report.mean += c;
  report.mean /= static_cast<double>(n);
  Vector3 ss = Vector3::Zero();
  for (const auto& c : report.centers) ss += (c - report.mean).cwiseAbs2();
  const double denom = convention == StdConvention::sample ? static_cast<double>(n - 1) : static_cast<double>(n);
  report.std_dev = (ss / denom).cwiseSqrt();

  for (const auto& c : report.centers) report.deviations.push_back((c - report.mean).norm());
  double sum = 0.0;
  for (double d : report.deviations) sum += d;
  report.mean_deviation = sum / static_cast<double>(n);
  return report;
}

RepeatabilityReport repeatability(std::span<const Point3> centers, StdConvention convention) {
  std::vector<RunRecord> runs;
  runs.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) runs.push_back({std::to_string(i + 1), centers[i]});
  return repeatability(runs, convention);
}

Comparison compare(const RepeatabilityReport& baseline, const RepeatabilityReport& refined) {
  Comparison c;
  c.deviation_ratio = ratio(baseline.mean_deviation, refined.mean_deviation);
  for (int i = 0; i < 3; ++i) c.std_ratio(i) = ratio(baseline.std_dev(i), refined.std_dev(i));
  c.baseline_failure_rate = baseline.failure_rate();
  c.refined_failure_rate = refined.failure_rate();
  c.deviation_improved = c.deviation_ratio > 1.0;
  c.failures_improved = c.refined_failure_rate < c.baseline_failure_rate;
  return c;
}

std::string to_json(const RepeatabilityReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < report.centers.size(); ++i) {
    const auto& c = report.centers[i];
    runs.push_back({{"id", report.ids[i]}, {"center", {c.x(), c.y(), c.z()}}, {"deviation", report.deviations[i]}});
  }
  const nlohmann::json j = {
      {"n_runs", report.n_runs},
      {"n_failures", report.n_failures},
      {"std_convention", convention_name(report.convention)},
      {"mean", {report.mean.x(), report.mean.y(), report.mean.z()}},
      {"std", {report.std_dev.x(), report.std_dev.y(), report.std_dev.z()}},
      {"mean_deviation", report.mean_deviation},
      {"runs", runs},
  };
  return j.dump(2);
}

RepeatabilityReport report_from_json(const std::string& document) {
  try {
    const auto j = nlohmann::json::parse(document);
    RepeatabilityReport r;
    r.n_runs = j.at("n_runs").get<std::size_t>();
    r.n_failures = j.at("n_failures").get<std::size_t>();
    r.convention = parse_convention(j.at("std_convention").get<std::string>());
    for (int i = 0; i < 3; ++i) {
      r.mean(i) = j.at("mean").at(i).get<double>();
      r.std_dev(i) = j.at("std").at(i).get<double>();
    }
    r.mean_deviation = j.at("mean_deviation").get<double>();
    for (const auto& run : j.at("runs")) {
      r.ids.push_back(run.at("id").get<std::string>());
      const auto& c = run.at("center");
      r.centers.emplace_back(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
      r.deviations.push_back(run.at("deviation").get<double>());
    }
    if (r.n_failures > r.n_runs || r.centers.size() != r.n_runs - r.n_failures) {
      throw ParseError("report: run counts are inconsistent");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

std::string to_json(const Comparison& c) {
  const nlohmann::json j = {
      {"deviation_ratio", number(c.deviation_ratio)},
      {"std_ratio", {number(c.std_ratio.x()), number(c.std_ratio.y()), number(c.std_ratio.z())}},
      {"baseline_failure_rate", c.baseline_failure_rate},
      {"refined_failure_rate", c.refined_failure_rate},
      {"deviation_improved", c.deviation_improved},
      {"failures_improved", c.failures_improved},
  };
  return j.dump(2);
}

std::string format_table(const RepeatabilityReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(9);
  out << std::left << std::setw(10) << "run" << std::right << std::setw(16) << "x" << std::setw(16) << "y"
      << std::setw(16) << "z" << std::setw(16) << "deviation" << '\n';
  for (std::size_t i = 0; i < report.centers.size(); ++i) {
    const auto& c = report.centers[i];
    out << std::left << std::setw(10) << report.ids[i] << std::right << std::setw(16) << c.x() << std::setw(16)
        << c.y() << std::setw(16) << c.z() << std::setw(16) << report.deviations[i] << '\n';
  }
  out << std::left << std::setw(10) << "mean" << std::right << std::setw(16) << report.mean.x() << std::setw(16)
      << report.mean.y() << std::setw(16) << report.mean.z() << std::setw(16) << report.mean_deviation << '\n';
  out << std::left << std::setw(10) << "std" << std::right << std::setw(16) << report.std_dev.x() << std::setw(16)
      << report.std_dev.y() << std::setw(16) << report.std_dev.z() << '\n';
  out << "runs " << report.n_runs << ", failures " << report.n_failures << " (" << convention_name(report.convention)
      << " std)\n";
  return out.str();
}

std::vector<RunRecord> parse_runs_table(const std::string& text) {
  std::vector<RunRecord> runs;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    const std::string id = std::to_string(runs.size() + 1);
    if (first == "failed") {
      runs.push_back({id, std::nullopt});
      continue;
    }
    Point3 p;
    std::istringstream fs(first);
    if (!(fs >> p.x()) || !(ls >> p.y() >> p.z())) {
      throw ParseError("runs table line " + std::to_string(line_no) + ": expected x y z or 'failed'");
    }
    runs.push_back({id, p});
  }
  return runs;
}

}  // namespace ringloc::eval
