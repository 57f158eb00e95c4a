#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrcp/experiment.hpp"

namespace vrcp {

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(std::string_view text);

/// Header of the per-row CSV report.
inline constexpr std::string_view kReportCsvHeader = "method,epsilon,norm,split,coverage,avg_size,wall_ms";

/// Regression intervals that come out empty count as length 0 and as misses.
inline constexpr std::string_view kEmptyIntervalPolicy = "empty interval: length 0, non-covering";

/// Mean and normal-approximation 95% half-width over splits of one
/// (method, epsilon, norm) group.
struct AggregateRow {
  std::string method;
  double epsilon = 0.0;
  Norm norm = Norm::linf;
  std::size_t n_splits = 0;
  double coverage_mean = 0.0;
  double coverage_ci95 = 0.0;
  double size_mean = 0.0;
  double size_ci95 = 0.0;
  double wall_ms_mean = 0.0;
};

/// Groups in order of first appearance.
std::vector<AggregateRow> aggregate(std::span<const ReportRow> rows);

/// Byte-stable for identical reports.
std::string emit_report(const ExperimentReport& report, ReportFormat format);

/// Parses the CSV produced by emit_report. Throws DataError with the line.
std::vector<ReportRow> parse_report_csv(std::string_view text);

/// Set-size distribution of one (method, epsilon), summed over splits.
struct SizeHistogram {
  std::string method;
  double epsilon = 0.0;
  std::vector<std::size_t> counts;  // index = set size 0..K

  std::size_t total() const noexcept;
};

/// Throws ConfigError for regression reports.
std::vector<SizeHistogram> size_histogram(const ExperimentReport& report);
std::vector<SizeHistogram> size_histogram(std::span<const SizeCounts> counts);

/// Columns: method,epsilon,split,size,count
std::string emit_size_counts_csv(std::span<const SizeCounts> counts);
std::vector<SizeCounts> parse_size_counts_csv(std::string_view text);

/// Columns: method,epsilon,size,count,fraction
std::string emit_histogram_csv(std::span<const SizeHistogram> histograms);

/// Columns: method,epsilon,split,point,score,bound,region,covered,size
std::string emit_trace_csv(std::span<const TracePoint> trace);

/// Rebuilds coverage and average size per (method, epsilon, split) from a
/// trace. wall_ms and norm are left at their defaults.
std::vector<ReportRow> reaggregate_trace(std::span<const TracePoint> trace);

/// File names written next to each other by write_report_files.
inline constexpr const char* kReportCsvName = "report.csv";
inline constexpr const char* kReportJsonName = "report.json";
inline constexpr const char* kSizeCountsName = "set_sizes.csv";
inline constexpr const char* kTraceName = "trace.csv";

/// Writes report.csv and report.json, plus set_sizes.csv (classification) and
/// trace.csv (when traced). Creates `dir`. Returns the written paths.
std::vector<std::filesystem::path> write_report_files(const ExperimentReport& report,
                                                      const std::filesystem::path& dir);

/// Histogram for the report CSV at `report_csv`, read from its sibling
/// set_sizes.csv. Throws ConfigError when there is none (regression runs).
std::vector<SizeHistogram> histogram_from_report_file(const std::filesystem::path& report_csv);

}  // namespace vrcp
