#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "csac/runtime/metrics.hpp"

namespace csac::app {

/// `step,return,lat_ms_A,...,p95_A,...,alpha,q_loss,pi_loss,tps,wall_s`, with
/// slice columns lettered A, B, C, ...
std::vector<std::string> metrics_header(std::size_t slices);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);
/// Splits one CSV record, undoing csv_escape.
std::vector<std::string> csv_split(std::string_view line);

/// Shortest text that parses back to the same double; empty for NaN.
std::string format_metric(double v);

/// Appends rows to a CSV file, flushing after each. Throws IoError.
class MetricsCsvWriter {
 public:
  MetricsCsvWriter(const std::filesystem::path& path, std::size_t slices);
  void write(const runtime::MetricsRow& row);

 private:
  std::filesystem::path path_;
  std::size_t slices_;
  std::ofstream out_;
};

/// Reads a file written by MetricsCsvWriter. Empty fields read as NaN.
/// Throws FormatError on a header or field mismatch.
std::vector<runtime::MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// gnuplot-ready companion: same columns, each value the trailing mean of
/// the last `window` rows (NaN entries skipped). Throws IoError.
void write_smoothed_dat(const std::filesystem::path& path, const std::vector<runtime::MetricsRow>& rows,
                        std::size_t slices, std::size_t window = 10);

/// Mean per-step reward over the rows whose intervals lie in (from, to].
double window_return(const std::vector<runtime::MetricsRow>& rows, std::uint64_t from, std::uint64_t to);

}  // namespace csac::app
