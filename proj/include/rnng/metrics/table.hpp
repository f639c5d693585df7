#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rnng/metrics/metrics.hpp"

namespace rnng::metrics {

inline constexpr const char* kMetricsHeader =
    "sent\tidx\ttoken\tdistance\tsurprisal\tentropy\tentropy_delta\tcontent\texhausted";

/// Shortest text that reads back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

void write_metrics(std::ostream& out, const std::vector<MetricRow>& rows);
void write_metrics(const std::filesystem::path& path, const std::vector<MetricRow>& rows);
std::vector<MetricRow> read_metrics(std::istream& in);
std::vector<MetricRow> read_metrics(const std::filesystem::path& path);

/// Splits a tab-separated line.
std::vector<std::string> split_tabs(const std::string& line);

}  // namespace rnng::metrics
