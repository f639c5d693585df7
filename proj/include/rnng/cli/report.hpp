#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace rnng::cli {

class MissingArtifactsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Human-readable summary of whatever a run directory holds: loss curves,
/// parse and sweep summaries, F1, metric distributions, exhaustion counts and
/// regression tables. Throws MissingArtifactsError naming the expected files
/// when none is present.
std::string pipeline_report(const std::filesystem::path& dir);

}  // namespace rnng::cli
