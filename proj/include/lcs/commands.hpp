#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lcs/config.hpp"

namespace lcs {

struct Artifact {
  std::string file;  // relative to the output directory
  std::size_t rows = 0;
  std::size_t bytes = 0;
  std::string fnv1a64;
};

struct RunReport {
  Command command = Command::Ftle;
  std::vector<Artifact> artifacts;
  std::vector<std::string> soft_failures;
};

/// Runs the configured command, writing its artifacts and manifest.json into
/// `out_dir` (created if missing). Progress lines go to `progress`.
/// Invalid inputs that only show up at run time throw InvalidArgument.
RunReport run_command(const RunConfig& config, const std::string& out_dir, std::ostream& progress);

}  // namespace lcs
