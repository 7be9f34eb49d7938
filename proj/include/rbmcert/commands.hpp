#pragma once

#include <string>
#include <vector>

#include "rbmcert/errors.hpp"
#include "rbmcert/io.hpp"

namespace rbmcert {

// Bulk numeric output of a command, written as <name>.csv.
struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  Matrix rows;
};

struct CommandResult {
  io::Json result;
  ExitCode code = ExitCode::kOk;
  std::vector<std::string> summary;  // human-readable lines
  std::vector<CsvTable> tables;
};

const std::vector<std::string>& command_names();

// Runs one of classify, existence, certify, lambda, simulate, particles,
// tailcheck on a parsed problem document. Failures of the checked property
// come back as a nonzero code; malformed input and solver failures throw
// Error.
CommandResult run_command(const std::string& name, const io::Json& problem);

}  // namespace rbmcert
