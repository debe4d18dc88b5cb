#pragma once

#include <ostream>
#include <string>

#include "exportscore/runconfig.hpp"

namespace exportscore::cli {

// Dispatches one subcommand (simulate, train, predict, evaluate, score,
// analyze). Returns the process exit status; failures are reported on `err`
// as a single machine-parsable line.
int run(const std::string& subcommand, const RunConfig& config, std::ostream& log,
        std::ostream& err);

}  // namespace exportscore::cli
