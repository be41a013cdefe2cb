#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace archgraph {

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics to `err`. Returns 0 on success, 1 for usage and user errors,
// 2 for internal errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace archgraph
