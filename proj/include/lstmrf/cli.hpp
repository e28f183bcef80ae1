#pragma once

#include <string>
#include <vector>

namespace lstmrf {

/// Full CLI entry point: `args` are the command-line arguments without the
/// program name. Returns the process exit code (0 success, 2 I/O,
/// 3 validation, 4 serialization, 5 numerical divergence). Errors print one
/// line to stderr: "lstmrf: error [category]: detail".
int cli_main(const std::vector<std::string>& args);

} // namespace lstmrf
