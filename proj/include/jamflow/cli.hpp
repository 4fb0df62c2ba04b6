#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace jamflow {

/// Runs one `jamflow` invocation. `args[0]` is the program name.
/// Returns 0 on success, 1 on validation or config errors and 2 on I/O errors.
int run_cli(std::span<std::string const> args, std::ostream& out, std::ostream& err);

}  // namespace jamflow
