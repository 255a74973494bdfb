#pragma once

#include <string>
#include <vector>

namespace preictal {

/// Runs one subcommand. Returns 0 on success, 1 on validation errors or bad usage,
/// 2 on I/O errors. `args` excludes the program name.
int cli(const std::vector<std::string>& args);

}  // namespace preictal
