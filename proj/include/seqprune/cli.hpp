#pragma once

#include <string>
#include <vector>

namespace seqprune {

/// Entry point behind the seqprune binary. `args` excludes argv[0].
/// Returns 0 on success, 2 on configuration errors, 3 on data errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace seqprune
