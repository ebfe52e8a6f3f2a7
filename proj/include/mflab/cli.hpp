#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mflab::cli {

/// Exit codes: 0 success, 1 computational failure (JSON on stderr) or failed
/// acceptance criterion, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace mflab::cli
