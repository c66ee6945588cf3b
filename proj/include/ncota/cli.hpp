#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ncota {

// Exit codes: 0 success, 1 validation failure (bad flags, bad config, a
// failed verification check), 2 runtime error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ncota
