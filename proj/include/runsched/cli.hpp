#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace runsched::cli {

// Exit codes: 0 clean, 1 divergence/validation error/miss with
// --fail-on-miss, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace runsched::cli
