#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace amenwalk {

inline constexpr const char* version = "0.1.0";

// Runs one `amenwalk` invocation; args excludes the program name.  Returns
// 0 on success, 2 on usage or schema errors, 3 when a computation or an
// output write fails.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amenwalk
