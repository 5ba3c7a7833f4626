#pragma once

#include <string>
#include <vector>

namespace oiqa::cli {

// Entry point behind the oiqa binary; also invoked in-process by the tests.
// argv excludes the program name. Returns the process exit status.
int run(const std::vector<std::string>& argv);

}  // namespace oiqa::cli
