#pragma once

#include <string>
#include <vector>

namespace cubevar {

/// Entry point of the cubevar tool. Returns 0 when everything ran and all
/// asserted inequalities hold, 2 when an inequality failed, 1 on usage or
/// input errors.
int run_cli(int argc, char** argv);
/// Same, with the program name prepended.
int run_cli(const std::vector<std::string>& args);

}  // namespace cubevar
