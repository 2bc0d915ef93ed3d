#ifndef SOAR_CLI_HPP
#define SOAR_CLI_HPP

#include <string>
#include <vector>

namespace soar {

/// Command-line entry point; `args` excludes the program name.
/// Returns 0 on success, 1 on usage/validation errors, 2 on runtime errors.
int run_cli(const std::vector<std::string>& args);

} // namespace soar

#endif
