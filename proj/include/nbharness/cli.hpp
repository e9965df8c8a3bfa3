#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nbharness {

// Entry point of the `nbharness` binary. Returns 0 on success, 1 on a domain
// error (message on `err`), 2 on a usage error (help text on `err`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nbharness
