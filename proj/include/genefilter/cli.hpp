#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genefilter::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Runs one subcommand (ingest | normalize | rank | optimize-fgf | evaluate |
// compare | report). `args` excludes the program name. Returns 0 on success,
// 2 on usage errors and 1 on runtime errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace genefilter::cli
