#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cht::cli {

/// Runs the command line `args` (program name first). Results go to `out`
/// unless --output names a file; diagnostics go to `err` as
/// "error[<category>]: <message>". Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Thread count used when --threads is absent: $CHT_THREADS if set, else the
/// hardware concurrency.
unsigned threads_from_environment();

}  // namespace cht::cli
