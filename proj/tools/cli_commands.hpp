#pragma once

namespace tagspot::cli {

/// Entry point of the `tagspot` tool. Exit codes: 0 success, 1 validation
/// error, 2 I/O error.
int run(int argc, char** argv);

}  // namespace tagspot::cli
