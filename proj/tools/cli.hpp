#pragma once

namespace scca::cli {

// Exit codes: 0 success, 2 input error, 3 model infeasibility,
// 4 cross-validation fold failure.
int run_cli(int argc, char** argv);

}  // namespace scca::cli
