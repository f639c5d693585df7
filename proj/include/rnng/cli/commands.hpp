#pragma once

namespace rnng::cli {

/// Entry point of the `rnng` binary. Returns 0 on success, 1 on a runtime
/// failure and 2 on a usage or configuration error.
int run(int argc, char** argv);

}  // namespace rnng::cli
