#pragma once

namespace msfwi {

/// Command-line entry point (forward / invert / locate / report).
/// Exit codes: 0 success, 2 configuration error, 3 solver failure,
/// 4 non-convergence (results still written).
int cli_main(int argc, const char* const* argv);

}  // namespace msfwi
