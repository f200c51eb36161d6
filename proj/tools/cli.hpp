// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace esforge::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace esforge::cli
