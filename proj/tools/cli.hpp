#pragma once

#include <iosfwd>

#include "rsw/verify.hpp"

namespace rsw::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kPartial = 2;

/// Full command line handling. verify_opts replaces the defaults of the verify subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const VerifyOptions* verify_opts = nullptr);

}  // namespace rsw::cli
