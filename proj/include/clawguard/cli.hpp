#pragma once

#include <iosfwd>

namespace clawguard::cli {

// Exit codes: 0 success or clean ALLOW, 2 findings present (FLAG),
// 3 DENY/REJECT outcomes, 1 usage or operational error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clawguard::cli
