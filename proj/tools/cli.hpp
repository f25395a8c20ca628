#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fcase::cli
{

enum exit_code : int
{
    success = 0,  // explained / agrees / clean
    negative = 1, // no explanation, theory disagrees, integrity or check findings
    failure = 2,  // usage, validation or internal error
};

/// Runs one invocation; args excludes the program name. Reports go to out,
/// diagnostics and usage text to err.
int run_cli( const std::vector< std::string >& args, std::ostream& out, std::ostream& err );

} // namespace fcase::cli
