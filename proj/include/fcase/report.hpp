#pragma once

// Plain-text investigator reports. Field order is fixed and scores carry
// nine fractional digits so that reports can be compared byte for byte.

#include "fcase/recon.hpp"

#include <string>

namespace fcase
{

[[nodiscard]] std::string format_score( double score );

[[nodiscard]] std::string format_partition( const partition& p );

[[nodiscard]] std::string format_backtraces( std::string_view evidence_label, const recon_result& result );

[[nodiscard]] std::string format_subsets( const std::vector< consistent_subset >& subsets );

[[nodiscard]] std::string format_verdict( std::string_view theory_label, const theory_verdict& verdict );

[[nodiscard]] std::string format_ranking( const std::vector< ranked_theory >& ranking );

} // namespace fcase
