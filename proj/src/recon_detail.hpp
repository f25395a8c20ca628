#pragma once

#include "fcase/model.hpp"

#include <string>
#include <vector>

namespace fcase::detail
{

// Throws validation_error for an invalid machine, duplicate sequence labels,
// properties naming undeclared states, or a bad configuration.
void validate_inputs( const state_machine& m, const evidential_statement& es, const recon_config& cfg );

[[nodiscard]] bool anchors_final( const state_machine& m, const recon_config& cfg );

[[nodiscard]] std::vector< std::string > sorted_labels( const evidential_statement& es );

[[nodiscard]] double statement_score( const evidential_statement& es, aggregator method );

// Sorts by ranks_before and truncates to cfg.max_backtraces.
void rank_and_truncate( std::vector< backtrace >& list, const recon_config& cfg, bool& cap_exceeded );

} // namespace fcase::detail
