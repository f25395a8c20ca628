#pragma once

// Event reconstruction: which runs of the incident machine explain every
// witness story of an evidential statement, ranked by credibility.

#include "fcase/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace fcase
{

struct recon_result
{
    std::vector< backtrace > backtraces;
    bool cap_exceeded = false; // more backtraces existed than max_backtraces
};

/// Every partition of r's states into |os| consecutive segments that satisfy
/// the observations' properties and duration bounds, in lexicographic order of
/// boundaries. An empty sequence is vacuous and yields one empty partition.
[[nodiscard]] std::vector< partition > explains( const state_machine& m, const run& r, const observation_sequence& os );

/// Strict ranking order: score descending (within score_tolerance), run length
/// ascending, event labels lexicographically, then state labels.
[[nodiscard]] bool ranks_before( const backtrace& lhs, const backtrace& rhs );

/// Backward search over the product of the machine with one segment tracker
/// per sequence. Complete for runs up to cfg.max_run_length states.
[[nodiscard]] recon_result reconstruct( const state_machine& m, const evidential_statement& es, const recon_config& cfg );

inline constexpr std::size_t oracle_max_run_length = 12;

/// Exhaustive forward enumeration filtered by explains(). Reference for
/// reconstruct; refuses caps above oracle_max_run_length.
[[nodiscard]] recon_result enumerate_runs_oracle( const state_machine& m, const evidential_statement& es,
                                                  const recon_config& cfg );

struct consistent_subset
{
    std::vector< std::string > included; // sorted
    std::vector< std::string > excluded; // sorted
    double score = 1.0;
    backtrace witness;
};

inline constexpr std::size_t max_diagnosis_sequences = 16;

/// Subset-maximal jointly explainable sets of sequences, ranked by size, then
/// score, then label set.
[[nodiscard]] std::vector< consistent_subset > maximal_consistent_subsets( const state_machine& m,
                                                                          const evidential_statement& es,
                                                                          const recon_config& cfg );

struct theory_verdict
{
    bool agrees = false;
    bool complete = true; // false when the backtrace list was truncated
    std::vector< backtrace > backtraces;
    std::vector< consistent_subset > diagnosis; // only when !agrees
};

[[nodiscard]] theory_verdict check_theory( const state_machine& m, const evidential_statement& es,
                                           const observation_sequence& theory, const recon_config& cfg );

struct ranked_theory
{
    std::string label;
    theory_verdict verdict;
};

/// Agreeing theories first, longer and more credible ones ahead; then the
/// disagreeing ones by label.
[[nodiscard]] std::vector< ranked_theory > rank_theories( const state_machine& m, const evidential_statement& es,
                                                          std::span< const observation_sequence > theories,
                                                          const recon_config& cfg );

} // namespace fcase
