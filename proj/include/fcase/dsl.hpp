#pragma once

// The `.fcase` case-specification language: a line-oriented textual form for
// the incident state machine, state-set properties, weighted observations,
// observation sequences, theories and evidential statements.
//
//   case "brake" {
//     machine {
//       states { ok init; leak; fail; }
//       events { wear burst }
//       transitions { ok --wear--> leak; leak --burst--> fail; }
//     }
//     property P_fail = { fail };
//     observation o1 = (P_fail, t=1500, min=1, max=0, w=0.9);
//     sequence s1 = [o1];
//     evidence es1 = { s1 };
//   }

#include "fcase/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fcase::dsl
{

// Positions are carried for diagnostics only; they never take part in
// structural equality, so a reformatted case compares equal to its source.
struct source_pos
{
    std::uint32_t line = 1;
    std::uint32_t column = 1;

    friend constexpr bool operator==( const source_pos&, const source_pos& ) { return true; }
};

struct ident
{
    std::string name;
    source_pos pos;

    friend bool operator==( const ident&, const ident& ) = default;
};

struct diagnostic
{
    severity level = severity::error;
    std::string message;
    std::uint32_t line = 1;
    std::uint32_t column = 1;

    friend bool operator==( const diagnostic&, const diagnostic& ) = default;
};

[[nodiscard]] std::string to_string( const diagnostic& d );
[[nodiscard]] bool has_errors( const std::vector< diagnostic >& diagnostics );

struct state_decl
{
    ident name;
    bool initial = false;
    bool final = false;

    friend bool operator==( const state_decl&, const state_decl& ) = default;
};

struct transition_decl
{
    ident from;
    ident event;
    ident to;

    friend bool operator==( const transition_decl&, const transition_decl& ) = default;
};

struct machine_decl
{
    source_pos pos;
    std::vector< state_decl > states;
    std::vector< ident > events;
    std::vector< transition_decl > transitions;

    friend bool operator==( const machine_decl&, const machine_decl& ) = default;
};

struct property_decl
{
    ident name;
    bool universal = false;
    std::vector< ident > members;

    friend bool operator==( const property_decl&, const property_decl& ) = default;
};

struct observation_decl
{
    ident name;
    ident property;
    std::optional< std::int64_t > t_ms;
    std::uint32_t min = 0;
    std::optional< std::uint32_t > max;
    std::int64_t w_nanos = weight::scale; // range-checked by check_case
    source_pos w_pos;

    friend bool operator==( const observation_decl&, const observation_decl& ) = default;
};

/// `sequence` or `theory`: an ordered list of observation references.
struct sequence_decl
{
    ident name;
    std::vector< ident > items;

    friend bool operator==( const sequence_decl&, const sequence_decl& ) = default;
};

struct evidence_decl
{
    ident name;
    std::vector< ident > sequences;

    friend bool operator==( const evidence_decl&, const evidence_decl& ) = default;
};

struct case_spec
{
    std::string name;
    machine_decl machine;
    std::vector< property_decl > properties;
    std::vector< observation_decl > observations;
    std::vector< sequence_decl > sequences;
    std::vector< sequence_decl > theories;
    std::vector< evidence_decl > statements;

    friend bool operator==( const case_spec&, const case_spec& ) = default;
};

struct parse_result
{
    std::optional< case_spec > spec; // engaged iff diagnostics holds no error
    std::vector< diagnostic > diagnostics;

    [[nodiscard]] bool ok() const { return spec.has_value(); }
};

[[nodiscard]] parse_result parse_case( std::string_view source );

/// Semantic findings: unresolved references, duplicates, timestamp order,
/// weight range and machine validation. Sorted by position.
[[nodiscard]] std::vector< diagnostic > check_case( const case_spec& spec );

/// Canonical text; re-parses to an equal case_spec.
[[nodiscard]] std::string format_case( const case_spec& spec );

// Resolution into the evidential model. These expect a check-clean spec and
// throw validation_error on unresolved names.
[[nodiscard]] state_machine to_machine( const case_spec& spec );
[[nodiscard]] property_def resolve_property( const case_spec& spec, std::string_view name );
[[nodiscard]] observation_sequence resolve_sequence( const case_spec& spec, std::string_view label );
[[nodiscard]] evidential_statement resolve_statement( const case_spec& spec, std::string_view label );

/// Declares the statement's observations, sequences and the statement itself
/// in spec. Observations are named <sequence>_<n>.
void add_statement( case_spec& spec, const evidential_statement& statement );

/// The declarations add_statement would produce, as standalone case text lines.
[[nodiscard]] std::string format_statement_fragment( const evidential_statement& statement );

} // namespace fcase::dsl
