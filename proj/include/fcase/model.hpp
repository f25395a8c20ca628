#pragma once

// Evidential context model: observations, observation sequences, evidential
// statements, the incident state machine and the reconstructed runs.

#include "fcase/errors.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fcase
{

/// Credibility weight in (0, 1], stored exactly as billionths.
class weight
{
public:
    static constexpr std::int64_t scale = 1'000'000'000;

    constexpr weight() = default;

    /// Throws validation_error unless 0 < nanos <= scale.
    static weight from_nanos( std::int64_t nanos );

    /// Parses a decimal literal with at most 9 fractional digits ("0.9", "1", "1.0").
    static std::optional< weight > parse( std::string_view text );

    /// Canonical decimal text: "1.0" or "0." followed by trimmed digits.
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] constexpr std::int64_t nanos() const { return _nanos; }
    [[nodiscard]] constexpr double value() const { return static_cast< double >( _nanos ) / scale; }

    friend constexpr auto operator<=>( weight, weight ) = default;

private:
    explicit constexpr weight( std::int64_t nanos ) : _nanos{ nanos } {}

    std::int64_t _nanos = scale;
};

struct property_def
{
    std::string name;
    bool universal = false;
    std::vector< std::string > member_states;

    static property_def any();

    friend bool operator==( const property_def&, const property_def& ) = default;
};

inline constexpr std::string_view universal_property_name = "any";

struct observation
{
    property_def property;
    std::optional< std::int64_t > t_ms;
    std::uint32_t min = 0;
    std::optional< std::uint32_t > max; // nullopt = unbounded slack
    weight w;

    [[nodiscard]] bool unbounded() const { return !max.has_value(); }

    // Duration bounds of a matching segment, in visited states.
    [[nodiscard]] bool admits_length( std::size_t length ) const
    {
        return length >= min && ( unbounded() || length <= std::size_t{ min } + *max );
    }

    friend bool operator==( const observation&, const observation& ) = default;
};

struct observation_sequence
{
    std::string label;
    std::vector< observation > observations;

    friend bool operator==( const observation_sequence&, const observation_sequence& ) = default;
};

/// Unordered set of observation sequences; equality ignores declaration order.
struct evidential_statement
{
    std::string label;
    std::vector< observation_sequence > sequences;

    [[nodiscard]] const observation_sequence* find( std::string_view sequence_label ) const;

    friend bool operator==( const evidential_statement& lhs, const evidential_statement& rhs );
};

struct transition
{
    std::string from;
    std::string event;
    std::string to;

    friend auto operator<=>( const transition&, const transition& ) = default;
};

struct state_machine
{
    std::vector< std::string > states;
    std::vector< std::string > events;
    std::vector< transition > transitions;
    std::vector< std::string > initial;
    std::vector< std::string > final;

    [[nodiscard]] bool has_state( std::string_view name ) const;
    [[nodiscard]] bool has_event( std::string_view name ) const;

    friend bool operator==( const state_machine&, const state_machine& ) = default;
};

/// q0 -e1-> q1 ... ; events.size() == states.size() - 1.
struct run
{
    std::vector< std::string > states;
    std::vector< std::string > events;

    [[nodiscard]] std::size_t length() const { return states.size(); }

    friend auto operator<=>( const run&, const run& ) = default;
};

/// Boundaries b0 = 0 <= b1 <= ... <= bk = n; segment i is [b_i, b_{i+1}).
/// An empty observation sequence has no boundaries.
struct partition
{
    std::vector< std::size_t > boundaries;

    friend auto operator<=>( const partition&, const partition& ) = default;
};

struct sequence_witness
{
    std::string label;
    partition split;

    friend auto operator<=>( const sequence_witness&, const sequence_witness& ) = default;
};

struct backtrace
{
    run trace;
    std::vector< sequence_witness > partitions; // sorted by label
    double score = 1.0;
    std::vector< std::string > included_sequences; // sorted

    friend bool operator==( const backtrace&, const backtrace& ) = default;
};

enum class aggregator
{
    product,
    minimum,
    mean,
};

[[nodiscard]] std::string_view to_string( aggregator method );
[[nodiscard]] std::optional< aggregator > parse_aggregator( std::string_view text );

struct recon_config
{
    std::size_t max_run_length = 64;
    std::size_t max_backtraces = 1000;
    aggregator method = aggregator::product;
    std::optional< bool > anchor_final; // nullopt: anchor iff the machine declares final states

    void validate() const;
};

// Scores within this distance are considered equal when ranking.
inline constexpr double score_tolerance = 1e-9;

struct length_interval
{
    std::size_t lo = 0;
    std::optional< std::size_t > hi; // nullopt = unbounded

    [[nodiscard]] bool contains( std::size_t n ) const { return n >= lo && ( !hi || n <= *hi ); }

    friend bool operator==( const length_interval&, const length_interval& ) = default;
};

/// Throws validation_error if q is not a declared state of m.
[[nodiscard]] bool eval_property( const property_def& p, const state_machine& m, std::string_view q );

[[nodiscard]] length_interval sequence_length_interval( const observation_sequence& os );

/// Empty input yields 1.0 under every method.
[[nodiscard]] double aggregate_credibility( std::span< const weight > weights, aggregator method );

enum class severity
{
    error,
    warning,
};

struct machine_finding
{
    severity level;
    std::string message;
    std::string subject; // offending identifier, empty when not applicable
};

[[nodiscard]] std::vector< machine_finding > validate_machine( const state_machine& m );

/// All observation weights of the given sequences, in order.
[[nodiscard]] std::vector< weight > collect_weights( std::span< const observation_sequence > sequences );

[[nodiscard]] std::string format_run( const run& r );

} // namespace fcase
