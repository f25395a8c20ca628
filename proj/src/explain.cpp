#include "fcase/recon.hpp"
#include "recon_detail.hpp"

#include <algorithm>
#include <set>

namespace fcase
{

namespace detail
{

void validate_inputs( const state_machine& m, const evidential_statement& es, const recon_config& cfg )
{
    cfg.validate();
    for ( const auto& f : validate_machine( m ) )
        if ( f.level == severity::error )
            throw validation_error( "invalid machine: " + f.message );
    std::set< std::string > labels;
    for ( const auto& os : es.sequences ) {
        if ( !labels.insert( os.label ).second )
            throw validation_error( "duplicate sequence label '" + os.label + "'" );
        for ( const auto& o : os.observations )
            for ( const auto& q : o.property.member_states )
                if ( !m.has_state( q ) )
                    throw validation_error( "property '" + o.property.name + "' names unknown state '" + q + "'" );
    }
}

bool anchors_final( const state_machine& m, const recon_config& cfg )
{
    return !m.final.empty() && cfg.anchor_final.value_or( true );
}

std::vector< std::string > sorted_labels( const evidential_statement& es )
{
    std::vector< std::string > labels;
    for ( const auto& os : es.sequences )
        labels.push_back( os.label );
    std::sort( labels.begin(), labels.end() );
    return labels;
}

double statement_score( const evidential_statement& es, aggregator method )
{
    const auto weights = collect_weights( es.sequences );
    return aggregate_credibility( weights, method );
}

void rank_and_truncate( std::vector< backtrace >& list, const recon_config& cfg, bool& cap_exceeded )
{
    std::sort( list.begin(), list.end(), ranks_before );
    if ( list.size() > cfg.max_backtraces ) {
        list.resize( cfg.max_backtraces );
        cap_exceeded = true;
    }
}

} // namespace detail

namespace
{

void validate_run( const state_machine& m, const run& r )
{
    if ( r.states.empty() || r.events.size() + 1 != r.states.size() )
        throw validation_error( "run must have n >= 1 states and n - 1 events" );
    for ( const auto& q : r.states )
        if ( !m.has_state( q ) )
            throw validation_error( "run visits unknown state '" + q + "'" );
    for ( std::size_t i = 0; i < r.events.size(); ++i ) {
        const transition step{ r.states[ i ], r.events[ i ], r.states[ i + 1 ] };
        if ( std::find( m.transitions.begin(), m.transitions.end(), step ) == m.transitions.end() )
            throw validation_error( "run uses missing transition " + step.from + " --" + step.event + "--> " + step.to );
    }
}

void split( const state_machine& m, const run& r, const observation_sequence& os, std::size_t index,
            std::vector< std::size_t >& boundaries, std::vector< partition >& out )
{
    const std::size_t n = r.length();
    const std::size_t start = boundaries.back();
    if ( index == os.observations.size() ) {
        if ( start == n )
            out.push_back( { boundaries } );
        return;
    }
    const observation& o = os.observations[ index ];
    for ( std::size_t end = start; end <= n; ++end ) {
        // Segment [start, end) must satisfy the property at every state.
        if ( end > start && !eval_property( o.property, m, r.states[ end - 1 ] ) )
            break;
        if ( !o.admits_length( end - start ) )
            continue;
        boundaries.push_back( end );
        split( m, r, os, index + 1, boundaries, out );
        boundaries.pop_back();
    }
}

} // namespace

std::vector< partition > explains( const state_machine& m, const run& r, const observation_sequence& os )
{
    validate_run( m, r );
    if ( os.observations.empty() )
        return { partition{} };
    std::vector< partition > out;
    std::vector< std::size_t > boundaries{ 0 };
    split( m, r, os, 0, boundaries, out );
    return out;
}

bool ranks_before( const backtrace& lhs, const backtrace& rhs )
{
    if ( lhs.score > rhs.score + score_tolerance )
        return true;
    if ( rhs.score > lhs.score + score_tolerance )
        return false;
    if ( lhs.trace.length() != rhs.trace.length() )
        return lhs.trace.length() < rhs.trace.length();
    if ( lhs.trace.events != rhs.trace.events )
        return lhs.trace.events < rhs.trace.events;
    return lhs.trace.states < rhs.trace.states;
}

recon_result enumerate_runs_oracle( const state_machine& m, const evidential_statement& es, const recon_config& cfg )
{
    if ( cfg.max_run_length > oracle_max_run_length )
        throw refusal_error( "oracle refuses max_run_length above " + std::to_string( oracle_max_run_length ) );
    detail::validate_inputs( m, es, cfg );

    const bool anchored = detail::anchors_final( m, cfg );
    const double score = detail::statement_score( es, cfg.method );
    const auto labels = detail::sorted_labels( es );

    std::vector< backtrace > found;
    run current;
    auto visit = [ & ]( auto&& self ) -> void {
        const std::string last = current.states.back();
        const bool ends_ok =
                !anchored || std::find( m.final.begin(), m.final.end(), last ) != m.final.end();
        if ( ends_ok ) {
            backtrace bt{ current, {}, score, labels };
            bool explained = true;
            for ( const auto& os : es.sequences ) {
                auto parts = explains( m, current, os );
                if ( parts.empty() ) {
                    explained = false;
                    break;
                }
                bt.partitions.push_back( { os.label, parts.front() } );
            }
            if ( explained ) {
                std::sort( bt.partitions.begin(), bt.partitions.end() );
                found.push_back( std::move( bt ) );
            }
        }
        if ( current.length() == cfg.max_run_length )
            return;
        for ( const auto& t : m.transitions ) {
            if ( t.from != last )
                continue;
            current.states.push_back( t.to );
            current.events.push_back( t.event );
            self( self );
            current.states.pop_back();
            current.events.pop_back();
        }
    };

    std::set< std::string > initial( m.initial.begin(), m.initial.end() );
    for ( const auto& q0 : initial ) {
        current = run{ { q0 }, {} };
        visit( visit );
    }

    // Duplicate transition triples would yield the same run twice.
    std::sort( found.begin(), found.end(), ranks_before );
    found.erase( std::unique( found.begin(), found.end() ), found.end() );

    recon_result result;
    detail::rank_and_truncate( found, cfg, result.cap_exceeded );
    result.backtraces = std::move( found );
    return result;
}

} // namespace fcase
