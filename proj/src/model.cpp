#include "fcase/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace fcase
{

weight weight::from_nanos( std::int64_t nanos )
{
    if ( nanos <= 0 || nanos > scale )
        throw validation_error( "weight out of range (0, 1]" );
    return weight{ nanos };
}

std::optional< weight > weight::parse( std::string_view text )
{
    std::size_t i = 0;
    std::int64_t whole = 0;
    if ( text.empty() || text[ 0 ] < '0' || text[ 0 ] > '9' )
        return std::nullopt;
    while ( i < text.size() && text[ i ] >= '0' && text[ i ] <= '9' ) {
        whole = whole * 10 + ( text[ i ] - '0' );
        if ( whole > 1 )
            return std::nullopt;
        ++i;
    }
    std::int64_t frac = 0;
    int digits = 0;
    if ( i < text.size() ) {
        if ( text[ i ] != '.' )
            return std::nullopt;
        ++i;
        if ( i == text.size() )
            return std::nullopt;
        for ( ; i < text.size(); ++i ) {
            if ( text[ i ] < '0' || text[ i ] > '9' || digits == 9 )
                return std::nullopt;
            frac = frac * 10 + ( text[ i ] - '0' );
            ++digits;
        }
    }
    for ( ; digits < 9; ++digits )
        frac *= 10;
    const std::int64_t nanos = whole * scale + frac;
    if ( nanos <= 0 || nanos > scale )
        return std::nullopt;
    return weight{ nanos };
}

std::string weight::to_string() const
{
    if ( _nanos == scale )
        return "1.0";
    std::string digits = std::to_string( _nanos );
    digits.insert( 0, 9 - digits.size(), '0' );
    while ( digits.size() > 1 && digits.back() == '0' )
        digits.pop_back();
    return "0." + digits;
}

property_def property_def::any()
{
    return property_def{ std::string{ universal_property_name }, true, {} };
}

const observation_sequence* evidential_statement::find( std::string_view sequence_label ) const
{
    for ( const auto& os : sequences )
        if ( os.label == sequence_label )
            return &os;
    return nullptr;
}

bool operator==( const evidential_statement& lhs, const evidential_statement& rhs )
{
    if ( lhs.label != rhs.label || lhs.sequences.size() != rhs.sequences.size() )
        return false;
    auto by_label = []( const observation_sequence* a, const observation_sequence* b ) { return a->label < b->label; };
    std::vector< const observation_sequence* > a, b;
    for ( const auto& os : lhs.sequences )
        a.push_back( &os );
    for ( const auto& os : rhs.sequences )
        b.push_back( &os );
    std::sort( a.begin(), a.end(), by_label );
    std::sort( b.begin(), b.end(), by_label );
    return std::equal( a.begin(), a.end(), b.begin(), []( auto* x, auto* y ) { return *x == *y; } );
}

bool state_machine::has_state( std::string_view name ) const
{
    return std::find( states.begin(), states.end(), name ) != states.end();
}

bool state_machine::has_event( std::string_view name ) const
{
    return std::find( events.begin(), events.end(), name ) != events.end();
}

std::string_view to_string( aggregator method )
{
    switch ( method ) {
    case aggregator::product: return "product";
    case aggregator::minimum: return "min";
    case aggregator::mean: return "mean";
    }
    return "product";
}

std::optional< aggregator > parse_aggregator( std::string_view text )
{
    if ( text == "product" )
        return aggregator::product;
    if ( text == "min" || text == "minimum" )
        return aggregator::minimum;
    if ( text == "mean" )
        return aggregator::mean;
    return std::nullopt;
}

void recon_config::validate() const
{
    if ( max_run_length < 1 )
        throw validation_error( "max_run_length must be at least 1" );
    if ( max_backtraces < 1 )
        throw validation_error( "max_backtraces must be at least 1" );
}

bool eval_property( const property_def& p, const state_machine& m, std::string_view q )
{
    if ( !m.has_state( q ) )
        throw validation_error( "unknown state '" + std::string{ q } + "'" );
    if ( p.universal )
        return true;
    return std::find( p.member_states.begin(), p.member_states.end(), q ) != p.member_states.end();
}

length_interval sequence_length_interval( const observation_sequence& os )
{
    length_interval result{ 0, std::size_t{ 0 } };
    for ( const auto& o : os.observations ) {
        result.lo += o.min;
        if ( o.unbounded() )
            result.hi.reset();
        else if ( result.hi )
            *result.hi += std::size_t{ o.min } + *o.max;
    }
    return result;
}

double aggregate_credibility( std::span< const weight > weights, aggregator method )
{
    if ( weights.empty() )
        return 1.0;
    switch ( method ) {
    case aggregator::product: {
        long double acc = 1.0L;
        for ( weight w : weights )
            acc *= static_cast< long double >( w.nanos() ) / weight::scale;
        return static_cast< double >( acc );
    }
    case aggregator::minimum:
        return std::min_element( weights.begin(), weights.end() )->value();
    case aggregator::mean: {
        // Sum of nanos is exact for any realistic count.
        std::int64_t sum = 0;
        for ( weight w : weights )
            sum += w.nanos();
        return static_cast< double >( static_cast< long double >( sum ) / weight::scale / weights.size() );
    }
    }
    return 1.0;
}

std::vector< machine_finding > validate_machine( const state_machine& m )
{
    std::vector< machine_finding > findings;
    auto error = [ & ]( std::string message, std::string subject ) {
        findings.push_back( { severity::error, std::move( message ), std::move( subject ) } );
    };

    if ( m.initial.empty() )
        error( "empty initial set", "" );
    for ( const auto& q : m.initial )
        if ( !m.has_state( q ) )
            error( "initial state '" + q + "' is not declared", q );
    for ( const auto& q : m.final )
        if ( !m.has_state( q ) )
            error( "final state '" + q + "' is not declared", q );

    std::set< transition > seen;
    for ( const auto& t : m.transitions ) {
        if ( !m.has_state( t.from ) )
            error( "transition references undeclared state '" + t.from + "'", t.from );
        if ( !m.has_event( t.event ) )
            error( "transition references undeclared event '" + t.event + "'", t.event );
        if ( !m.has_state( t.to ) )
            error( "transition references undeclared state '" + t.to + "'", t.to );
        if ( !seen.insert( t ).second )
            findings.push_back( { severity::warning,
                                  "duplicate transition " + t.from + " --" + t.event + "--> " + t.to, t.from } );
    }

    std::map< std::string, std::vector< std::string > > successors;
    for ( const auto& t : m.transitions )
        successors[ t.from ].push_back( t.to );
    std::set< std::string > reached;
    std::queue< std::string > frontier;
    for ( const auto& q : m.initial )
        if ( m.has_state( q ) && reached.insert( q ).second )
            frontier.push( q );
    while ( !frontier.empty() ) {
        const std::string q = frontier.front();
        frontier.pop();
        for ( const auto& next : successors[ q ] )
            if ( m.has_state( next ) && reached.insert( next ).second )
                frontier.push( next );
    }
    if ( !m.initial.empty() )
        for ( const auto& q : m.states )
            if ( !reached.contains( q ) )
                findings.push_back( { severity::warning, "state '" + q + "' is unreachable", q } );

    return findings;
}

std::vector< weight > collect_weights( std::span< const observation_sequence > sequences )
{
    std::vector< weight > weights;
    for ( const auto& os : sequences )
        for ( const auto& o : os.observations )
            weights.push_back( o.w );
    return weights;
}

std::string format_run( const run& r )
{
    std::string text;
    for ( std::size_t i = 0; i < r.states.size(); ++i ) {
        if ( i > 0 )
            text += " -" + r.events[ i - 1 ] + "-> ";
        text += r.states[ i ];
    }
    return text;
}

} // namespace fcase
