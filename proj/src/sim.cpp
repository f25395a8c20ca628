#include "fcase/sim.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace fcase::sim
{

namespace
{

std::optional< std::int64_t > parse_ms( std::string_view text )
{
    std::int64_t value = 0;
    const auto [ ptr, ec ] = std::from_chars( text.data(), text.data() + text.size(), value );
    if ( ec != std::errc{} || ptr != text.data() + text.size() || value < 0 )
        return std::nullopt;
    return value;
}

} // namespace

schedule parse_schedule( std::string_view text )
{
    schedule sch;
    bool period_seen = false;
    std::istringstream in{ std::string{ text } };
    std::string line;
    std::size_t line_no = 0;
    while ( std::getline( in, line ) ) {
        ++line_no;
        line = line.substr( 0, line.find( "//" ) );
        auto bad = [ & ]( const std::string& why ) {
            return validation_error( "schedule line " + std::to_string( line_no ) + ": " + why );
        };
        for ( std::string_view rest = line;; ) {
            const auto semi = rest.find( ';' );
            std::istringstream words{ std::string{ rest.substr( 0, semi ) } };
            std::vector< std::string > w;
            for ( std::string word; words >> word; )
                w.push_back( word );
            if ( semi == std::string_view::npos ) {
                if ( !w.empty() )
                    throw bad( "missing ';'" );
                break;
            }
            rest.remove_prefix( semi + 1 );
            if ( w.empty() )
                continue;
            if ( w[ 0 ] == "at" ) {
                if ( w.size() != 4 || w[ 2 ] != "fire" )
                    throw bad( "expected 'at <t_ms> fire <event>;'" );
                const auto t = parse_ms( w[ 1 ] );
                if ( !t )
                    throw bad( "malformed time '" + w[ 1 ] + "'" );
                if ( !sch.entries.empty() && *t <= sch.entries.back().t_ms )
                    throw bad( "event times must be strictly increasing" );
                sch.entries.push_back( { *t, w[ 3 ] } );
            } else if ( w[ 0 ] == "sensor" ) {
                if ( w.size() < 3 )
                    throw bad( "expected 'sensor <state> <channel>=<value>;'" );
                auto& readings = sch.sensor_map[ w[ 1 ] ];
                for ( std::size_t k = 2; k < w.size(); ++k ) {
                    const auto eq = w[ k ].find( '=' );
                    if ( eq == std::string::npos )
                        throw bad( "expected <channel>=<value> but found '" + w[ k ] + "'" );
                    const std::string channel = w[ k ].substr( 0, eq );
                    const std::string literal = w[ k ].substr( eq + 1 );
                    const auto value = blackbox::decimal::parse( literal );
                    if ( !blackbox::is_identifier( channel ) || !value )
                        throw bad( "malformed reading '" + w[ k ] + "'" );
                    readings.push_back( { channel, *value,
                                          std::max( blackbox::default_precision, blackbox::decimal::precision_of( literal ) ) } );
                }
            } else if ( w[ 0 ] == "period" || w[ 0 ] == "end" ) {
                const auto t = w.size() == 2 ? parse_ms( w[ 1 ] ) : std::nullopt;
                if ( !t )
                    throw bad( "expected '" + w[ 0 ] + " <ms>;'" );
                if ( w[ 0 ] == "period" ) {
                    if ( *t == 0 || period_seen )
                        throw bad( "period must be given once and be positive" );
                    sch.sample_period_ms = *t;
                    period_seen = true;
                } else {
                    sch.end_ms = *t;
                }
            } else {
                throw bad( "unknown directive '" + w[ 0 ] + "'" );
            }
        }
    }
    return sch;
}

simulation simulate( const state_machine& m, const schedule& sch, std::int64_t t_end )
{
    for ( const auto& f : validate_machine( m ) )
        if ( f.level == severity::error )
            throw validation_error( "invalid machine: " + f.message );
    if ( m.initial.size() != 1 )
        throw refusal_error( "simulation needs exactly one initial state" );
    if ( sch.sample_period_ms <= 0 )
        throw validation_error( "sample period must be positive" );
    if ( t_end < 0 )
        throw validation_error( "end time must be non-negative" );
    for ( const auto& [ state, readings ] : sch.sensor_map )
        if ( !m.has_state( state ) )
            throw validation_error( "sensor map names unknown state '" + state + "'" );
    for ( std::size_t i = 0; i < sch.entries.size(); ++i ) {
        if ( !m.has_event( sch.entries[ i ].event ) )
            throw validation_error( "schedule fires unknown event '" + sch.entries[ i ].event + "'" );
        if ( i > 0 && sch.entries[ i ].t_ms <= sch.entries[ i - 1 ].t_ms )
            throw validation_error( "schedule times must be strictly increasing" );
    }

    simulation out;
    out.truth.states.push_back( m.initial.front() );
    std::size_t next_event = 0;
    std::uint64_t seq = 0;

    auto fire_until = [ & ]( std::int64_t t ) {
        for ( ; next_event < sch.entries.size() && sch.entries[ next_event ].t_ms <= t; ++next_event ) {
            const auto& entry = sch.entries[ next_event ];
            const std::string from = out.truth.states.back();
            std::vector< std::string > targets;
            for ( const auto& tr : m.transitions )
                if ( tr.from == from && tr.event == entry.event &&
                     std::find( targets.begin(), targets.end(), tr.to ) == targets.end() )
                    targets.push_back( tr.to );
            const std::string where = "event '" + entry.event + "' at t=" + std::to_string( entry.t_ms );
            if ( targets.empty() )
                throw replay_error( where + " is not enabled in state '" + from + "'" );
            if ( targets.size() > 1 )
                throw replay_error( where + " is ambiguous in state '" + from + "'" );
            out.truth.events.push_back( entry.event );
            out.truth.states.push_back( targets.front() );
        }
    };

    for ( std::int64_t t = 0; t <= t_end; t += sch.sample_period_ms ) {
        fire_until( t );
        const auto it = sch.sensor_map.find( out.truth.states.back() );
        if ( it == sch.sensor_map.end() )
            continue;
        for ( const auto& reading : it->second ) {
            blackbox::record_fields fields{ seq++, t, reading.channel, reading.value, reading.precision,
                                            blackbox::log_level::normal };
            out.log.push_back( blackbox::seal( std::move( fields ) ) );
        }
    }
    fire_until( t_end );
    return out;
}

} // namespace fcase::sim
