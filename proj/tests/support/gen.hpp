#pragma once

// Hand-rolled random generators for property tests and the acceptance suite.

#include "fcase/dsl.hpp"
#include "fcase/model.hpp"
#include "fcase/recon.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace fcase::gen
{

using rng_t = std::mt19937_64;

inline std::size_t pick( rng_t& rng, std::size_t lo, std::size_t hi )
{
    return std::uniform_int_distribution< std::size_t >{ lo, hi }( rng );
}

inline bool chance( rng_t& rng, double p )
{
    return std::bernoulli_distribution{ p }( rng );
}

inline weight random_weight( rng_t& rng )
{
    static const std::int64_t common[] = { weight::scale, 900'000'000, 500'000'000, 750'000'000, 250'000'000 };
    if ( chance( rng, 0.7 ) )
        return weight::from_nanos( common[ pick( rng, 0, 4 ) ] );
    return weight::from_nanos( static_cast< std::int64_t >( pick( rng, 1, weight::scale ) ) );
}

struct machine_shape
{
    std::size_t max_states = 4;
    std::size_t max_events = 3;
    double edge_density = 0.35;
    std::size_t max_transitions = 10;
};

// States s0.., events e0..; at least one initial state, final states sometimes.
inline state_machine random_machine( rng_t& rng, const machine_shape& shape = {} )
{
    state_machine m;
    const std::size_t n_states = pick( rng, 1, shape.max_states );
    const std::size_t n_events = pick( rng, 1, shape.max_events );
    for ( std::size_t i = 0; i < n_states; ++i )
        m.states.push_back( "s" + std::to_string( i ) );
    for ( std::size_t i = 0; i < n_events; ++i )
        m.events.push_back( "e" + std::to_string( i ) );
    for ( const auto& from : m.states )
        for ( const auto& ev : m.events )
            for ( const auto& to : m.states )
                if ( chance( rng, shape.edge_density ) )
                    m.transitions.push_back( { from, ev, to } );
    std::shuffle( m.transitions.begin(), m.transitions.end(), rng );
    if ( m.transitions.size() > shape.max_transitions )
        m.transitions.resize( shape.max_transitions );
    for ( const auto& q : m.states )
        if ( chance( rng, 0.3 ) )
            m.initial.push_back( q );
    if ( m.initial.empty() )
        m.initial.push_back( m.states[ pick( rng, 0, n_states - 1 ) ] );
    if ( chance( rng, 0.3 ) )
        for ( const auto& q : m.states )
            if ( chance( rng, 0.4 ) )
                m.final.push_back( q );
    return m;
}

inline property_def random_property( rng_t& rng, const state_machine& m )
{
    if ( chance( rng, 0.15 ) )
        return property_def::any();
    property_def p;
    for ( const auto& q : m.states )
        if ( chance( rng, 0.5 ) )
            p.member_states.push_back( q );
    if ( p.member_states.empty() )
        p.member_states.push_back( m.states[ pick( rng, 0, m.states.size() - 1 ) ] );
    p.name = "P";
    for ( const auto& q : p.member_states )
        p.name += "_" + q;
    return p;
}

inline observation random_observation( rng_t& rng, const state_machine& m )
{
    observation o;
    o.property = random_property( rng, m );
    o.min = static_cast< std::uint32_t >( pick( rng, 0, 2 ) );
    if ( !chance( rng, 0.3 ) )
        o.max = static_cast< std::uint32_t >( pick( rng, 0, 2 ) );
    o.w = random_weight( rng );
    return o;
}

inline observation_sequence random_sequence( rng_t& rng, const state_machine& m, std::string label,
                                             std::size_t max_observations = 3 )
{
    observation_sequence os{ std::move( label ), {} };
    const std::size_t n = pick( rng, 0, max_observations );
    for ( std::size_t i = 0; i < n; ++i )
        os.observations.push_back( random_observation( rng, m ) );
    return os;
}

inline evidential_statement random_statement( rng_t& rng, const state_machine& m, std::size_t max_sequences = 3 )
{
    evidential_statement es{ "es", {} };
    const std::size_t n = pick( rng, 0, max_sequences );
    for ( std::size_t i = 0; i < n; ++i )
        es.sequences.push_back( random_sequence( rng, m, "os" + std::to_string( i ) ) );
    return es;
}

inline recon_config random_config( rng_t& rng, std::size_t max_len = 6 )
{
    recon_config cfg;
    cfg.max_run_length = pick( rng, 1, max_len );
    cfg.max_backtraces = chance( rng, 0.3 ) ? pick( rng, 1, 8 ) : 1000;
    cfg.method = static_cast< aggregator >( pick( rng, 0, 2 ) );
    if ( chance( rng, 0.3 ) )
        cfg.anchor_final = chance( rng, 0.5 );
    return cfg;
}

inline std::string random_identifier( rng_t& rng, const std::string& prefix )
{
    static const std::string tail = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";
    std::string name = prefix;
    const std::size_t n = pick( rng, 0, 5 );
    for ( std::size_t i = 0; i < n; ++i )
        name += tail[ pick( rng, 0, tail.size() - 1 ) ];
    return name;
}

inline std::string random_case_name( rng_t& rng )
{
    static const std::string chars = "abcxyz ABC019-_.\"\\";
    std::string name;
    const std::size_t n = pick( rng, 0, 12 );
    for ( std::size_t i = 0; i < n; ++i )
        name += chars[ pick( rng, 0, chars.size() - 1 ) ];
    return name;
}

inline dsl::ident id( std::string name )
{
    return { std::move( name ), {} };
}

// Whole case specs. With valid = false they may reference undeclared names or
// break timestamp order; the round trip through text only needs the syntax.
inline dsl::case_spec random_case( rng_t& rng, bool valid = true )
{
    dsl::case_spec spec;
    spec.name = random_case_name( rng );
    const auto m = random_machine( rng, { 4, 3, 0.25, 12 } );
    for ( const auto& q : m.states ) {
        const bool init = std::find( m.initial.begin(), m.initial.end(), q ) != m.initial.end();
        const bool fin = std::find( m.final.begin(), m.final.end(), q ) != m.final.end();
        spec.machine.states.push_back( { id( q ), init, fin } );
    }
    for ( const auto& e : m.events )
        spec.machine.events.push_back( id( e ) );
    for ( const auto& t : m.transitions )
        spec.machine.transitions.push_back( { id( t.from ), id( t.event ), id( t.to ) } );

    std::vector< std::string > props{ "any" };
    for ( std::size_t i = 0, n = pick( rng, 0, 3 ); i < n; ++i ) {
        dsl::property_decl p;
        p.name = id( random_identifier( rng, "P" + std::to_string( i ) ) );
        for ( const auto& q : m.states )
            if ( chance( rng, 0.5 ) )
                p.members.push_back( id( q ) );
        if ( p.members.empty() )
            p.members.push_back( id( valid ? m.states.front() : "ghost" ) );
        props.push_back( p.name.name );
        spec.properties.push_back( std::move( p ) );
    }

    std::vector< std::string > obs;
    std::int64_t t = 0;
    for ( std::size_t i = 0, n = pick( rng, 0, 5 ); i < n; ++i ) {
        dsl::observation_decl o;
        o.name = id( random_identifier( rng, "o" + std::to_string( i ) ) );
        o.property = id( props[ pick( rng, 0, props.size() - 1 ) ] );
        if ( chance( rng, 0.5 ) ) {
            t += static_cast< std::int64_t >( pick( rng, 0, 5000 ) );
            o.t_ms = t;
        }
        o.min = static_cast< std::uint32_t >( pick( rng, 0, 100 ) );
        if ( chance( rng, 0.7 ) )
            o.max = static_cast< std::uint32_t >( pick( rng, 0, 100 ) );
        o.w_nanos = random_weight( rng ).nanos();
        obs.push_back( o.name.name );
        spec.observations.push_back( std::move( o ) );
    }

    auto items = [ & ] {
        std::vector< dsl::ident > out;
        if ( obs.empty() )
            return out;
        std::vector< std::size_t > picks;
        for ( std::size_t i = 0, n = pick( rng, 0, 4 ); i < n; ++i )
            picks.push_back( pick( rng, 0, obs.size() - 1 ) );
        // Observations are declared with non-decreasing timestamps.
        if ( valid )
            std::sort( picks.begin(), picks.end() );
        for ( const auto k : picks )
            out.push_back( id( obs[ k ] ) );
        if ( !valid && chance( rng, 0.2 ) )
            out.push_back( id( random_identifier( rng, "ghost" ) ) );
        return out;
    };
    std::vector< std::string > seqs;
    for ( std::size_t i = 0, n = pick( rng, 0, 3 ); i < n; ++i ) {
        spec.sequences.push_back( { id( random_identifier( rng, "os" + std::to_string( i ) ) ), items() } );
        seqs.push_back( spec.sequences.back().name.name );
    }
    for ( std::size_t i = 0, n = pick( rng, 0, 2 ); i < n; ++i )
        spec.theories.push_back( { id( random_identifier( rng, "T" + std::to_string( i ) ) ), items() } );
    for ( std::size_t i = 0, n = pick( rng, 0, 2 ); i < n; ++i ) {
        dsl::evidence_decl e{ id( random_identifier( rng, "es" + std::to_string( i ) ) ), {} };
        for ( const auto& s : seqs )
            if ( chance( rng, 0.6 ) )
                e.sequences.push_back( id( s ) );
        spec.statements.push_back( std::move( e ) );
    }
    return spec;
}

} // namespace fcase::gen
