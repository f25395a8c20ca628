#include "fcase/recon.hpp"
#include "recon_detail.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

namespace fcase
{

std::vector< consistent_subset > maximal_consistent_subsets( const state_machine& m, const evidential_statement& es,
                                                             const recon_config& cfg )
{
    const std::size_t n = es.sequences.size();
    if ( n > max_diagnosis_sequences )
        throw refusal_error( "diagnosis refuses more than " + std::to_string( max_diagnosis_sequences ) +
                             " sequences" );
    detail::validate_inputs( m, es, cfg );

    recon_config probe = cfg;
    probe.max_backtraces = 1;

    // Explainability is closed under taking subsets, so scanning from the
    // largest subsets down and skipping anything covered by a hit finds
    // exactly the maximal ones.
    std::vector< std::uint32_t > masks( std::size_t{ 1 } << n );
    for ( std::uint32_t mask = 0; mask < masks.size(); ++mask )
        masks[ mask ] = mask;
    std::stable_sort( masks.begin(), masks.end(),
                      []( std::uint32_t a, std::uint32_t b ) { return std::popcount( a ) > std::popcount( b ); } );

    std::vector< std::uint32_t > maximal;
    std::vector< consistent_subset > out;
    for ( std::uint32_t mask : masks ) {
        if ( std::any_of( maximal.begin(), maximal.end(), [ & ]( std::uint32_t hit ) { return ( mask & hit ) == mask; } ) )
            continue;
        evidential_statement subset{ es.label, {} };
        consistent_subset entry;
        for ( std::size_t j = 0; j < n; ++j ) {
            if ( mask & ( 1u << j ) ) {
                subset.sequences.push_back( es.sequences[ j ] );
                entry.included.push_back( es.sequences[ j ].label );
            } else {
                entry.excluded.push_back( es.sequences[ j ].label );
            }
        }
        recon_result found = reconstruct( m, subset, probe );
        if ( found.backtraces.empty() )
            continue;
        maximal.push_back( mask );
        std::sort( entry.included.begin(), entry.included.end() );
        std::sort( entry.excluded.begin(), entry.excluded.end() );
        entry.score = detail::statement_score( subset, cfg.method );
        entry.witness = std::move( found.backtraces.front() );
        out.push_back( std::move( entry ) );
    }

    std::sort( out.begin(), out.end(), []( const consistent_subset& a, const consistent_subset& b ) {
        if ( a.included.size() != b.included.size() )
            return a.included.size() > b.included.size();
        if ( a.score > b.score + score_tolerance )
            return true;
        if ( b.score > a.score + score_tolerance )
            return false;
        return a.included < b.included;
    } );
    return out;
}

theory_verdict check_theory( const state_machine& m, const evidential_statement& es,
                             const observation_sequence& theory, const recon_config& cfg )
{
    if ( es.find( theory.label ) )
        throw validation_error( "theory label '" + theory.label + "' collides with an evidence sequence" );
    evidential_statement combined = es;
    combined.sequences.push_back( theory );

    theory_verdict verdict;
    recon_result found = reconstruct( m, combined, cfg );
    verdict.complete = !found.cap_exceeded;
    verdict.agrees = !found.backtraces.empty();
    verdict.backtraces = std::move( found.backtraces );
    if ( !verdict.agrees )
        verdict.diagnosis = maximal_consistent_subsets( m, combined, cfg );
    return verdict;
}

std::vector< ranked_theory > rank_theories( const state_machine& m, const evidential_statement& es,
                                            std::span< const observation_sequence > theories,
                                            const recon_config& cfg )
{
    struct keyed
    {
        ranked_theory entry;
        std::size_t observations;
        double credibility;
    };
    std::vector< keyed > list;
    for ( const auto& theory : theories ) {
        std::vector< weight > weights;
        for ( const auto& o : theory.observations )
            weights.push_back( o.w );
        list.push_back( { { theory.label, check_theory( m, es, theory, cfg ) },
                          theory.observations.size(),
                          aggregate_credibility( weights, cfg.method ) } );
    }
    std::sort( list.begin(), list.end(), []( const keyed& a, const keyed& b ) {
        if ( a.entry.verdict.agrees != b.entry.verdict.agrees )
            return a.entry.verdict.agrees;
        if ( a.entry.verdict.agrees ) {
            if ( a.observations != b.observations )
                return a.observations > b.observations;
            if ( a.credibility > b.credibility + score_tolerance )
                return true;
            if ( b.credibility > a.credibility + score_tolerance )
                return false;
        }
        return a.entry.label < b.entry.label;
    } );
    std::vector< ranked_theory > out;
    for ( auto& k : list )
        out.push_back( std::move( k.entry ) );
    return out;
}

} // namespace fcase
