#include "fcase/blackbox.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace fcase::blackbox
{

std::string_view to_string( comparator cmp )
{
    switch ( cmp ) {
    case comparator::greater: return ">";
    case comparator::greater_equal: return ">=";
    case comparator::less: return "<";
    case comparator::less_equal: return "<=";
    }
    return ">";
}

bool compare( decimal value, comparator cmp, decimal threshold )
{
    switch ( cmp ) {
    case comparator::greater: return value > threshold;
    case comparator::greater_equal: return value >= threshold;
    case comparator::less: return value < threshold;
    case comparator::less_equal: return value <= threshold;
    }
    return false;
}

namespace
{

std::optional< comparator > parse_comparator( std::string_view text )
{
    if ( text == ">" )
        return comparator::greater;
    if ( text == ">=" || text == "≥" )
        return comparator::greater_equal;
    if ( text == "<" )
        return comparator::less;
    if ( text == "<=" || text == "≤" )
        return comparator::less_equal;
    return std::nullopt;
}

std::string strip_comment( std::string line )
{
    const auto hash = line.find( '#' );
    const auto slashes = line.find( "//" );
    line = line.substr( 0, std::min( hash, slashes ) );
    return line;
}

} // namespace

std::vector< threshold_rule > parse_rules( std::string_view text )
{
    std::vector< threshold_rule > rules;
    std::set< std::string > properties;
    std::istringstream in{ std::string{ text } };
    std::string line;
    std::size_t line_no = 0;
    while ( std::getline( in, line ) ) {
        ++line_no;
        std::istringstream words{ strip_comment( line ) };
        std::vector< std::string > w;
        for ( std::string word; words >> word; )
            w.push_back( word );
        if ( w.empty() )
            continue;
        auto bad = [ & ]( const std::string& why ) {
            return validation_error( "rules line " + std::to_string( line_no ) + ": " + why );
        };
        if ( w.size() != 6 || w[ 3 ] != "->" || w[ 5 ].rfind( "w=", 0 ) != 0 )
            throw bad( "expected 'channel comparator threshold -> property w=WEIGHT'" );
        threshold_rule rule;
        rule.channel = w[ 0 ];
        if ( !is_identifier( rule.channel ) )
            throw bad( "channel '" + rule.channel + "' is not an identifier" );
        const auto cmp = parse_comparator( w[ 1 ] );
        if ( !cmp )
            throw bad( "unknown comparator '" + w[ 1 ] + "'" );
        rule.cmp = *cmp;
        const auto threshold = decimal::parse( w[ 2 ] );
        if ( !threshold )
            throw bad( "malformed threshold '" + w[ 2 ] + "'" );
        rule.threshold = *threshold;
        rule.property_name = w[ 4 ];
        if ( !is_identifier( rule.property_name ) || rule.property_name == universal_property_name )
            throw bad( "property name '" + rule.property_name + "' is not usable" );
        if ( !properties.insert( rule.property_name ).second )
            throw bad( "property '" + rule.property_name + "' already has a rule" );
        const auto weight_value = weight::parse( std::string_view{ w[ 5 ] }.substr( 2 ) );
        if ( !weight_value )
            throw bad( "weight must be a decimal in (0, 1]" );
        rule.w = *weight_value;
        rules.push_back( std::move( rule ) );
    }
    return rules;
}

std::string format_rule( const threshold_rule& rule )
{
    return rule.channel + " " + std::string{ to_string( rule.cmp ) } + " " + rule.threshold.to_string() + " -> " +
           rule.property_name + " w=" + rule.w.to_string();
}

evidential_statement derive_observations( std::span< const record > records, std::span< const threshold_rule > rules,
                                          const ingest_options& options )
{
    std::vector< const record* > ordered;
    for ( const auto& r : records )
        ordered.push_back( &r );
    std::stable_sort( ordered.begin(), ordered.end(),
                      []( const record* a, const record* b ) { return a->seq < b->seq; } );

    std::set< std::string > channels, properties;
    for ( const record* r : ordered )
        channels.insert( r->channel );

    evidential_statement statement{ options.label, {} };
    for ( const auto& rule : rules ) {
        if ( !channels.contains( rule.channel ) )
            throw validation_error( "rule for '" + rule.property_name + "' names unknown channel '" + rule.channel + "'" );
        if ( !properties.insert( rule.property_name ).second )
            throw validation_error( "property '" + rule.property_name + "' has more than one rule" );

        // Alternating stretches of samples: (first t_ms, sample count, satisfied).
        struct stretch
        {
            std::int64_t t_ms;
            std::uint32_t samples;
            bool satisfied;
        };
        std::vector< stretch > stretches;
        for ( const record* r : ordered ) {
            if ( r->channel != rule.channel )
                continue;
            const bool hit = compare( r->value, rule.cmp, rule.threshold );
            if ( !stretches.empty() && stretches.back().satisfied == hit )
                ++stretches.back().samples;
            else
                stretches.push_back( { r->t_ms, 1, hit } );
        }

        observation_sequence os{ rule.property_name, {} };
        const property_def property{ rule.property_name, false, {} };
        const bool fired = std::any_of( stretches.begin(), stretches.end(), []( const stretch& s ) { return s.satisfied; } );
        for ( const auto& s : stretches ) {
            if ( !fired )
                break;
            if ( options.mode == ingest_mode::excursions ) {
                if ( s.satisfied )
                    os.observations.push_back( { property, s.t_ms, s.samples, 0u, rule.w } );
            } else if ( s.satisfied ) {
                os.observations.push_back( { property, s.t_ms, 1, s.samples - 1, rule.w } );
            } else {
                os.observations.push_back( { property_def::any(), s.t_ms, 1, std::nullopt, weight{} } );
            }
        }
        statement.sequences.push_back( std::move( os ) );
    }
    return statement;
}

} // namespace fcase::blackbox
