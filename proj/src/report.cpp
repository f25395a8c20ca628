#include "fcase/report.hpp"

#include <cstdio>
#include <sstream>

namespace fcase
{

namespace
{

std::string join( const std::vector< std::string >& items )
{
    if ( items.empty() )
        return "-";
    std::string out;
    for ( std::size_t i = 0; i < items.size(); ++i )
        out += ( i ? ", " : "" ) + items[ i ];
    return out;
}

void write_backtrace( std::ostream& out, std::size_t rank, const backtrace& bt )
{
    out << "#" << rank << " score " << format_score( bt.score ) << " length " << bt.trace.length() << "\n";
    out << "  run " << format_run( bt.trace ) << "\n";
    for ( const auto& w : bt.partitions )
        out << "  partition " << w.label << " " << format_partition( w.split ) << "\n";
}

void write_backtraces( std::ostream& out, const std::vector< backtrace >& list )
{
    for ( std::size_t i = 0; i < list.size(); ++i )
        write_backtrace( out, i + 1, list[ i ] );
}

} // namespace

std::string format_score( double score )
{
    char buffer[ 32 ];
    std::snprintf( buffer, sizeof buffer, "%.9f", score );
    return buffer;
}

std::string format_partition( const partition& p )
{
    std::string out = "[";
    for ( std::size_t i = 0; i < p.boundaries.size(); ++i )
        out += ( i ? ", " : "" ) + std::to_string( p.boundaries[ i ] );
    return out + "]";
}

std::string format_backtraces( std::string_view evidence_label, const recon_result& result )
{
    std::ostringstream out;
    out << "evidence " << evidence_label << "\n";
    out << "backtraces " << result.backtraces.size() << "\n";
    out << "complete " << ( result.cap_exceeded ? "no (truncated at max-traces)" : "yes" ) << "\n";
    write_backtraces( out, result.backtraces );
    return out.str();
}

std::string format_subsets( const std::vector< consistent_subset >& subsets )
{
    std::ostringstream out;
    out << "consistent-subsets " << subsets.size() << "\n";
    for ( std::size_t i = 0; i < subsets.size(); ++i ) {
        const auto& s = subsets[ i ];
        out << "#" << i + 1 << " score " << format_score( s.score ) << " size " << s.included.size() << "\n";
        out << "  included " << join( s.included ) << "\n";
        out << "  excluded " << join( s.excluded ) << "\n";
        out << "  witness " << format_run( s.witness.trace ) << "\n";
    }
    return out.str();
}

std::string format_verdict( std::string_view theory_label, const theory_verdict& verdict )
{
    std::ostringstream out;
    out << "theory " << theory_label << "\n";
    out << "verdict " << ( verdict.agrees ? "agrees" : "disagrees" ) << "\n";
    if ( verdict.agrees ) {
        out << "complete " << ( verdict.complete ? "yes" : "no (truncated at max-traces)" ) << "\n";
        out << "backtraces " << verdict.backtraces.size() << "\n";
        write_backtraces( out, verdict.backtraces );
    } else {
        out << format_subsets( verdict.diagnosis );
    }
    return out.str();
}

std::string format_ranking( const std::vector< ranked_theory >& ranking )
{
    std::ostringstream out;
    out << "ranking";
    for ( const auto& r : ranking )
        out << " " << r.label;
    out << "\n";
    for ( const auto& r : ranking )
        out << format_verdict( r.label, r.verdict );
    return out.str();
}

} // namespace fcase
