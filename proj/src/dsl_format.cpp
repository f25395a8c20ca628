#include "fcase/dsl.hpp"

#include <sstream>

namespace fcase::dsl
{

namespace
{

std::string quote( const std::string& text )
{
    std::string out = "\"";
    for ( char c : text ) {
        if ( c == '"' || c == '\\' )
            out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string weight_text( std::int64_t nanos )
{
    // Out-of-range weights never reach the formatter of a check-clean case,
    // but keep the output parseable regardless.
    if ( nanos > 0 && nanos <= weight::scale )
        return weight::from_nanos( nanos ).to_string();
    std::string frac = std::to_string( nanos % weight::scale );
    frac.insert( 0, 9 - frac.size(), '0' );
    return std::to_string( nanos / weight::scale ) + "." + frac;
}

void write_list( std::ostream& out, const std::vector< ident >& items )
{
    for ( std::size_t i = 0; i < items.size(); ++i )
        out << ( i ? ", " : "" ) << items[ i ].name;
}

void write_observation( std::ostream& out, const observation_decl& o )
{
    out << "observation " << o.name.name << " = (" << o.property.name;
    if ( o.t_ms )
        out << ", t=" << *o.t_ms;
    out << ", min=" << o.min << ", max=";
    if ( o.max )
        out << *o.max;
    else
        out << '*';
    out << ", w=" << weight_text( o.w_nanos ) << ");\n";
}

void write_declarations( std::ostream& out, const case_spec& spec, std::string_view indent )
{
    for ( const auto& p : spec.properties ) {
        out << indent << "property " << p.name.name << " = ";
        if ( p.universal ) {
            out << "any;\n";
        } else {
            out << "{ ";
            write_list( out, p.members );
            out << " };\n";
        }
    }
    for ( const auto& o : spec.observations ) {
        out << indent;
        write_observation( out, o );
    }
    for ( const auto& s : spec.sequences ) {
        out << indent << "sequence " << s.name.name << " = [";
        write_list( out, s.items );
        out << "];\n";
    }
    for ( const auto& s : spec.theories ) {
        out << indent << "theory " << s.name.name << " = [";
        write_list( out, s.items );
        out << "];\n";
    }
    for ( const auto& e : spec.statements ) {
        out << indent << "evidence " << e.name.name << " = {";
        if ( !e.sequences.empty() ) {
            out << ' ';
            write_list( out, e.sequences );
            out << ' ';
        }
        out << "};\n";
    }
}

} // namespace

std::string format_case( const case_spec& spec )
{
    std::ostringstream out;
    out << "case " << quote( spec.name ) << " {\n";
    out << "  machine {\n";
    out << "    states {\n";
    for ( const auto& s : spec.machine.states ) {
        out << "      " << s.name.name;
        if ( s.initial )
            out << " init";
        if ( s.final )
            out << " final";
        out << ";\n";
    }
    out << "    }\n";
    out << "    events {";
    for ( const auto& e : spec.machine.events )
        out << ' ' << e.name;
    out << ( spec.machine.events.empty() ? "}\n" : " }\n" );
    out << "    transitions {\n";
    for ( const auto& t : spec.machine.transitions )
        out << "      " << t.from.name << " --" << t.event.name << "--> " << t.to.name << ";\n";
    out << "    }\n";
    out << "  }\n";
    write_declarations( out, spec, "  " );
    out << "}\n";
    return out.str();
}

std::string format_statement_fragment( const evidential_statement& statement )
{
    case_spec fragment;
    add_statement( fragment, statement );
    std::ostringstream out;
    write_declarations( out, fragment, "" );
    return out.str();
}

} // namespace fcase::dsl
