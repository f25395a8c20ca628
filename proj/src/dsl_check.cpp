#include "fcase/dsl.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace fcase::dsl
{

namespace
{

class checker
{
public:
    explicit checker( const case_spec& spec ) : _spec{ spec } {}

    std::vector< diagnostic > run()
    {
        check_machine();
        check_properties();
        check_observations();
        check_sequences( _spec.sequences, "sequence" );
        check_sequences( _spec.theories, "theory" );
        check_statements();
        std::stable_sort( _out.begin(), _out.end(), []( const diagnostic& a, const diagnostic& b ) {
            return std::tie( a.line, a.column ) < std::tie( b.line, b.column );
        } );
        return std::move( _out );
    }

private:
    void report( severity level, source_pos pos, std::string message )
    {
        _out.push_back( { level, std::move( message ), pos.line, pos.column } );
    }

    void error( source_pos pos, std::string message ) { report( severity::error, pos, std::move( message ) ); }

    // Reports every repeated name within one namespace.
    void unique( std::set< std::string >& seen, const ident& name, std::string_view kind )
    {
        if ( !seen.insert( name.name ).second )
            error( name.pos, "duplicate " + std::string{ kind } + " '" + name.name + "'" );
    }

    source_pos locate_machine_subject( const std::string& subject, const std::string& message ) const
    {
        if ( subject.empty() )
            return _spec.machine.pos;
        const bool is_event = message.find( "event" ) != std::string::npos;
        for ( const auto& t : _spec.machine.transitions ) {
            if ( is_event && t.event.name == subject )
                return t.event.pos;
            if ( !is_event && t.from.name == subject )
                return t.from.pos;
            if ( !is_event && t.to.name == subject )
                return t.to.pos;
        }
        for ( const auto& s : _spec.machine.states )
            if ( s.name.name == subject )
                return s.name.pos;
        return _spec.machine.pos;
    }

    void check_machine()
    {
        std::set< std::string > states, events;
        for ( const auto& s : _spec.machine.states )
            unique( states, s.name, "state" );
        for ( const auto& e : _spec.machine.events )
            unique( events, e, "event" );
        for ( const auto& f : validate_machine( to_machine( _spec ) ) )
            report( f.level, locate_machine_subject( f.subject, f.message ), f.message );
    }

    void check_properties()
    {
        std::set< std::string > seen;
        const state_machine m = to_machine( _spec );
        for ( const auto& p : _spec.properties ) {
            unique( seen, p.name, "property" );
            for ( const auto& q : p.members )
                if ( !m.has_state( q.name ) )
                    error( q.pos, "property '" + p.name.name + "' references undeclared state '" + q.name + "'" );
        }
    }

    bool property_declared( const std::string& name ) const
    {
        if ( name == universal_property_name )
            return true;
        return std::any_of( _spec.properties.begin(), _spec.properties.end(),
                            [ & ]( const property_decl& p ) { return p.name.name == name; } );
    }

    void check_observations()
    {
        std::set< std::string > seen;
        for ( const auto& o : _spec.observations ) {
            unique( seen, o.name, "observation" );
            if ( !property_declared( o.property.name ) )
                error( o.property.pos, "undeclared property '" + o.property.name + "'" );
            if ( o.w_nanos <= 0 || o.w_nanos > weight::scale )
                error( o.w_pos, "weight of observation '" + o.name.name + "' is out of range (0, 1]" );
        }
    }

    const observation_decl* find_observation( const std::string& name ) const
    {
        for ( const auto& o : _spec.observations )
            if ( o.name.name == name )
                return &o;
        return nullptr;
    }

    void check_sequences( const std::vector< sequence_decl >& list, std::string_view kind )
    {
        for ( const auto& s : list ) {
            unique( _sequence_names, s.name, "sequence or theory" );
            std::optional< std::int64_t > last_t;
            for ( const auto& item : s.items ) {
                const observation_decl* o = find_observation( item.name );
                if ( !o ) {
                    error( item.pos, "undeclared observation '" + item.name + "' in " + std::string{ kind } + " '" +
                                             s.name.name + "'" );
                    continue;
                }
                if ( !o->t_ms )
                    continue;
                if ( last_t && *o->t_ms < *last_t )
                    error( item.pos, "non-chronological timestamps in " + std::string{ kind } + " '" + s.name.name +
                                             "': '" + item.name + "' at t=" + std::to_string( *o->t_ms ) +
                                             " follows t=" + std::to_string( *last_t ) );
                last_t = o->t_ms;
            }
        }
    }

    void check_statements()
    {
        std::set< std::string > names;
        std::set< std::string > sequence_labels;
        for ( const auto& s : _spec.sequences )
            sequence_labels.insert( s.name.name );
        for ( const auto& e : _spec.statements ) {
            unique( names, e.name, "evidence" );
            std::set< std::string > members;
            for ( const auto& ref : e.sequences ) {
                if ( !sequence_labels.contains( ref.name ) )
                    error( ref.pos, "evidence '" + e.name.name + "' references undeclared sequence '" + ref.name + "'" );
                else if ( !members.insert( ref.name ).second )
                    error( ref.pos, "evidence '" + e.name.name + "' lists sequence '" + ref.name + "' twice" );
            }
        }
    }

    const case_spec& _spec;
    std::set< std::string > _sequence_names;
    std::vector< diagnostic > _out;
};

} // namespace

std::vector< diagnostic > check_case( const case_spec& spec )
{
    return checker{ spec }.run();
}

state_machine to_machine( const case_spec& spec )
{
    state_machine m;
    for ( const auto& s : spec.machine.states ) {
        m.states.push_back( s.name.name );
        if ( s.initial )
            m.initial.push_back( s.name.name );
        if ( s.final )
            m.final.push_back( s.name.name );
    }
    for ( const auto& e : spec.machine.events )
        m.events.push_back( e.name );
    for ( const auto& t : spec.machine.transitions )
        m.transitions.push_back( { t.from.name, t.event.name, t.to.name } );
    return m;
}

property_def resolve_property( const case_spec& spec, std::string_view name )
{
    if ( name == universal_property_name )
        return property_def::any();
    for ( const auto& p : spec.properties ) {
        if ( p.name.name != name )
            continue;
        property_def def{ p.name.name, p.universal, {} };
        for ( const auto& q : p.members )
            def.member_states.push_back( q.name );
        return def;
    }
    throw validation_error( "undeclared property '" + std::string{ name } + "'" );
}

namespace
{

const sequence_decl* find_sequence( const std::vector< sequence_decl >& list, std::string_view label )
{
    for ( const auto& s : list )
        if ( s.name.name == label )
            return &s;
    return nullptr;
}

} // namespace

observation_sequence resolve_sequence( const case_spec& spec, std::string_view label )
{
    const sequence_decl* decl = find_sequence( spec.sequences, label );
    if ( !decl )
        decl = find_sequence( spec.theories, label );
    if ( !decl )
        throw validation_error( "undeclared sequence or theory '" + std::string{ label } + "'" );

    observation_sequence os{ decl->name.name, {} };
    for ( const auto& item : decl->items ) {
        auto it = std::find_if( spec.observations.begin(), spec.observations.end(),
                                [ & ]( const observation_decl& o ) { return o.name.name == item.name; } );
        if ( it == spec.observations.end() )
            throw validation_error( "undeclared observation '" + item.name + "'" );
        os.observations.push_back(
                { resolve_property( spec, it->property.name ), it->t_ms, it->min, it->max, weight::from_nanos( it->w_nanos ) } );
    }
    return os;
}

evidential_statement resolve_statement( const case_spec& spec, std::string_view label )
{
    for ( const auto& e : spec.statements ) {
        if ( e.name.name != label )
            continue;
        evidential_statement es{ e.name.name, {} };
        for ( const auto& ref : e.sequences ) {
            if ( !find_sequence( spec.sequences, ref.name ) )
                throw validation_error( "undeclared sequence '" + ref.name + "'" );
            es.sequences.push_back( resolve_sequence( spec, ref.name ) );
        }
        return es;
    }
    throw validation_error( "undeclared evidence '" + std::string{ label } + "'" );
}

void add_statement( case_spec& spec, const evidential_statement& statement )
{
    evidence_decl e{ { statement.label, {} }, {} };
    for ( const auto& os : statement.sequences ) {
        sequence_decl s{ { os.label, {} }, {} };
        for ( std::size_t i = 0; i < os.observations.size(); ++i ) {
            const observation& o = os.observations[ i ];
            observation_decl d;
            d.name = { os.label + "_" + std::to_string( i + 1 ), {} };
            d.property = { o.property.name, {} };
            d.t_ms = o.t_ms;
            d.min = o.min;
            d.max = o.max;
            d.w_nanos = o.w.nanos();
            s.items.push_back( d.name );
            spec.observations.push_back( std::move( d ) );
        }
        e.sequences.push_back( s.name );
        spec.sequences.push_back( std::move( s ) );
    }
    spec.statements.push_back( std::move( e ) );
}

} // namespace fcase::dsl
