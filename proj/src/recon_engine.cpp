#include "fcase/recon.hpp"
#include "recon_detail.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace fcase
{

namespace
{

using id_t = std::uint32_t;

// The machine with states and events ranked by label, so that iterating in
// index order visits labels lexicographically.
struct ranked_machine
{
    std::vector< std::string > states; // sorted labels
    std::vector< std::string > events; // sorted labels
    std::vector< std::vector< std::pair< id_t, id_t > > > outgoing; // (event, to), sorted
    std::vector< id_t > initial;
    std::vector< bool > final;

    explicit ranked_machine( const state_machine& m )
    {
        std::set< std::string > s( m.states.begin(), m.states.end() );
        std::set< std::string > e( m.events.begin(), m.events.end() );
        states.assign( s.begin(), s.end() );
        events.assign( e.begin(), e.end() );
        outgoing.resize( states.size() );
        final.assign( states.size(), false );
        for ( const auto& t : m.transitions )
            outgoing[ state( t.from ) ].emplace_back( event( t.event ), state( t.to ) );
        for ( auto& list : outgoing ) {
            std::sort( list.begin(), list.end() );
            list.erase( std::unique( list.begin(), list.end() ), list.end() );
        }
        for ( const auto& q : std::set< std::string >( m.initial.begin(), m.initial.end() ) )
            initial.push_back( state( q ) );
        for ( const auto& q : m.final )
            final[ state( q ) ] = true;
    }

    id_t state( const std::string& name ) const
    {
        return static_cast< id_t >( std::lower_bound( states.begin(), states.end(), name ) - states.begin() );
    }

    id_t event( const std::string& name ) const
    {
        return static_cast< id_t >( std::lower_bound( events.begin(), events.end(), name ) - events.begin() );
    }
};

// Tracks which observation segment the run is in and how long it has lasted.
// Id 0 is "no state consumed yet"; segment i with count c is offset[i] + c - 1.
// Counts of unbounded segments saturate at max(min, 1).
class segment_tracker
{
public:
    segment_tracker( const observation_sequence& os, const state_machine& m, const ranked_machine& rm )
    {
        const std::size_t k = os.observations.size();
        const std::size_t nq = rm.states.size();
        _segment_of.push_back( -1 );
        std::vector< std::size_t > offset( k ), cap( k );
        std::vector< std::vector< bool > > matches( k, std::vector< bool >( nq ) );
        for ( std::size_t i = 0; i < k; ++i ) {
            const observation& o = os.observations[ i ];
            cap[ i ] = o.unbounded() ? std::max< std::size_t >( o.min, 1 ) : std::size_t{ o.min } + *o.max;
            offset[ i ] = _segment_of.size();
            for ( std::size_t c = 1; c <= cap[ i ]; ++c )
                _segment_of.push_back( static_cast< int >( i ) );
            for ( std::size_t q = 0; q < nq; ++q )
                matches[ i ][ q ] = eval_property( o.property, m, rm.states[ q ] );
        }

        const std::size_t size = _segment_of.size();
        _next.assign( size, std::vector< std::vector< id_t > >( nq ) );
        _accepting.assign( size, false );

        if ( k == 0 ) {
            for ( std::size_t q = 0; q < nq; ++q )
                _next[ 0 ][ q ] = { 0 };
            _accepting[ 0 ] = true;
            return;
        }

        // Segments after `after` that can be entered at state q, skipping
        // over segments that may stay empty.
        auto entries = [ & ]( std::ptrdiff_t after, std::size_t q, std::vector< id_t >& out ) {
            for ( std::size_t j = static_cast< std::size_t >( after + 1 ); j < k; ++j ) {
                if ( cap[ j ] >= 1 && matches[ j ][ q ] )
                    out.push_back( static_cast< id_t >( offset[ j ] ) );
                if ( os.observations[ j ].min != 0 )
                    break;
            }
        };
        auto rest_may_be_empty = [ & ]( std::ptrdiff_t after ) {
            for ( std::size_t j = static_cast< std::size_t >( after + 1 ); j < k; ++j )
                if ( os.observations[ j ].min != 0 )
                    return false;
            return true;
        };

        for ( std::size_t q = 0; q < nq; ++q )
            entries( -1, q, _next[ 0 ][ q ] );
        _accepting[ 0 ] = rest_may_be_empty( -1 );

        for ( std::size_t i = 0; i < k; ++i ) {
            const observation& o = os.observations[ i ];
            for ( std::size_t c = 1; c <= cap[ i ]; ++c ) {
                const std::size_t id = offset[ i ] + c - 1;
                const bool done = c >= o.min;
                _accepting[ id ] = done && rest_may_be_empty( static_cast< std::ptrdiff_t >( i ) );
                for ( std::size_t q = 0; q < nq; ++q ) {
                    auto& out = _next[ id ][ q ];
                    if ( matches[ i ][ q ] ) {
                        if ( c < cap[ i ] )
                            out.push_back( static_cast< id_t >( id + 1 ) );
                        else if ( o.unbounded() )
                            out.push_back( static_cast< id_t >( id ) );
                    }
                    if ( done )
                        entries( static_cast< std::ptrdiff_t >( i ), q, out );
                }
            }
        }
        _segments = k;
    }

    const std::vector< id_t >& next( id_t t, id_t q ) const { return _next[ t ][ q ]; }
    bool accepting( id_t t ) const { return _accepting[ t ]; }
    std::size_t size() const { return _segment_of.size(); }

    // Lexicographically least boundary list for a run given as state ids.
    // Taking the highest feasible segment at each step closes every segment
    // as early as the rest of the run allows.
    partition least_partition( const std::vector< id_t >& run_states ) const
    {
        if ( _segments == 0 )
            return {};
        const std::size_t n = run_states.size();
        std::vector< std::vector< bool > > feasible( n + 1, std::vector< bool >( size() ) );
        for ( std::size_t t = 0; t < size(); ++t )
            feasible[ n ][ t ] = _accepting[ t ];
        for ( std::size_t p = n; p-- > 0; )
            for ( std::size_t t = 0; t < size(); ++t )
                for ( id_t nt : _next[ t ][ run_states[ p ] ] )
                    if ( feasible[ p + 1 ][ nt ] ) {
                        feasible[ p ][ t ] = true;
                        break;
                    }

        std::vector< int > segment_at( n );
        id_t current = 0;
        for ( std::size_t p = 0; p < n; ++p ) {
            int best_segment = -1;
            id_t best = 0;
            for ( id_t nt : _next[ current ][ run_states[ p ] ] )
                if ( feasible[ p + 1 ][ nt ] && _segment_of[ nt ] > best_segment ) {
                    best_segment = _segment_of[ nt ];
                    best = nt;
                }
            current = best;
            segment_at[ p ] = best_segment;
        }

        partition result;
        result.boundaries.push_back( 0 );
        for ( std::size_t i = 1; i < _segments; ++i ) {
            std::size_t b = n;
            for ( std::size_t p = 0; p < n; ++p )
                if ( segment_at[ p ] >= static_cast< int >( i ) ) {
                    b = p;
                    break;
                }
            result.boundaries.push_back( b );
        }
        result.boundaries.push_back( n );
        return result;
    }

private:
    std::size_t _segments = 0;
    std::vector< int > _segment_of;
    std::vector< std::vector< std::vector< id_t > > > _next;
    std::vector< bool > _accepting;
};

// Forward-reachable part of machine x tracker_1 x ... x tracker_s.
// Tuple layout: [machine state, tracker ids...].
class product_space
{
public:
    product_space( const ranked_machine& rm, const std::vector< segment_tracker >& trackers )
        : _rm{ rm }, _trackers{ trackers }
    {
        std::vector< id_t > worklist;
        for ( id_t q0 : rm.initial )
            for_each_combination( q0, std::vector< id_t >( trackers.size(), 0 ), [ & ]( std::vector< id_t > tuple ) {
                const auto [ id, fresh ] = intern( std::move( tuple ) );
                _initial.push_back( id );
                if ( fresh )
                    worklist.push_back( id );
            } );
        std::sort( _initial.begin(), _initial.end() );
        _initial.erase( std::unique( _initial.begin(), _initial.end() ), _initial.end() );

        while ( !worklist.empty() ) {
            const id_t x = worklist.back();
            worklist.pop_back();
            const std::vector< id_t > from = _tuples[ x ];
            const std::vector< id_t > trackers_at( from.begin() + 1, from.end() );
            std::vector< std::pair< id_t, id_t > > succ;
            for ( const auto& [ event, to ] : rm.outgoing[ from[ 0 ] ] )
                for_each_combination( to, trackers_at, [ & ]( std::vector< id_t > tuple ) {
                    const auto [ id, fresh ] = intern( std::move( tuple ) );
                    succ.emplace_back( event, id );
                    if ( fresh )
                        worklist.push_back( id );
                } );
            std::sort( succ.begin(), succ.end() );
            succ.erase( std::unique( succ.begin(), succ.end() ), succ.end() );
            _succ[ x ] = std::move( succ );
        }
    }

    std::size_t size() const { return _tuples.size(); }
    const std::vector< id_t >& initial() const { return _initial; }
    const std::vector< std::pair< id_t, id_t > >& successors( id_t x ) const { return _succ[ x ]; }
    id_t machine_state( id_t x ) const { return _tuples[ x ][ 0 ]; }

    bool accepting( id_t x, bool anchored ) const
    {
        const auto& tuple = _tuples[ x ];
        if ( anchored && !_rm.final[ tuple[ 0 ] ] )
            return false;
        for ( std::size_t j = 0; j < _trackers.size(); ++j )
            if ( !_trackers[ j ].accepting( tuple[ j + 1 ] ) )
                return false;
        return true;
    }

private:
    // Every tuple reached by consuming state q from the given tracker ids.
    template < typename Fn >
    void for_each_combination( id_t q, const std::vector< id_t >& from, Fn&& fn ) const
    {
        std::vector< id_t > tuple( from.size() + 1 );
        tuple[ 0 ] = q;
        auto rec = [ & ]( auto&& self, std::size_t j ) -> void {
            if ( j == from.size() ) {
                fn( tuple );
                return;
            }
            for ( id_t t : _trackers[ j ].next( from[ j ], q ) ) {
                tuple[ j + 1 ] = t;
                self( self, j + 1 );
            }
        };
        rec( rec, 0 );
    }

    std::pair< id_t, bool > intern( std::vector< id_t > tuple )
    {
        const auto [ it, fresh ] = _index.try_emplace( tuple, static_cast< id_t >( _tuples.size() ) );
        if ( fresh ) {
            _tuples.push_back( std::move( tuple ) );
            _succ.emplace_back();
        }
        return { it->second, fresh };
    }

    const ranked_machine& _rm;
    const std::vector< segment_tracker >& _trackers;
    std::map< std::vector< id_t >, id_t > _index;
    std::vector< std::vector< id_t > > _tuples;
    std::vector< std::vector< std::pair< id_t, id_t > > > _succ;
    std::vector< id_t > _initial;
};

class backward_search
{
public:
    backward_search( const product_space& space, std::size_t max_len, bool anchored ) : _space{ space }
    {
        // _reach[m][x]: an accepting tuple is reachable from x in exactly m steps.
        _reach.assign( max_len, std::vector< bool >( space.size() ) );
        for ( id_t x = 0; x < space.size(); ++x )
            _reach[ 0 ][ x ] = space.accepting( x, anchored );
        for ( std::size_t m = 1; m < max_len; ++m )
            for ( id_t x = 0; x < space.size(); ++x )
                for ( const auto& [ event, y ] : space.successors( x ) )
                    if ( _reach[ m - 1 ][ y ] ) {
                        _reach[ m ][ x ] = true;
                        break;
                    }
    }

    // Visits every accepted run of exactly `length` states, ordered by event
    // labels then state labels. Stops when visit returns false.
    bool runs_of_length( std::size_t length, const std::function< bool( const std::vector< id_t >&,
                                                                         const std::vector< id_t >& ) >& visit )
    {
        _length = length;
        _visit = &visit;
        std::vector< id_t > first;
        for ( id_t x : _space.initial() )
            if ( _reach[ length - 1 ][ x ] )
                first.push_back( x );
        if ( first.empty() )
            return true;
        _layers = { std::move( first ) };
        _events.clear();
        return extend_events();
    }

private:
    bool extend_events()
    {
        const std::size_t depth = _layers.size();
        if ( depth == _length )
            return enumerate_states();
        const auto& remaining = _reach[ _length - depth - 1 ];
        std::map< id_t, std::vector< id_t > > by_event;
        for ( id_t x : _layers.back() )
            for ( const auto& [ event, y ] : _space.successors( x ) )
                if ( remaining[ y ] )
                    by_event[ event ].push_back( y );
        for ( auto& [ event, next ] : by_event ) {
            std::sort( next.begin(), next.end() );
            next.erase( std::unique( next.begin(), next.end() ), next.end() );
            _layers.push_back( std::move( next ) );
            _events.push_back( event );
            const bool go_on = extend_events();
            _events.pop_back();
            _layers.pop_back();
            if ( !go_on )
                return false;
        }
        return true;
    }

    // With the event word fixed, prune each layer to tuples that still lead
    // to acceptance along it, then choose states in label order.
    bool enumerate_states()
    {
        std::vector< std::set< id_t > > live( _length );
        live[ _length - 1 ].insert( _layers.back().begin(), _layers.back().end() );
        for ( std::size_t d = _length - 1; d-- > 0; )
            for ( id_t x : _layers[ d ] )
                for ( const auto& [ event, y ] : _space.successors( x ) )
                    if ( event == _events[ d ] && live[ d + 1 ].contains( y ) ) {
                        live[ d ].insert( x );
                        break;
                    }
        _live = std::move( live );
        _states.clear();
        std::map< id_t, std::vector< id_t > > by_state;
        for ( id_t x : _live[ 0 ] )
            by_state[ _space.machine_state( x ) ].push_back( x );
        for ( const auto& [ q, group ] : by_state ) {
            _states.push_back( q );
            const bool go_on = extend_states( group );
            _states.pop_back();
            if ( !go_on )
                return false;
        }
        return true;
    }

    bool extend_states( const std::vector< id_t >& group )
    {
        const std::size_t depth = _states.size();
        if ( depth == _length )
            return ( *_visit )( _states, _events );
        std::map< id_t, std::set< id_t > > by_state;
        for ( id_t x : group )
            for ( const auto& [ event, y ] : _space.successors( x ) )
                if ( event == _events[ depth - 1 ] && _live[ depth ].contains( y ) )
                    by_state[ _space.machine_state( y ) ].insert( y );
        for ( const auto& [ q, next ] : by_state ) {
            _states.push_back( q );
            const bool go_on = extend_states( std::vector< id_t >( next.begin(), next.end() ) );
            _states.pop_back();
            if ( !go_on )
                return false;
        }
        return true;
    }

    const product_space& _space;
    std::vector< std::vector< bool > > _reach;
    std::size_t _length = 0;
    const std::function< bool( const std::vector< id_t >&, const std::vector< id_t >& ) >* _visit = nullptr;
    std::vector< std::vector< id_t > > _layers;
    std::vector< std::set< id_t > > _live;
    std::vector< id_t > _events;
    std::vector< id_t > _states;
};

} // namespace

recon_result reconstruct( const state_machine& m, const evidential_statement& es, const recon_config& cfg )
{
    detail::validate_inputs( m, es, cfg );

    recon_result result;
    std::size_t lo = 1;
    std::optional< std::size_t > hi;
    for ( const auto& os : es.sequences ) {
        if ( os.observations.empty() )
            continue;
        const length_interval span = sequence_length_interval( os );
        lo = std::max( lo, span.lo );
        if ( span.hi )
            hi = hi ? std::min( *hi, *span.hi ) : *span.hi;
    }
    const std::size_t longest = hi ? std::min( *hi, cfg.max_run_length ) : cfg.max_run_length;
    if ( lo > longest )
        return result;

    const ranked_machine rm{ m };
    std::vector< segment_tracker > trackers;
    trackers.reserve( es.sequences.size() );
    for ( const auto& os : es.sequences )
        trackers.emplace_back( os, m, rm );
    const product_space space{ rm, trackers };
    backward_search search{ space, longest, detail::anchors_final( m, cfg ) };

    const double score = detail::statement_score( es, cfg.method );
    const auto labels = detail::sorted_labels( es );
    const std::size_t wanted = cfg.max_backtraces + 1;

    auto visit = [ & ]( const std::vector< id_t >& states, const std::vector< id_t >& events ) {
        backtrace bt;
        bt.score = score;
        bt.included_sequences = labels;
        for ( id_t q : states )
            bt.trace.states.push_back( rm.states[ q ] );
        for ( id_t e : events )
            bt.trace.events.push_back( rm.events[ e ] );
        for ( std::size_t j = 0; j < es.sequences.size(); ++j )
            bt.partitions.push_back( { es.sequences[ j ].label, trackers[ j ].least_partition( states ) } );
        std::sort( bt.partitions.begin(), bt.partitions.end() );
        result.backtraces.push_back( std::move( bt ) );
        return result.backtraces.size() < wanted;
    };

    for ( std::size_t length = lo; length <= longest; ++length )
        if ( !search.runs_of_length( length, visit ) )
            break;

    detail::rank_and_truncate( result.backtraces, cfg, result.cap_exceeded );
    return result;
}

} // namespace fcase
