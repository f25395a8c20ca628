#include "fcase/dsl.hpp"

#include <array>
#include <charconv>
#include <limits>

namespace fcase::dsl
{

namespace
{

enum class tok
{
    ident,
    integer,
    decimal,
    string,
    lbrace,
    rbrace,
    lparen,
    rparen,
    lbracket,
    rbracket,
    semicolon,
    comma,
    equals,
    star,
    dash_dash,  // --
    long_arrow, // -->
    end,
};

struct token
{
    tok kind = tok::end;
    std::string text;
    source_pos pos;
};

constexpr std::array keywords = { "case",     "machine",  "states",      "events",   "transitions", "property",
                                  "observation", "sequence", "theory", "evidence", "init",        "final",
                                  "any" };

bool is_keyword( std::string_view word )
{
    for ( std::string_view k : keywords )
        if ( k == word )
            return true;
    return false;
}

std::string describe( const token& t )
{
    switch ( t.kind ) {
    case tok::ident: return is_keyword( t.text ) ? "keyword '" + t.text + "'" : "identifier '" + t.text + "'";
    case tok::integer:
    case tok::decimal: return "number '" + t.text + "'";
    case tok::string: return "string literal";
    case tok::end: return "end of input";
    default: return "'" + t.text + "'";
    }
}

struct syntax_error
{
    diagnostic diag;
};

[[noreturn]] void fail( source_pos pos, std::string message )
{
    throw syntax_error{ { severity::error, std::move( message ), pos.line, pos.column } };
}

class lexer
{
public:
    explicit lexer( std::string_view source ) : _src{ source } {}

    std::vector< token > run()
    {
        std::vector< token > out;
        for ( ;; ) {
            skip_space_and_comments();
            token t;
            t.pos = { _line, _col };
            if ( _i >= _src.size() ) {
                out.push_back( std::move( t ) );
                return out;
            }
            const char c = _src[ _i ];
            if ( is_alpha( c ) ) {
                const std::size_t start = _i;
                while ( _i < _src.size() && ( is_alpha( _src[ _i ] ) || is_digit( _src[ _i ] ) || _src[ _i ] == '_' ) )
                    advance();
                t.kind = tok::ident;
                t.text = std::string{ _src.substr( start, _i - start ) };
            } else if ( is_digit( c ) ) {
                const std::size_t start = _i;
                while ( _i < _src.size() && is_digit( _src[ _i ] ) )
                    advance();
                t.kind = tok::integer;
                if ( _i + 1 < _src.size() && _src[ _i ] == '.' && is_digit( _src[ _i + 1 ] ) ) {
                    advance();
                    while ( _i < _src.size() && is_digit( _src[ _i ] ) )
                        advance();
                    t.kind = tok::decimal;
                }
                t.text = std::string{ _src.substr( start, _i - start ) };
                if ( _i < _src.size() && ( is_alpha( _src[ _i ] ) || _src[ _i ] == '_' ) )
                    fail( t.pos, "malformed number" );
            } else if ( c == '"' ) {
                t.kind = tok::string;
                t.text = lex_string( t.pos );
            } else if ( c == '-' ) {
                if ( _src.substr( _i, 3 ) == "-->" ) {
                    t.kind = tok::long_arrow;
                    t.text = "-->";
                } else if ( _src.substr( _i, 2 ) == "--" ) {
                    t.kind = tok::dash_dash;
                    t.text = "--";
                } else {
                    fail( t.pos, "unexpected character '-'" );
                }
                for ( std::size_t k = 0; k < t.text.size(); ++k )
                    advance();
            } else {
                t.text = std::string( 1, c );
                switch ( c ) {
                case '{': t.kind = tok::lbrace; break;
                case '}': t.kind = tok::rbrace; break;
                case '(': t.kind = tok::lparen; break;
                case ')': t.kind = tok::rparen; break;
                case '[': t.kind = tok::lbracket; break;
                case ']': t.kind = tok::rbracket; break;
                case ';': t.kind = tok::semicolon; break;
                case ',': t.kind = tok::comma; break;
                case '=': t.kind = tok::equals; break;
                case '*': t.kind = tok::star; break;
                default:
                    fail( t.pos, static_cast< unsigned char >( c ) < 0x20 || static_cast< unsigned char >( c ) >= 0x7f
                                     ? "unexpected character"
                                     : "unexpected character '" + t.text + "'" );
                }
                advance();
            }
            out.push_back( std::move( t ) );
        }
    }

private:
    static bool is_alpha( char c ) { return ( c >= 'a' && c <= 'z' ) || ( c >= 'A' && c <= 'Z' ); }
    static bool is_digit( char c ) { return c >= '0' && c <= '9'; }

    void advance()
    {
        if ( _src[ _i ] == '\n' ) {
            ++_line;
            _col = 1;
        } else {
            ++_col;
        }
        ++_i;
    }

    void skip_space_and_comments()
    {
        while ( _i < _src.size() ) {
            const char c = _src[ _i ];
            if ( c == ' ' || c == '\t' || c == '\r' || c == '\n' )
                advance();
            else if ( c == '/' && _i + 1 < _src.size() && _src[ _i + 1 ] == '/' )
                while ( _i < _src.size() && _src[ _i ] != '\n' )
                    advance();
            else
                return;
        }
    }

    std::string lex_string( source_pos start )
    {
        std::string value;
        advance(); // opening quote
        while ( _i < _src.size() ) {
            const char c = _src[ _i ];
            if ( c == '"' ) {
                advance();
                return value;
            }
            if ( c == '\n' )
                break;
            if ( c == '\\' ) {
                advance();
                if ( _i >= _src.size() || ( _src[ _i ] != '"' && _src[ _i ] != '\\' ) )
                    fail( { _line, _col }, "invalid escape in string literal" );
            }
            value += _src[ _i ];
            advance();
        }
        fail( start, "unterminated string literal" );
    }

    std::string_view _src;
    std::size_t _i = 0;
    std::uint32_t _line = 1;
    std::uint32_t _col = 1;
};

class parser
{
public:
    explicit parser( std::vector< token > tokens ) : _toks{ std::move( tokens ) } {}

    case_spec parse_file()
    {
        case_spec spec;
        expect_keyword( "case" );
        spec.name = expect( tok::string, "case name string" ).text;
        expect( tok::lbrace, "'{'" );
        spec.machine = parse_machine();
        while ( !at( tok::rbrace ) ) {
            const token& head = peek();
            if ( head.kind != tok::ident )
                fail( head.pos, "expected a declaration but found " + describe( head ) );
            if ( head.text == "property" )
                spec.properties.push_back( parse_property() );
            else if ( head.text == "observation" )
                spec.observations.push_back( parse_observation() );
            else if ( head.text == "sequence" )
                spec.sequences.push_back( parse_sequence( "sequence" ) );
            else if ( head.text == "theory" )
                spec.theories.push_back( parse_sequence( "theory" ) );
            else if ( head.text == "evidence" )
                spec.statements.push_back( parse_evidence() );
            else
                fail( head.pos, "expected a declaration but found " + describe( head ) );
        }
        expect( tok::rbrace, "'}'" );
        if ( !at( tok::end ) )
            fail( peek().pos, "expected end of input after case block but found " + describe( peek() ) );
        return spec;
    }

private:
    const token& peek() const { return _toks[ _i ]; }
    bool at( tok kind ) const { return peek().kind == kind; }
    bool at_keyword( std::string_view word ) const { return at( tok::ident ) && peek().text == word; }

    token next()
    {
        token t = _toks[ _i ];
        if ( t.kind != tok::end )
            ++_i;
        return t;
    }

    token expect( tok kind, std::string_view what )
    {
        if ( !at( kind ) )
            fail( peek().pos, "expected " + std::string{ what } + " but found " + describe( peek() ) );
        return next();
    }

    token expect_keyword( std::string_view word )
    {
        if ( !at_keyword( word ) )
            fail( peek().pos, "expected '" + std::string{ word } + "' but found " + describe( peek() ) );
        return next();
    }

    ident expect_ident( std::string_view what )
    {
        if ( !at( tok::ident ) || is_keyword( peek().text ) )
            fail( peek().pos, "expected " + std::string{ what } + " but found " + describe( peek() ) );
        token t = next();
        return { std::move( t.text ), t.pos };
    }

    // `name =` where name is a contextual field keyword (t, min, max, w).
    void expect_field( std::string_view field )
    {
        if ( !at( tok::ident ) || peek().text != field )
            fail( peek().pos, "expected '" + std::string{ field } + "=' but found " + describe( peek() ) );
        next();
        expect( tok::equals, "'='" );
    }

    std::uint64_t expect_natural( std::uint64_t limit, std::string_view what )
    {
        const token t = expect( tok::integer, what );
        std::uint64_t value = 0;
        const auto [ ptr, ec ] = std::from_chars( t.text.data(), t.text.data() + t.text.size(), value );
        if ( ec != std::errc{} || ptr != t.text.data() + t.text.size() || value > limit )
            fail( t.pos, "number '" + t.text + "' is out of range" );
        return value;
    }

    machine_decl parse_machine()
    {
        machine_decl m;
        m.pos = expect_keyword( "machine" ).pos;
        expect( tok::lbrace, "'{'" );

        expect_keyword( "states" );
        expect( tok::lbrace, "'{'" );
        while ( !at( tok::rbrace ) ) {
            state_decl s;
            s.name = expect_ident( "state name" );
            if ( at_keyword( "init" ) ) {
                next();
                s.initial = true;
            }
            if ( at_keyword( "final" ) ) {
                next();
                s.final = true;
            }
            expect( tok::semicolon, "';'" );
            m.states.push_back( std::move( s ) );
        }
        next();

        expect_keyword( "events" );
        expect( tok::lbrace, "'{'" );
        while ( !at( tok::rbrace ) )
            m.events.push_back( expect_ident( "event name" ) );
        next();

        expect_keyword( "transitions" );
        expect( tok::lbrace, "'{'" );
        while ( !at( tok::rbrace ) ) {
            transition_decl t;
            t.from = expect_ident( "source state" );
            expect( tok::dash_dash, "'--'" );
            t.event = expect_ident( "event name" );
            expect( tok::long_arrow, "'-->'" );
            t.to = expect_ident( "target state" );
            expect( tok::semicolon, "';'" );
            m.transitions.push_back( std::move( t ) );
        }
        next();

        expect( tok::rbrace, "'}'" );
        return m;
    }

    property_decl parse_property()
    {
        property_decl p;
        next();
        p.name = expect_ident( "property name" );
        expect( tok::equals, "'='" );
        if ( at_keyword( "any" ) ) {
            next();
            p.universal = true;
        } else {
            expect( tok::lbrace, "'{' or 'any'" );
            p.members.push_back( expect_ident( "state name" ) );
            while ( at( tok::comma ) ) {
                next();
                p.members.push_back( expect_ident( "state name" ) );
            }
            expect( tok::rbrace, "',' or '}'" );
        }
        expect( tok::semicolon, "';'" );
        return p;
    }

    observation_decl parse_observation()
    {
        observation_decl o;
        next();
        o.name = expect_ident( "observation name" );
        expect( tok::equals, "'='" );
        expect( tok::lparen, "'('" );
        if ( at_keyword( "any" ) ) {
            const token t = next();
            o.property = { t.text, t.pos };
        } else {
            o.property = expect_ident( "property name" );
        }
        expect( tok::comma, "','" );
        if ( at( tok::ident ) && peek().text == "t" ) {
            expect_field( "t" );
            o.t_ms = static_cast< std::int64_t >(
                    expect_natural( std::numeric_limits< std::int64_t >::max(), "timestamp in milliseconds" ) );
            expect( tok::comma, "','" );
        }
        expect_field( "min" );
        o.min = static_cast< std::uint32_t >( expect_natural( std::numeric_limits< std::uint32_t >::max(), "min" ) );
        expect( tok::comma, "','" );
        expect_field( "max" );
        if ( at( tok::star ) )
            next();
        else
            o.max = static_cast< std::uint32_t >(
                    expect_natural( std::numeric_limits< std::uint32_t >::max(), "max or '*'" ) );
        expect( tok::comma, "','" );
        expect_field( "w" );
        if ( !at( tok::decimal ) && !at( tok::integer ) )
            fail( peek().pos, "expected weight but found " + describe( peek() ) );
        const token w = next();
        o.w_pos = w.pos;
        o.w_nanos = parse_weight_literal( w );
        expect( tok::rparen, "')'" );
        expect( tok::semicolon, "';'" );
        return o;
    }

    // Syntax only; the (0, 1] range is a semantic check.
    static std::int64_t parse_weight_literal( const token& w )
    {
        const auto dot = w.text.find( '.' );
        const std::string whole = w.text.substr( 0, dot );
        const std::string frac = dot == std::string::npos ? "" : w.text.substr( dot + 1 );
        if ( frac.size() > 9 )
            fail( w.pos, "weight '" + w.text + "' has more than 9 fractional digits" );
        if ( whole.size() > 9 )
            return std::numeric_limits< std::int64_t >::max();
        std::int64_t value = std::stoll( whole ) * weight::scale;
        std::int64_t f = frac.empty() ? 0 : std::stoll( frac );
        for ( std::size_t k = frac.size(); k < 9; ++k )
            f *= 10;
        return value + f;
    }

    sequence_decl parse_sequence( std::string_view kind )
    {
        sequence_decl s;
        next();
        s.name = expect_ident( std::string{ kind } + " name" );
        expect( tok::equals, "'='" );
        expect( tok::lbracket, "'['" );
        if ( !at( tok::rbracket ) ) {
            s.items.push_back( expect_ident( "observation name" ) );
            while ( at( tok::comma ) ) {
                next();
                s.items.push_back( expect_ident( "observation name" ) );
            }
        }
        expect( tok::rbracket, "',' or ']'" );
        expect( tok::semicolon, "';'" );
        return s;
    }

    evidence_decl parse_evidence()
    {
        evidence_decl e;
        next();
        e.name = expect_ident( "evidence name" );
        expect( tok::equals, "'='" );
        expect( tok::lbrace, "'{'" );
        if ( !at( tok::rbrace ) ) {
            e.sequences.push_back( expect_ident( "sequence name" ) );
            while ( at( tok::comma ) ) {
                next();
                e.sequences.push_back( expect_ident( "sequence name" ) );
            }
        }
        expect( tok::rbrace, "',' or '}'" );
        expect( tok::semicolon, "';'" );
        return e;
    }

    std::vector< token > _toks;
    std::size_t _i = 0;
};

} // namespace

std::string to_string( const diagnostic& d )
{
    return std::to_string( d.line ) + ":" + std::to_string( d.column ) + ": " +
           ( d.level == severity::error ? "error" : "warning" ) + ": " + d.message;
}

bool has_errors( const std::vector< diagnostic >& diagnostics )
{
    for ( const auto& d : diagnostics )
        if ( d.level == severity::error )
            return true;
    return false;
}

parse_result parse_case( std::string_view source )
{
    parse_result result;
    try {
        parser p{ lexer{ source }.run() };
        result.spec = p.parse_file();
    } catch ( const syntax_error& e ) {
        result.diagnostics.push_back( e.diag );
    }
    return result;
}

} // namespace fcase::dsl
