#include "fcase/blackbox.hpp"

#include <zlib.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <sys/stat.h>
#include <unistd.h>

namespace fcase::blackbox
{

namespace
{

constexpr std::int64_t micro_scale = 1'000'000;
constexpr std::string_view crc_prefix = ",\"crc\":\"";
constexpr std::size_t crc_suffix_size = crc_prefix.size() + 8 + 2; // ,"crc":"xxxxxxxx"}

std::uint32_t crc32_of( std::string_view bytes )
{
    uLong crc = ::crc32( 0L, Z_NULL, 0 );
    crc = ::crc32( crc, reinterpret_cast< const Bytef* >( bytes.data() ), static_cast< uInt >( bytes.size() ) );
    return static_cast< std::uint32_t >( crc );
}

std::string hex8( std::uint32_t value )
{
    char buffer[ 9 ];
    std::snprintf( buffer, sizeof buffer, "%08x", value );
    return buffer;
}

// Cursor over one canonical line; every expect must match exactly.
class strict_reader
{
public:
    explicit strict_reader( std::string_view text ) : _text{ text } {}

    bool literal( std::string_view s )
    {
        if ( _text.substr( _i, s.size() ) != s )
            return false;
        _i += s.size();
        return true;
    }

    std::optional< std::string_view > until( char stop )
    {
        const auto end = _text.find( stop, _i );
        if ( end == std::string_view::npos )
            return std::nullopt;
        const auto out = _text.substr( _i, end - _i );
        _i = end;
        return out;
    }

    template < typename Int >
    std::optional< Int > integer()
    {
        const char* begin = _text.data() + _i;
        const char* end = _text.data() + _text.size();
        if ( begin == end || *begin < '0' || *begin > '9' || ( *begin == '0' && end - begin > 1 && begin[ 1 ] >= '0' && begin[ 1 ] <= '9' ) )
            return std::nullopt;
        Int value{};
        const auto [ ptr, ec ] = std::from_chars( begin, end, value );
        if ( ec != std::errc{} )
            return std::nullopt;
        _i += static_cast< std::size_t >( ptr - begin );
        return value;
    }

    bool done() const { return _i == _text.size(); }

private:
    std::string_view _text;
    std::size_t _i = 0;
};

void write_all( int fd, std::string_view bytes )
{
    while ( !bytes.empty() ) {
        const ssize_t n = ::write( fd, bytes.data(), bytes.size() );
        if ( n < 0 ) {
            if ( errno == EINTR )
                continue;
            throw durable_write_error( std::string{ "write failed: " } + std::strerror( errno ) );
        }
        bytes.remove_prefix( static_cast< std::size_t >( n ) );
    }
}

} // namespace

std::optional< decimal > decimal::parse( std::string_view text )
{
    bool negative = false;
    if ( !text.empty() && text[ 0 ] == '-' ) {
        negative = true;
        text.remove_prefix( 1 );
    }
    const auto dot = text.find( '.' );
    const std::string_view whole = text.substr( 0, dot );
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr( dot + 1 );
    if ( whole.empty() || whole.size() > 12 || frac.size() > max_precision ||
         ( dot != std::string_view::npos && frac.empty() ) )
        return std::nullopt;
    std::int64_t micros = 0;
    for ( char c : whole ) {
        if ( c < '0' || c > '9' )
            return std::nullopt;
        micros = micros * 10 + ( c - '0' );
    }
    micros *= micro_scale;
    std::int64_t f = 0;
    for ( char c : frac ) {
        if ( c < '0' || c > '9' )
            return std::nullopt;
        f = f * 10 + ( c - '0' );
    }
    for ( std::size_t k = frac.size(); k < max_precision; ++k )
        f *= 10;
    micros += f;
    return decimal{ negative ? -micros : micros };
}

int decimal::precision_of( std::string_view text )
{
    const auto dot = text.find( '.' );
    return dot == std::string_view::npos ? 0 : static_cast< int >( text.size() - dot - 1 );
}

std::string decimal::to_string( int precision ) const
{
    if ( precision < 0 || precision > max_precision )
        throw validation_error( "precision must be within 0.." + std::to_string( max_precision ) );
    std::int64_t step = 1;
    for ( int k = precision; k < max_precision; ++k )
        step *= 10;
    if ( _micros % step != 0 )
        throw validation_error( "value needs more than " + std::to_string( precision ) + " fractional digits" );
    const std::uint64_t magnitude = _micros < 0 ? static_cast< std::uint64_t >( -_micros ) : static_cast< std::uint64_t >( _micros );
    std::string out = _micros < 0 ? "-" : "";
    out += std::to_string( magnitude / micro_scale );
    if ( precision > 0 ) {
        std::string frac = std::to_string( magnitude % micro_scale );
        frac.insert( 0, max_precision - frac.size(), '0' );
        out += "." + frac.substr( 0, static_cast< std::size_t >( precision ) );
    }
    return out;
}

std::string decimal::to_string() const
{
    int precision = 0;
    for ( std::int64_t step = micro_scale; precision < max_precision && _micros % step != 0; step /= 10 )
        ++precision;
    return to_string( precision );
}

std::string_view to_string( log_level level )
{
    return level == log_level::elevated ? "elevated" : "normal";
}

bool is_identifier( std::string_view text )
{
    if ( text.empty() || !std::isalpha( static_cast< unsigned char >( text[ 0 ] ) ) )
        return false;
    for ( char c : text )
        if ( !std::isalnum( static_cast< unsigned char >( c ) ) && c != '_' )
            return false;
    return true;
}

std::string canonical_body( const record_fields& f )
{
    std::string out = "{\"seq\":" + std::to_string( f.seq ) + ",\"t_ms\":" + std::to_string( f.t_ms ) +
                      ",\"channel\":\"" + f.channel + "\",\"value\":" + f.value.to_string( f.precision ) +
                      ",\"level\":\"" + std::string{ to_string( f.level ) } + "\"}";
    return out;
}

record seal( record_fields fields )
{
    if ( !is_identifier( fields.channel ) )
        throw validation_error( "channel '" + fields.channel + "' is not an identifier" );
    if ( fields.t_ms < 0 )
        throw validation_error( "t_ms must be non-negative" );
    record rec;
    static_cast< record_fields& >( rec ) = std::move( fields );
    rec.crc = crc32_of( canonical_body( rec ) );
    return rec;
}

std::string serialize( const record& rec )
{
    std::string body = canonical_body( rec );
    body.pop_back();
    return body + std::string{ crc_prefix } + hex8( rec.crc ) + "\"}";
}

std::optional< record > parse_line( std::string_view line )
{
    if ( line.size() < crc_suffix_size + 2 )
        return std::nullopt;
    const std::size_t cut = line.size() - crc_suffix_size;
    const std::string_view suffix = line.substr( cut );
    if ( suffix.substr( 0, crc_prefix.size() ) != crc_prefix || suffix.substr( crc_prefix.size() + 8 ) != "\"}" )
        return std::nullopt;
    std::uint32_t stored = 0;
    const std::string_view hex = suffix.substr( crc_prefix.size(), 8 );
    for ( char c : hex ) {
        int digit;
        if ( c >= '0' && c <= '9' )
            digit = c - '0';
        else if ( c >= 'a' && c <= 'f' )
            digit = c - 'a' + 10;
        else
            return std::nullopt;
        stored = stored << 4 | static_cast< std::uint32_t >( digit );
    }
    const std::string body = std::string{ line.substr( 0, cut ) } + "}";
    if ( crc32_of( body ) != stored )
        return std::nullopt;

    record rec;
    rec.crc = stored;
    strict_reader in{ body };
    std::optional< std::string_view > channel, value, level;
    std::optional< std::uint64_t > seq;
    std::optional< std::int64_t > t;
    if ( !in.literal( "{\"seq\":" ) || !( seq = in.integer< std::uint64_t >() ) || !in.literal( ",\"t_ms\":" ) ||
         !( t = in.integer< std::int64_t >() ) || !in.literal( ",\"channel\":\"" ) || !( channel = in.until( '"' ) ) ||
         !in.literal( "\",\"value\":" ) || !( value = in.until( ',' ) ) || !in.literal( ",\"level\":\"" ) ||
         !( level = in.until( '"' ) ) || !in.literal( "\"}" ) || !in.done() )
        return std::nullopt;
    const auto parsed = decimal::parse( *value );
    if ( !parsed || !is_identifier( *channel ) || ( *level != "normal" && *level != "elevated" ) )
        return std::nullopt;
    rec.seq = *seq;
    rec.t_ms = *t;
    rec.channel = std::string{ *channel };
    rec.value = *parsed;
    rec.precision = decimal::precision_of( *value );
    rec.level = *level == "elevated" ? log_level::elevated : log_level::normal;
    // A valid crc over a non-canonical body means the writer was not this one.
    if ( canonical_body( rec ) != body )
        return std::nullopt;
    return rec;
}

log_contents scan_log( std::string_view bytes )
{
    log_contents out;
    std::uint64_t expected = 0;
    std::optional< std::int64_t > last_t;
    std::size_t line_no = 0;
    while ( !bytes.empty() ) {
        const auto newline = bytes.find( '\n' );
        if ( newline == std::string_view::npos ) {
            out.report.torn_tail = true;
            break;
        }
        const std::string_view line = bytes.substr( 0, newline );
        bytes.remove_prefix( newline + 1 );
        ++line_no;
        ++out.report.records_read;

        auto rec = parse_line( line );
        if ( !rec ) {
            // The corrupt line still occupies one slot in the sequence.
            out.report.crc_failures.push_back( { line_no, expected } );
            ++expected;
            continue;
        }
        if ( rec->seq != expected )
            out.report.gaps.push_back( { line_no, expected, rec->seq } );
        if ( last_t && rec->t_ms < *last_t )
            out.report.regressions.push_back( { line_no, rec->seq, *last_t, rec->t_ms } );
        expected = rec->seq + 1;
        last_t = rec->t_ms;
        out.records.push_back( std::move( *rec ) );
    }
    return out;
}

log_contents read_log( const std::filesystem::path& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw log_read_error( "cannot read log '" + path.string() + "'" );
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if ( in.bad() )
        throw log_read_error( "error while reading log '" + path.string() + "'" );
    return scan_log( buffer.str() );
}

integrity_report verify_log( const std::filesystem::path& path )
{
    return read_log( path ).report;
}

std::string format_report( const integrity_report& report )
{
    std::ostringstream out;
    out << "records " << report.records_read << "\n";
    out << "findings " << report.findings() << "\n";
    for ( const auto& f : report.crc_failures )
        out << "crc-failure line " << f.line << " seq " << f.expected_seq << "\n";
    for ( const auto& g : report.gaps )
        out << "sequence-gap line " << g.line << " expected " << g.expected << " found " << g.found << "\n";
    for ( const auto& r : report.regressions )
        out << "timestamp-regression line " << r.line << " seq " << r.seq << " t_ms " << r.t_ms << " after "
            << r.previous_t_ms << "\n";
    if ( report.torn_tail )
        out << "torn-tail\n";
    out << "status " << ( report.clean() ? "clean" : "findings" ) << "\n";
    return out.str();
}

log_writer::log_writer( int fd, std::uint64_t next_seq, std::optional< std::int64_t > last_t )
    : _fd{ fd }, _next_seq{ next_seq }, _last_t{ last_t }
{
}

log_writer::log_writer( log_writer&& other ) noexcept
    : _fd{ std::exchange( other._fd, -1 ) }, _next_seq{ other._next_seq }, _last_t{ other._last_t }
{
}

log_writer& log_writer::operator=( log_writer&& other ) noexcept
{
    if ( this != &other ) {
        if ( _fd >= 0 )
            ::close( _fd );
        _fd = std::exchange( other._fd, -1 );
        _next_seq = other._next_seq;
        _last_t = other._last_t;
    }
    return *this;
}

log_writer::~log_writer()
{
    if ( _fd >= 0 )
        ::close( _fd );
}

log_writer log_writer::open( const std::filesystem::path& path )
{
    std::uint64_t next_seq = 0;
    std::optional< std::int64_t > last_t;
    std::error_code ec;
    if ( std::filesystem::exists( path, ec ) ) {
        std::ifstream in( path, std::ios::binary );
        if ( !in )
            throw log_read_error( "cannot read log '" + path.string() + "'" );
        std::ostringstream buffer;
        buffer << in.rdbuf();
        const std::string bytes = buffer.str();
        const log_contents contents = scan_log( bytes );
        if ( !contents.records.empty() ) {
            next_seq = contents.records.back().seq + 1;
            last_t = contents.records.back().t_ms;
        }
        if ( contents.report.torn_tail ) {
            // The partial line was never acknowledged; cut it before appending.
            const auto keep = bytes.rfind( '\n' );
            const auto size = keep == std::string::npos ? 0 : keep + 1;
            std::filesystem::resize_file( path, size, ec );
            if ( ec )
                throw durable_write_error( "cannot drop torn record: " + ec.message() );
        }
    }
    const int fd = ::open( path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644 );
    if ( fd < 0 )
        throw durable_write_error( "cannot open log '" + path.string() + "': " + std::strerror( errno ) );
    return log_writer{ fd, next_seq, last_t };
}

record log_writer::append( record_fields fields )
{
    if ( fields.seq != _next_seq )
        throw append_rejected( "sequence gap: expected seq " + std::to_string( _next_seq ) + ", got " +
                               std::to_string( fields.seq ) );
    if ( _last_t && fields.t_ms < *_last_t )
        throw append_rejected( "timestamp regression: t_ms " + std::to_string( fields.t_ms ) + " precedes " +
                               std::to_string( *_last_t ) );
    record rec = seal( std::move( fields ) );
    const std::string line = serialize( rec ) + "\n";
    write_all( _fd, line );
    if ( ::fsync( _fd ) != 0 )
        throw durable_write_error( std::string{ "fsync failed: " } + std::strerror( errno ) );
    _next_seq = rec.seq + 1;
    _last_t = rec.t_ms;
    return rec;
}

} // namespace fcase::blackbox
