#pragma once

// Durable append-only telemetry log (`.bblog`, JSON Lines with a CRC-32 per
// record) and the threshold-rule ingester that turns it into evidence.
//
// One record per line, fields in canonical order:
//   {"seq":0,"t_ms":1000,"channel":"speed_kmh","value":100.000,"level":"normal","crc":"0a07470f"}
// The crc covers the same line with the crc field removed.

#include "fcase/model.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fcase::blackbox
{

class durable_write_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class log_read_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// The record was not written because it breaks log continuity.
class append_rejected : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Fixed-point decimal with six fractional digits.
class decimal
{
public:
    static constexpr int max_precision = 6;

    constexpr decimal() = default;
    static constexpr decimal from_micros( std::int64_t micros ) { return decimal{ micros }; }

    /// "-12.5", "800", "0.125"; at most max_precision fractional digits.
    static std::optional< decimal > parse( std::string_view text );

    /// Fractional digits in a literal accepted by parse.
    static int precision_of( std::string_view text );

    /// Fixed notation; throws validation_error if precision would lose digits.
    [[nodiscard]] std::string to_string( int precision ) const;

    /// Shortest fixed notation that is exact.
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] constexpr std::int64_t micros() const { return _micros; }

    friend constexpr auto operator<=>( decimal, decimal ) = default;

private:
    explicit constexpr decimal( std::int64_t micros ) : _micros{ micros } {}

    std::int64_t _micros = 0;
};

enum class log_level
{
    normal,
    elevated,
};

[[nodiscard]] std::string_view to_string( log_level level );

inline constexpr int default_precision = 3;

struct record_fields
{
    std::uint64_t seq = 0;
    std::int64_t t_ms = 0;
    std::string channel;
    decimal value;
    int precision = default_precision; // fractional digits written for value
    log_level level = log_level::normal;

    friend bool operator==( const record_fields&, const record_fields& ) = default;
};

struct record : record_fields
{
    std::uint32_t crc = 0;

    friend bool operator==( const record&, const record& ) = default;
};

[[nodiscard]] bool is_identifier( std::string_view text );

/// Canonical serialization of everything except the crc.
[[nodiscard]] std::string canonical_body( const record_fields& fields );

/// Computes the crc; throws validation_error for a malformed channel or precision.
[[nodiscard]] record seal( record_fields fields );

/// Full log line without the trailing newline.
[[nodiscard]] std::string serialize( const record& rec );

/// Strict parse of one line (no newline). nullopt if malformed or the crc mismatches.
[[nodiscard]] std::optional< record > parse_line( std::string_view line );

/// Single writer for a log file. Opening creates the file if needed and drops a
/// torn trailing record left by an interrupted write.
class log_writer
{
public:
    static log_writer open( const std::filesystem::path& path );

    log_writer( log_writer&& other ) noexcept;
    log_writer& operator=( log_writer&& other ) noexcept;
    log_writer( const log_writer& ) = delete;
    log_writer& operator=( const log_writer& ) = delete;
    ~log_writer();

    /// Rejects sequence gaps and timestamp regressions without writing; the
    /// record is on stable storage when this returns.
    record append( record_fields fields );

    [[nodiscard]] std::uint64_t next_seq() const { return _next_seq; }

private:
    log_writer( int fd, std::uint64_t next_seq, std::optional< std::int64_t > last_t );

    int _fd = -1;
    std::uint64_t _next_seq = 0;
    std::optional< std::int64_t > _last_t;
};

struct crc_failure
{
    std::size_t line = 0;          // 1-based
    std::uint64_t expected_seq = 0; // position-derived

    friend bool operator==( const crc_failure&, const crc_failure& ) = default;
};

struct sequence_gap
{
    std::size_t line = 0;
    std::uint64_t expected = 0;
    std::uint64_t found = 0;

    friend bool operator==( const sequence_gap&, const sequence_gap& ) = default;
};

struct timestamp_regression
{
    std::size_t line = 0;
    std::uint64_t seq = 0;
    std::int64_t previous_t_ms = 0;
    std::int64_t t_ms = 0;

    friend bool operator==( const timestamp_regression&, const timestamp_regression& ) = default;
};

struct integrity_report
{
    std::size_t records_read = 0; // complete lines
    std::vector< crc_failure > crc_failures;
    std::vector< sequence_gap > gaps;
    std::vector< timestamp_regression > regressions;
    bool torn_tail = false;

    [[nodiscard]] std::size_t findings() const
    {
        return crc_failures.size() + gaps.size() + regressions.size() + ( torn_tail ? 1 : 0 );
    }
    [[nodiscard]] bool clean() const { return findings() == 0; }
};

struct log_contents
{
    std::vector< record > records; // records whose crc verified, in file order
    integrity_report report;
};

/// Verification of in-memory log bytes.
[[nodiscard]] log_contents scan_log( std::string_view bytes );

/// Throws log_read_error if the file cannot be read.
[[nodiscard]] log_contents read_log( const std::filesystem::path& path );
[[nodiscard]] integrity_report verify_log( const std::filesystem::path& path );

[[nodiscard]] std::string format_report( const integrity_report& report );

enum class comparator
{
    greater,
    greater_equal,
    less,
    less_equal,
};

[[nodiscard]] std::string_view to_string( comparator cmp );
[[nodiscard]] bool compare( decimal value, comparator cmp, decimal threshold );

struct threshold_rule
{
    std::string channel;
    comparator cmp = comparator::greater;
    decimal threshold;
    std::string property_name;
    weight w;

    friend bool operator==( const threshold_rule&, const threshold_rule& ) = default;
};

/// `.rules` text: `channel comparator threshold -> property_name w=WEIGHT` per
/// line, `#` or `//` comments. Throws validation_error naming the line.
[[nodiscard]] std::vector< threshold_rule > parse_rules( std::string_view text );
[[nodiscard]] std::string format_rule( const threshold_rule& rule );

enum class ingest_mode
{
    // Each excursion becomes (P, t, min=samples, max=0, w); nothing else.
    excursions,
    // Excursions and the stretches between them both become observations so
    // the sequence covers the whole recording; durations count machine states,
    // assuming every visited state was sampled at least once.
    timeline,
};

struct ingest_options
{
    ingest_mode mode = ingest_mode::excursions;
    std::string label = "blackbox";
};

/// One sequence per rule, labeled by the rule's property name, holding the
/// rule's excursions in chronological order. A rule that never fires yields an
/// empty sequence. Throws validation_error for unknown channels or repeated
/// property names.
[[nodiscard]] evidential_statement derive_observations( std::span< const record > records,
                                                        std::span< const threshold_rule > rules,
                                                        const ingest_options& options = {} );

} // namespace fcase::blackbox
