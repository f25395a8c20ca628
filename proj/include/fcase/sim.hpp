#pragma once

// Deterministic scenario replay: fire scheduled events through the machine and
// sample the per-state sensor values into a blackbox log.
//
// `.sched` files are line oriented:
//   period 1000;
//   end 6000;
//   sensor ok pressure_kpa=800;
//   at 2000 fire wear;

#include "fcase/blackbox.hpp"
#include "fcase/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fcase::sim
{

// A scheduled event could not be replayed (not enabled, or ambiguous).
class replay_error : public validation_error
{
public:
    using validation_error::validation_error;
};

struct sensor_reading
{
    std::string channel;
    blackbox::decimal value;
    int precision = blackbox::default_precision;

    friend bool operator==( const sensor_reading&, const sensor_reading& ) = default;
};

struct scheduled_event
{
    std::int64_t t_ms = 0;
    std::string event;

    friend bool operator==( const scheduled_event&, const scheduled_event& ) = default;
};

struct schedule
{
    std::vector< scheduled_event > entries;
    std::map< std::string, std::vector< sensor_reading > > sensor_map;
    std::int64_t sample_period_ms = 1000;
    std::optional< std::int64_t > end_ms;

    friend bool operator==( const schedule&, const schedule& ) = default;
};

/// Throws validation_error naming the offending line.
[[nodiscard]] schedule parse_schedule( std::string_view text );

struct simulation
{
    run truth;
    std::vector< blackbox::record > log;
};

/// Events scheduled after t_end are not replayed.
[[nodiscard]] simulation simulate( const state_machine& m, const schedule& sch, std::int64_t t_end );

} // namespace fcase::sim
