#include "cli.hpp"

#include "fcase/blackbox.hpp"
#include "fcase/dsl.hpp"
#include "fcase/recon.hpp"
#include "fcase/report.hpp"
#include "fcase/sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fcase::cli
{

namespace
{

// Carries an exit code out of a subcommand after its message was printed.
struct stop
{
    int code;
};

std::string read_file( const std::string& path, std::ostream& err )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in ) {
        err << "error: cannot read '" << path << "'\n";
        throw stop{ failure };
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file( const std::string& path, const std::string& text, std::ostream& err )
{
    std::ofstream out( path, std::ios::binary | std::ios::trunc );
    out << text;
    out.flush();
    if ( !out ) {
        err << "error: cannot write '" << path << "'\n";
        throw stop{ failure };
    }
}

void print_diagnostics( const std::string& path, const std::vector< dsl::diagnostic >& diagnostics, std::ostream& err )
{
    for ( const auto& d : diagnostics )
        err << path << ":" << dsl::to_string( d ) << "\n";
}

// Parses and checks; any error is fatal with the given exit code.
dsl::case_spec load_case( const std::string& path, std::ostream& err, int code_on_error = failure )
{
    auto parsed = dsl::parse_case( read_file( path, err ) );
    if ( !parsed.ok() ) {
        print_diagnostics( path, parsed.diagnostics, err );
        throw stop{ code_on_error };
    }
    const auto diagnostics = dsl::check_case( *parsed.spec );
    print_diagnostics( path, diagnostics, err );
    if ( dsl::has_errors( diagnostics ) )
        throw stop{ code_on_error };
    return std::move( *parsed.spec );
}

struct recon_flags
{
    std::size_t max_len = recon_config{}.max_run_length;
    std::size_t max_traces = recon_config{}.max_backtraces;
    std::string aggregator = "product";
    bool unanchored = false;

    void add_to( CLI::App& cmd )
    {
        cmd.add_option( "--max-len", max_len, "Longest run considered, in states" )->check( CLI::PositiveNumber );
        cmd.add_option( "--max-traces", max_traces, "Backtraces reported before truncating" )
                ->check( CLI::PositiveNumber );
        cmd.add_option( "--aggregator", aggregator, "Credibility aggregator" )
                ->check( CLI::IsMember( { "product", "min", "mean" } ) );
        cmd.add_flag( "--unanchored", unanchored, "Do not require runs to end in a final state" );
    }

    recon_config config() const
    {
        recon_config cfg;
        cfg.max_run_length = max_len;
        cfg.max_backtraces = max_traces;
        cfg.method = *parse_aggregator( aggregator );
        if ( unanchored )
            cfg.anchor_final = false;
        return cfg;
    }
};

int cmd_check( const std::string& path, std::ostream& out, std::ostream& err )
{
    auto parsed = dsl::parse_case( read_file( path, err ) );
    std::vector< dsl::diagnostic > diagnostics = parsed.diagnostics;
    if ( parsed.ok() )
        diagnostics = dsl::check_case( *parsed.spec );
    print_diagnostics( path, diagnostics, err );
    const auto errors = std::count_if( diagnostics.begin(), diagnostics.end(),
                                       []( const dsl::diagnostic& d ) { return d.level == severity::error; } );
    out << path << ": " << errors << " error(s), " << diagnostics.size() - static_cast< std::size_t >( errors )
        << " warning(s)\n";
    return errors ? negative : success;
}

bool same_result( const recon_result& a, const recon_result& b )
{
    return a.cap_exceeded == b.cap_exceeded && a.backtraces == b.backtraces;
}

int cmd_reconstruct( const std::string& path, const std::string& evidence, const recon_flags& flags, bool oracle,
                     std::ostream& out, std::ostream& err )
{
    const auto spec = load_case( path, err );
    const auto m = dsl::to_machine( spec );
    const auto es = dsl::resolve_statement( spec, evidence );
    const auto cfg = flags.config();
    const recon_result result = reconstruct( m, es, cfg );
    if ( oracle ) {
        const recon_result expected = enumerate_runs_oracle( m, es, cfg );
        if ( !same_result( result, expected ) ) {
            err << "error: reconstruction disagrees with the exhaustive oracle\n";
            err << "--- engine\n" << format_backtraces( evidence, result );
            err << "--- oracle\n" << format_backtraces( evidence, expected );
            return failure;
        }
    }
    out << format_backtraces( evidence, result );
    return result.backtraces.empty() ? negative : success;
}

int cmd_theory( const std::string& path, const std::string& evidence, const std::vector< std::string >& labels,
                const recon_flags& flags, std::ostream& out, std::ostream& err )
{
    const auto spec = load_case( path, err );
    const auto m = dsl::to_machine( spec );
    const auto es = dsl::resolve_statement( spec, evidence );
    std::vector< observation_sequence > theories;
    for ( const auto& label : labels ) {
        if ( std::none_of( spec.theories.begin(), spec.theories.end(),
                           [ & ]( const dsl::sequence_decl& t ) { return t.name.name == label; } ) ) {
            err << "error: undeclared theory '" << label << "'\n";
            return failure;
        }
        theories.push_back( dsl::resolve_sequence( spec, label ) );
    }
    const auto cfg = flags.config();
    if ( theories.size() == 1 ) {
        const theory_verdict verdict = check_theory( m, es, theories.front(), cfg );
        out << format_verdict( labels.front(), verdict );
        return verdict.agrees ? success : negative;
    }
    const auto ranking = rank_theories( m, es, theories, cfg );
    out << format_ranking( ranking );
    const bool any = std::any_of( ranking.begin(), ranking.end(), []( const ranked_theory& r ) { return r.verdict.agrees; } );
    return any ? success : negative;
}

int cmd_verify( const std::string& path, std::ostream& out, std::ostream& err )
{
    blackbox::integrity_report report;
    try {
        report = blackbox::verify_log( path );
    } catch ( const blackbox::log_read_error& e ) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
    out << blackbox::format_report( report );
    return report.clean() ? success : negative;
}

int cmd_ingest( const std::string& log_path, const std::string& rules_path, const std::string& out_path,
                const std::string& label, const std::string& mode, const std::string& case_path, bool accept_findings,
                std::ostream& out, std::ostream& err )
{
    blackbox::log_contents contents;
    try {
        contents = blackbox::read_log( log_path );
    } catch ( const blackbox::log_read_error& e ) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
    if ( !contents.report.clean() ) {
        err << log_path << ": integrity findings\n" << blackbox::format_report( contents.report );
        if ( !accept_findings )
            return negative;
    }
    const auto rules = blackbox::parse_rules( read_file( rules_path, err ) );
    blackbox::ingest_options options;
    options.label = label;
    options.mode = mode == "timeline" ? blackbox::ingest_mode::timeline : blackbox::ingest_mode::excursions;
    const evidential_statement statement = blackbox::derive_observations( contents.records, rules, options );

    if ( case_path.empty() ) {
        write_file( out_path, dsl::format_statement_fragment( statement ), err );
    } else {
        dsl::case_spec spec = load_case( case_path, err );
        dsl::add_statement( spec, statement );
        const auto diagnostics = dsl::check_case( spec );
        print_diagnostics( out_path, diagnostics, err );
        if ( dsl::has_errors( diagnostics ) )
            return failure;
        write_file( out_path, dsl::format_case( spec ), err );
    }

    out << "evidence " << statement.label << "\n";
    out << "records " << contents.records.size() << "\n";
    for ( const auto& os : statement.sequences ) {
        out << "sequence " << os.label << " observations " << os.observations.size();
        if ( os.observations.empty() )
            out << " (empty: rule never fired)";
        out << "\n";
    }
    return success;
}

int cmd_simulate( const std::string& case_path, const std::string& schedule_path, const std::string& log_path,
                  const std::string& truth_path, std::ostream& out, std::ostream& err )
{
    const auto spec = load_case( case_path, err );
    const auto sch = sim::parse_schedule( read_file( schedule_path, err ) );
    if ( !sch.end_ms ) {
        err << "error: schedule has no 'end <ms>;' directive\n";
        return failure;
    }
    const sim::simulation result = sim::simulate( dsl::to_machine( spec ), sch, *sch.end_ms );

    std::error_code ec;
    std::filesystem::remove( log_path, ec );
    auto writer = blackbox::log_writer::open( log_path );
    for ( const auto& rec : result.log )
        writer.append( rec );
    write_file( truth_path, format_run( result.truth ) + "\n", err );

    out << "truth " << format_run( result.truth ) << "\n";
    out << "records " << result.log.size() << "\n";
    return success;
}

int cmd_fmt( const std::string& path, bool to_stdout, std::ostream& out, std::ostream& err )
{
    const auto spec = load_case( path, err, negative );
    const std::string text = dsl::format_case( spec );
    if ( to_stdout )
        out << text;
    else
        write_file( path, text, err );
    return success;
}

} // namespace

int run_cli( const std::vector< std::string >& args, std::ostream& out, std::ostream& err )
{
    CLI::App app{ "Forensic case checking, event reconstruction and blackbox ingestion", "fcase" };
    app.require_subcommand( 1 );

    std::string case_path, evidence, log_path, rules_path, out_path, truth_path, schedule_path, label = "blackbox",
                                                                                             mode = "excursions",
                                                                                             base_case;
    std::vector< std::string > theories;
    bool oracle = false, to_stdout = false, accept_findings = false;
    recon_flags flags;

    auto* check = app.add_subcommand( "check", "Parse and check a case file" );
    check->add_option( "case", case_path, "Case file (.fcase)" )->required();

    auto* recon = app.add_subcommand( "reconstruct", "Rank the backtraces that explain an evidential statement" );
    recon->add_option( "case", case_path, "Case file (.fcase)" )->required();
    recon->add_option( "--evidence", evidence, "Evidence label" )->required();
    recon->add_flag( "--oracle", oracle, "Cross-check against exhaustive enumeration" );
    flags.add_to( *recon );

    auto* theory = app.add_subcommand( "theory", "Check one theory, or rank several, against evidence" );
    theory->add_option( "case", case_path, "Case file (.fcase)" )->required();
    theory->add_option( "--evidence", evidence, "Evidence label" )->required();
    theory->add_option( "--theory", theories, "Theory label (repeatable)" )->required();
    flags.add_to( *theory );

    auto* verify = app.add_subcommand( "verify", "Check blackbox log integrity" );
    verify->add_option( "log", log_path, "Blackbox log (.bblog)" )->required();

    auto* ingest = app.add_subcommand( "ingest", "Derive observation sequences from a blackbox log" );
    ingest->add_option( "log", log_path, "Blackbox log (.bblog)" )->required();
    ingest->add_option( "--rules", rules_path, "Threshold rules (.rules)" )->required();
    ingest->add_option( "--out", out_path, "Output case fragment" )->required();
    ingest->add_option( "--label", label, "Evidence label for the derived statement" );
    ingest->add_option( "--mode", mode, "excursions or timeline" )
            ->check( CLI::IsMember( { "excursions", "timeline" } ) );
    ingest->add_option( "--case", base_case, "Write a complete case: this case plus the derived evidence" );
    ingest->add_flag( "--accept-findings", accept_findings, "Ingest despite integrity findings" );

    auto* simulate = app.add_subcommand( "simulate", "Replay a schedule into a blackbox log" );
    simulate->add_option( "case", case_path, "Case file (.fcase)" )->required();
    simulate->add_option( "--schedule", schedule_path, "Schedule (.sched)" )->required();
    simulate->add_option( "--out", log_path, "Blackbox log to write" )->required();
    simulate->add_option( "--truth", truth_path, "Ground-truth run to write" )->required();

    auto* fmt = app.add_subcommand( "fmt", "Rewrite a case file in canonical form" );
    fmt->add_option( "case", case_path, "Case file (.fcase)" )->required();
    fmt->add_flag( "--stdout", to_stdout, "Print instead of rewriting in place" );

    try {
        std::vector< std::string > reversed( args.rbegin(), args.rend() );
        app.parse( reversed );
    } catch ( const CLI::CallForHelp& ) {
        out << app.help();
        return success;
    } catch ( const CLI::CallForAllHelp& ) {
        out << app.help( "", CLI::AppFormatMode::All );
        return success;
    } catch ( const CLI::ParseError& e ) {
        err << "error: " << e.what() << "\n" << app.help();
        return failure;
    }

    try {
        if ( check->parsed() )
            return cmd_check( case_path, out, err );
        if ( recon->parsed() )
            return cmd_reconstruct( case_path, evidence, flags, oracle, out, err );
        if ( theory->parsed() )
            return cmd_theory( case_path, evidence, theories, flags, out, err );
        if ( verify->parsed() )
            return cmd_verify( log_path, out, err );
        if ( ingest->parsed() )
            return cmd_ingest( log_path, rules_path, out_path, label, mode, base_case, accept_findings, out, err );
        if ( simulate->parsed() )
            return cmd_simulate( case_path, schedule_path, log_path, truth_path, out, err );
        if ( fmt->parsed() )
            return cmd_fmt( case_path, to_stdout, out, err );
    } catch ( const stop& s ) {
        return s.code;
    } catch ( const std::exception& e ) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
    return failure;
}

} // namespace fcase::cli
