// wbloc command-line driver: evaluate a scenario, run its sweep, list the
// built-in scenarios or validate a scenario file.

#include "wbloc/error.hpp"
#include "wbloc/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Args {
    std::string scenario;
    std::string out;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

const char* kind_code(wbloc::ErrorKind k)
{
    switch (k) {
    case wbloc::ErrorKind::Config: return "config";
    case wbloc::ErrorKind::DegenerateGeometry: return "degenerate_geometry";
    case wbloc::ErrorKind::Numerical: return "numerical";
    }
    return "unknown";
}

int exit_code(wbloc::ErrorKind k)
{
    switch (k) {
    case wbloc::ErrorKind::Config: return 1;
    case wbloc::ErrorKind::DegenerateGeometry: return 2;
    case wbloc::ErrorKind::Numerical: return 3;
    }
    return 3;
}

// One line: error: code=<kind> reason="<text>"
void report_error(const char* code, const std::string& reason)
{
    std::string clean;
    for (char c : reason) {
        if (c == '"' || c == '\\') clean += '\\';
        clean += (c == '\n' ? ' ' : c);
    }
    std::cerr << "error: code=" << code << " reason=\"" << clean << "\"\n";
}

void add_common(CLI::App* cmd, Args& args, bool needs_out)
{
    cmd->add_option("--scenario", args.scenario, "scenario JSON file or builtin:NAME")->required();
    cmd->add_option("--set", args.overrides, "dotted.path=value override (repeatable)");
    cmd->add_option("--seed", args.seed, "seed for generated channels and Monte Carlo experiments");
    if (needs_out) cmd->add_option("--out", args.out, "output file (default: stdout)");
    cmd->add_flag("--quiet", args.quiet, "suppress informational messages");
}

wbloc::Scenario load(const Args& args)
{
    wbloc::LoadOptions opts;
    opts.overrides = args.overrides;
    opts.seed = args.seed;
    return wbloc::load_scenario(args.scenario, opts);
}

void emit(const Args& args, const std::string& text)
{
    if (args.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(args.out, std::ios::binary);
    if (!f) throw wbloc::ConfigError("cannot write " + args.out);
    f << text;
    if (!f) throw wbloc::ConfigError("failed writing " + args.out);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wideband localization accuracy bounds"};
    app.require_subcommand(1);
    Args args;

    CLI::App* eval = app.add_subcommand("eval", "print SPEB/SOEB/STEB and EFIM eigenvalues for a scenario");
    add_common(eval, args, true);
    CLI::App* sweep = app.add_subcommand("sweep", "run the scenario's experiment and write CSV");
    add_common(sweep, args, true);
    CLI::App* list = app.add_subcommand("list-builtins", "list the built-in scenarios");
    CLI::App* validate = app.add_subcommand("validate", "check a scenario without running it");
    add_common(validate, args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("config", e.what());
        return 1;
    }

    try {
        if (list->parsed()) {
            for (const std::string& name : wbloc::builtin_names()) {
                std::cout << name << '\t' << wbloc::builtin_description(name) << '\n';
            }
        } else if (eval->parsed()) {
            emit(args, wbloc::format_report(wbloc::evaluate(load(args))));
        } else if (sweep->parsed()) {
            const wbloc::ResultTable table = wbloc::run_experiment(load(args));
            emit(args, table.to_csv());
            if (!args.quiet && !args.out.empty()) {
                std::cerr << "wrote " << table.rows() << " rows to " << args.out << '\n';
            }
        } else if (validate->parsed()) {
            load(args);
            if (!args.quiet) std::cerr << "scenario is valid\n";
        }
    } catch (const wbloc::Error& e) {
        report_error(kind_code(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        report_error("numerical", e.what());
        return 3;
    }
    return 0;
}
