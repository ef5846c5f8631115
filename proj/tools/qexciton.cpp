// qexciton: emission spectra of a high-density exciton-cavity system

#include <iostream>

#include <CLI11.hpp>

#include "qexciton/config.hpp"
#include "qexciton/report.hpp"
#include "qexciton/validation.hpp"

int main(int argc, char** argv) {
    CLI::App app("Emission spectra of a q-deformed exciton coupled to a cavity mode");
    app.require_subcommand(1);

    CLI::App* spectrum = app.add_subcommand("spectrum", "compute a spectrum and its line/peak report");
    qexciton::FlagValues flags;
    qexciton::register_run_flags(*spectrum, flags);

    CLI::App* validate = app.add_subcommand("validate", "run the oracle suite and print a pass/fail table");
    std::string level = "fast";
    bool tamper = false;
    validate->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    validate->add_flag("--tamper", tamper, "drop g from one cubic term of H' (the Hermiticity check must fail)");

    CLI11_PARSE(app, argc, argv);

    if (spectrum->parsed()) {
        qexciton::RunConfig config;
        try {
            config = qexciton::resolve_config(flags);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
        return qexciton::run_spectrum(config);
    }
    qexciton::ValidationOptions opt;
    opt.level = qexciton::parse_validation_level(level);
    opt.tamper = tamper;
    return qexciton::run_validate(opt);
}
