#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "qbd/errors.hpp"
#include "scenario.hpp"

namespace {

using qbd::cli::ScenarioConfig;

/// Turn the unmatched remainder of a subcommand into dot-path overrides:
/// `--bath.gamma 1e-3` or `--bath.gamma=1e-3`.
void apply_extra_overrides(const std::vector<std::string>& extras,
                           nlohmann::json& doc) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& tok = extras[i];
        if (tok.rfind("--", 0) != 0)
            throw qbd::ValidationError("unexpected argument '" + tok +
                                       "' (overrides look like --a.b value)");
        const std::string body = tok.substr(2);
        const std::size_t eq = body.find('=');
        if (eq != std::string::npos) {
            qbd::cli::apply_override(doc, body.substr(0, eq),
                                     body.substr(eq + 1));
        } else {
            if (i + 1 >= extras.size())
                throw qbd::ValidationError("override '" + tok +
                                           "' is missing a value");
            qbd::cli::apply_override(doc, body, extras[++i]);
        }
    }
}

ScenarioConfig load_scenario(const std::string& configPath,
                             const std::vector<std::string>& extras) {
    nlohmann::json doc = nlohmann::json::object();
    if (!configPath.empty()) doc = qbd::cli::load_json_file(configPath);
    apply_extra_overrides(extras, doc);
    return qbd::cli::parse_scenario(doc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact survival-probability toolkit for quantum Brownian "
                 "motion: sweep closed-form decay curves, fit bath "
                 "parameters back out of them, and verify the machinery "
                 "against independent checks."};
    app.require_subcommand(1);

    std::string configPath, outputPath, inputPath;
    bool inTauD = false;

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Tabulate S(t) and the regime asymptotes as CSV");
    sweep->add_option("-c,--config", configPath, "Scenario JSON file");
    sweep->add_option("-o,--output", outputPath, "Output CSV path");
    sweep->add_flag("--in-tau-d", inTauD,
                    "Emit the time column in units of the decoherence time");
    sweep->allow_extras();

    CLI::App* fit = app.add_subcommand(
        "fit", "Recover bath parameters from a sweep CSV");
    fit->add_option("-i,--input", inputPath, "Input CSV path")->required();
    fit->add_option("-o,--output", outputPath,
                    "Report JSON path (stdout when omitted)");

    CLI::App* verify = app.add_subcommand(
        "verify", "Run the verification battery for a scenario");
    verify->add_option("-c,--config", configPath, "Scenario JSON file");
    verify->add_option("-o,--output", outputPath,
                       "Also write the JSON report to this path");
    verify->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) {
            ScenarioConfig cfg =
                load_scenario(configPath, sweep->remaining());
            if (!outputPath.empty()) cfg.outputPath = outputPath;
            if (inTauD) cfg.sweep.inTauD = true;
            return qbd::cli::run_sweep(cfg, std::cerr);
        }
        if (fit->parsed())
            return qbd::cli::run_fit(inputPath, outputPath, std::cerr);
        if (verify->parsed()) {
            ScenarioConfig cfg =
                load_scenario(configPath, verify->remaining());
            return qbd::cli::run_verify(cfg, outputPath, std::cout);
        }
    } catch (const qbd::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qbd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
