// Command-line front end: scan, static, dsa and compare.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dsa/scenario.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seeds;
    bool trace = false;
};

dsa::ScenarioConfig load(const Options& o, std::optional<std::string_view> mode)
{
    auto cfg = o.config.empty() ? dsa::default_config() : dsa::load_config(o.config, mode);
    if (o.config.empty() && mode) cfg.mode = *mode == "static" ? dsa::ScenarioConfig::Mode{cfg.static_mode}
                                                              : dsa::ScenarioConfig::Mode{cfg.dsa_mode};
    if (!o.out.empty()) cfg.outputs = o.out;
    if (o.seeds) {
        cfg.seeds.clear();
        for (std::uint64_t s = 1; s <= *o.seeds; ++s) cfg.seeds.push_back(s);
    }
    if (o.trace) cfg.trace = true;
    dsa::validate(cfg);
    return cfg;
}

// Runs one stage, turning any failure into a message naming it.
template <typename Fn>
auto stage(const char* name, Fn fn)
{
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamic spectrum access simulator"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Scenario config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seeds", o.seeds, "Use seeds 1..n")->check(CLI::PositiveNumber);
        sub->add_flag("--trace", o.trace, "Write protocol traces");
    };
    auto* scan = app.add_subcommand("scan", "Sweep each scan band once and write energy maps");
    auto* stat = app.add_subcommand("static", "Fixed-channel run over the PU sweep");
    auto* dyn = app.add_subcommand("dsa", "DSA run over the PU sweep");
    auto* cmp = app.add_subcommand("compare", "Static and DSA runs with the improvement table");
    for (auto* s : {scan, stat, dyn, cmp}) add_common(s);

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan->parsed()) {
            const auto cfg = stage("config", [&] { return load(o, std::nullopt); });
            const auto files = stage("scan", [&] { return dsa::run_scan(cfg, cfg.outputs); });
            for (const auto& f : files) std::cout << f.string() << '\n';
        } else if (stat->parsed()) {
            const auto cfg = stage("config", [&] { return load(o, "static"); });
            const auto res = stage("static", [&] { return dsa::run_static(cfg); });
            stage("report", [&] { dsa::emit_report(res, cfg.outputs, "static", std::cout); return 0; });
        } else if (dyn->parsed()) {
            const auto cfg = stage("config", [&] { return load(o, "dsa"); });
            const auto res = stage("dsa", [&] { return dsa::run_dsa(cfg); });
            stage("report", [&] { dsa::emit_report(res, cfg.outputs, "dsa", std::cout); return 0; });
        } else if (cmp->parsed()) {
            const auto scfg = stage("config", [&] { return load(o, "static"); });
            const auto dcfg = stage("config", [&] { return load(o, "dsa"); });
            const auto sres = stage("static", [&] { return dsa::run_static(scfg); });
            const auto dres = stage("dsa", [&] { return dsa::run_dsa(dcfg); });
            stage("report", [&] {
                dsa::emit_report(sres, scfg.outputs, "static", std::cout);
                dsa::emit_report(dres, dcfg.outputs, "dsa", std::cout);
                dsa::emit_comparison(sres, dres, dcfg.outputs, std::cout);
                return 0;
            });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return EXIT_FAILURE;
    }
    return EXIT_SUCCESS;
}
