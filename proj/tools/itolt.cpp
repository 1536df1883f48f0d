// itolt: run local-time / Ito-formula experiments from the command line.
//
// Exit status: 0 all metrics pass, 1 a tolerance failed, 2 usage or config error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "itolt/harness/config.hpp"
#include "itolt/harness/run.hpp"

namespace {

using itolt::harness::ExperimentConfig;
using itolt::harness::Kind;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> steps;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> function;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "RNG seed");
    sub->add_option("--paths", c.paths, "number of Monte Carlo paths")->check(CLI::PositiveNumber);
    sub->add_option("--steps", c.steps, "time steps per path")->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--format", c.format, "per-path / table output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--function", c.function, "builtin function spec");
}

ExperimentConfig resolve(Kind kind, const Common& c) {
    ExperimentConfig cfg;
    if (!c.config.empty()) {
        cfg = itolt::harness::load_config(c.config);
        if (cfg.kind != kind) {
            throw itolt::harness::ConfigError(0, "config kind '" + to_string(cfg.kind) +
                                                     "' does not match the subcommand ('" + to_string(kind) + "')");
        }
    } else {
        cfg.kind = kind;
    }
    if (c.seed) cfg.seed = *c.seed;
    if (c.paths) cfg.n_paths = *c.paths;
    if (c.steps) cfg.n_steps = *c.steps;
    if (c.out) cfg.output = *c.out;
    if (c.format) cfg.format = *c.format;
    if (c.function) cfg.function = *c.function;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local-time and generalized Ito formula experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "itolt 0.1.0");

    const std::pair<const char*, Kind> subs[] = {{"check", Kind::formula_check},   {"occupation", Kind::occupation},
                                                 {"krylov", Kind::krylov},         {"variation", Kind::variation},
                                                 {"mollifier", Kind::mollifier_report}, {"converge", Kind::convergence}};
    const char* help[] = {"Ito-formula residuals per path",        "occupation-times formula and local-time calibration",
                          "Krylov estimate ratios",                "two-parameter variation of a surface",
                          "mollifier convergence table",           "residual refinement study"};
    Common common[6];
    CLI::App* apps[6];
    for (int i = 0; i < 6; ++i) {
        apps[i] = app.add_subcommand(subs[i].first, help[i]);
        add_common(apps[i], common[i]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        for (int i = 0; i < 6; ++i) {
            if (!apps[i]->parsed()) continue;
            const auto cfg = resolve(subs[i].second, common[i]);
            const auto rep = itolt::harness::run(cfg);
            for (const auto& m : rep.metrics) {
                std::cout << (m.pass ? "pass " : "FAIL ") << m.name << " = " << m.value << " (" << m.comparator << ' '
                          << m.tolerance << ")\n";
            }
            std::cout << "report: " << cfg.output << "/report.json\n";
            return rep.pass() ? 0 : 1;
        }
    } catch (const itolt::harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
