#include <iostream>

#include <CLI11.hpp>

#include "csd_cli/cli.hpp"

namespace csd::cli {

int main_entry(int argc, char** argv) {
    CLI::App app{"csd: Dirac and Chern-Simons field experiments"};
    app.require_subcommand(1);
    Invocation inv;
    std::string config, out = ".";
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* sub, bool seeded) {
        sub->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
        if (seeded) sub->add_option("--seed", seed, "64-bit seed (overrides the config)");
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_flag("--quick", inv.quick, "reduced sizes, same semantics");
    };
    common(app.add_subcommand("simulate", "Picard iteration from configured Cauchy data"), false);
    common(app.add_subcommand("verify", "invariant suites; exit 2 on any violation"), true);
    CLI::App* ill = app.add_subcommand("illposed", "scaling sweeps for the flow derivatives");
    ill->add_option("kind", inv.sub, "f2, aflow or cubic")->required()->check(CLI::IsMember({"f2", "aflow", "cubic"}));
    common(ill, true);
    common(app.add_subcommand("bilinear", "dyadic product and null-form sweeps"), true);
    common(app.add_subcommand("norm", "Besov and Sobolev norms of a solution archive"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::validation;
    }
    CLI::App* sub = app.get_subcommands().front();
    inv.command = sub->get_name();
    if (!config.empty()) inv.config = config;
    if (sub->get_option_no_throw("--seed") && sub->count("--seed")) inv.seed = seed;
    inv.out = out;
    try {
        return run(inv, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::nonconvergence;
    }
}

}  // namespace csd::cli
