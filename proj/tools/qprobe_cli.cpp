#include "qprobe/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* cmd, qprobe::RunConfig& cfg, std::string& grid_text,
                std::string& grid2_text, std::string& config_path) {
    cmd->add_option("--config", config_path, "key=value config file (flags override)");
    cmd->add_option("--n-max", cfg.n_max, "Fock truncation");
    cmd->add_option("--m", cfg.m, "number of extra C unitaries");
    cmd->add_option("--seed", cfg.seed, "RNG seed for stochastic restarts");
    cmd->add_option("--output,-o", cfg.output, "output file path ('-' = stdout)");
    cmd->add_option("--format", cfg.format, "csv|json");
    cmd->add_option("--grid", grid_text, "grid spec lo:hi:n");
    cmd->add_option("--grid2", grid2_text, "second grid spec lo:hi:n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Channel quantumness probe: verification scans and classical bounds"};
    app.require_subcommand(1);

    qprobe::RunConfig cfg;
    std::string grid_text, grid2_text, config_path;
    std::string cmp1, cmp2, plot_file;

    auto* sq = app.add_subcommand("scan-squeezed",
                                  "quantum-domain boundary for squeezed test states");
    sq->add_option("--r", cfg.r, "input squeezing");
    sq->add_option("--nbar", cfg.nbar, "thermal mean photon number");
    add_common(sq, cfg, grid_text, grid2_text, config_path);

    auto* dp = app.add_subcommand("scan-displaced",
                                  "quantum-domain map for displaced test states");
    dp->add_option("--alpha", cfg.alpha, "input displacement");
    dp->add_option("--nbar", cfg.nbar, "thermal mean photon number");
    add_common(dp, cfg, grid_text, grid2_text, config_path);

    auto* qb = app.add_subcommand("scan-qubit", "p_max(theta) for qubit test states");
    qb->add_option("--phi", cfg.phi, "conditional phase (mixing)");
    qb->add_option("--mode", cfg.qubit_mode, "naive|optimal|optimal+c");
    add_common(qb, cfg, grid_text, grid2_text, config_path);

    auto* at = app.add_subcommand("attack-curve",
                                  "classical-domain boundary from EB strategies");
    at->add_option("--scenario", cfg.scenario, "squeezed|qubit");
    at->add_option("--r", cfg.r, "input squeezing");
    at->add_option("--nbar", cfg.nbar, "thermal mean photon number");
    at->add_option("--phi", cfg.phi, "conditional phase (qubit)");
    add_common(at, cfg, grid_text, grid2_text, config_path);

    auto* vp = app.add_subcommand("verify-point", "single-point verdict");
    vp->add_option("--scenario", cfg.scenario, "qubit|squeezed|displaced");
    vp->add_option("--r", cfg.r, "input squeezing");
    vp->add_option("--nbar", cfg.nbar, "thermal mean photon number");
    vp->add_option("--alpha", cfg.alpha, "input displacement");
    vp->add_option("--aout", cfg.a_out, "measured output displacement");
    vp->add_option("--v", cfg.v, "measured symmetric variance");
    vp->add_option("--var-x", cfg.var_x, "measured Var(x)");
    vp->add_option("--var-p", cfg.var_p, "measured Var(p)");
    vp->add_option("--theta", cfg.theta, "qubit test-state angle");
    vp->add_option("--phi", cfg.phi, "conditional phase");
    vp->add_option("--p", cfg.p, "depolarizing strength (qubit)");
    vp->add_option("--mode", cfg.qubit_mode, "naive|optimal|optimal+c");
    add_common(vp, cfg, grid_text, grid2_text, config_path);

    auto* cp = app.add_subcommand("compare", "pointwise gap between two curve files");
    cp->add_option("file1", cmp1)->required();
    cp->add_option("file2", cmp2)->required();

    auto* ep = app.add_subcommand("emit-plot", "write a plot script for a data file");
    ep->add_option("file", plot_file)->required();

    // load the config file (if any) before flag parsing so flags override it
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                cfg = qprobe::RunConfig::from_file(argv[i + 1], cfg);
            } catch (const qprobe::Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cp->parsed()) {
            const qprobe::GapReport rep = qprobe::compare(cmp1, cmp2);
            std::cout << "points=" << rep.n_points << " max_gap=" << rep.max_gap
                      << " mean_gap=" << rep.mean_gap << "\n";
            return 0;
        }
        if (ep->parsed()) {
            std::cout << qprobe::emit_plot(plot_file) << "\n";
            return 0;
        }
        if (sq->parsed()) cfg.command = "scan-squeezed";
        if (dp->parsed()) cfg.command = "scan-displaced";
        if (qb->parsed()) cfg.command = "scan-qubit";
        if (at->parsed()) cfg.command = "attack-curve";
        if (vp->parsed()) cfg.command = "verify-point";
        if (!grid_text.empty()) cfg.grid = qprobe::GridSpec::parse(grid_text);
        if (!grid2_text.empty()) cfg.grid2 = qprobe::GridSpec::parse(grid2_text);
        return qprobe::run(cfg);
    } catch (const qprobe::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
