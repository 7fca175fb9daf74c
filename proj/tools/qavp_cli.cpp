#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qavp/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using qavp::BitDepth;
using qavp::SimConfig;

void add_sim_options(CLI::App* cmd, SimConfig& cfg, std::string& out_dir, bool& pre_enabled,
                     bool& hw_enabled, double& ice_sigma) {
    cmd->add_option("--nt", cfg.n_t, "transmit antennas");
    cmd->add_option("--nr", cfg.n_r, "single-antenna users");
    cmd->add_option("--mod", cfg.modulation, "modulation: BPSK/QPSK/16QAM/64QAM");
    cmd->add_option("--snr", cfg.snr_points, "SNR points in dB");
    cmd->add_option("--trials", cfg.trials_per_point, "trials per SNR point");
    cmd->add_option("--solver", cfg.solver.name, "brute|sa|sphere|fse|zf");
    cmd->add_option("--t-bits", cfg.t_bits, "perturbation bit depth t");
    cmd->add_option("--reads", cfg.solver.num_reads, "anneal reads per problem");
    cmd->add_option("--sweeps", cfg.solver.sweeps, "metropolis sweeps per read");
    cmd->add_option("--breadth", cfg.solver.breadth, "FSE surviving branches per level");
    cmd->add_flag("--pre", pre_enabled, "enable coefficient pre-processing");
    cmd->add_option("--t-high", cfg.preprocess.bounds.t_high, "pre-processing upper bound");
    cmd->add_option("--t-low", cfg.preprocess.bounds.t_low,
                    "pre-processing elimination exponent (threshold 10^t_low)");
    cmd->add_flag("--hw", hw_enabled, "run sa reads through the annealer hardware model");
    cmd->add_option("--chimera-grid", cfg.hw.grid_m, "chimera grid size m");
    cmd->add_option("--jf-mult", cfg.hw.jf_mult, "|J_F| as a multiple of J_m");
    cmd->add_option("--ice-sigma", ice_sigma, "ICE noise sigma (biases and couplers)");
    cmd->add_option("--quantize-bits", cfg.hw.quantize_bits,
                    "device coefficient precision (0 = exact)");
    cmd->add_option("--seed", cfg.master_seed, "master seed");
    cmd->add_option("--packet-bits", cfg.packet_bits, "bits per throughput packet");
    cmd->add_option("--ppl-samples", cfg.ppl_samples, "leading trials per point to measure PPL on");
    cmd->add_option("--threads", cfg.threads, "worker threads");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->configurable(true);
}

int exit_config_error(const std::vector<std::string>& issues) {
    std::cerr << "configuration error:\n";
    for (const auto& s : issues) std::cerr << "  " << s << '\n';
    return kExitConfig;
}

int cmd_simulate(SimConfig cfg, const std::string& out_dir, bool pre_enabled, bool hw_enabled,
                 double ice_sigma) {
    cfg.preprocess.enabled = pre_enabled;
    cfg.hw.enabled = hw_enabled;
    cfg.hw.ice_sigma_h = cfg.hw.ice_sigma_j = ice_sigma;
    const auto issues = cfg.validate();
    if (!issues.empty()) return exit_config_error(issues);

    const auto start = std::chrono::steady_clock::now();
    const qavp::SweepResult result = qavp::run_sweep(cfg);
    const auto elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (const auto& s : result.per_snr) {
        std::cout << "snr_db=" << s.snr_db << " trials=" << s.trials << " ber=" << s.ber;
        if (s.throughput) std::cout << " throughput=" << *s.throughput;
        std::cout << " mean_p_t=" << s.mean_p_t << " mean_zf_p_t=" << s.mean_zf_p_t
                  << " fallback_rate=" << s.fallback_rate;
        if (s.mean_broken_chain_fraction)
            std::cout << " broken_chain_frac=" << *s.mean_broken_chain_fraction;
        std::cout << '\n';
    }
    std::cerr << "completed " << result.records.size() << " trials in " << elapsed << " s\n";

    if (!out_dir.empty()) {
        qavp::emit_outputs(result, cfg, out_dir);
        std::cerr << "wrote " << out_dir << "/trials.csv, summary.json, curve.csv\n";
    }
    return 0;
}

int cmd_qubo_dump(const SimConfig& cfg, bool pre_enabled, const std::string& out_file) {
    const auto& cons = qavp::Constellation::get(cfg.modulation);
    const std::uint64_t channel_seed = qavp::derive_seed(
        cfg.master_seed, {0, 0, static_cast<std::uint64_t>(qavp::StreamTag::channel)});
    qavp::ChannelInstance ch;
    for (int attempt = 0;; ++attempt) {
        qavp::RandomStream rng(
            qavp::derive_seed(channel_seed, {static_cast<std::uint64_t>(attempt)}));
        try {
            ch = qavp::generate_channel(cfg.n_t, cfg.n_r, rng);
            break;
        } catch (const qavp::IllConditionedChannel&) {
            if (attempt > 100) throw;
        }
    }
    qavp::RandomStream data_rng = qavp::substream(
        cfg.master_seed, {0, 0, static_cast<std::uint64_t>(qavp::StreamTag::data)});
    const qavp::SymbolVector u = qavp::draw_symbols(cons, cfg.n_r, data_rng);

    qavp::QuboProblem p = qavp::build_qubo(ch, cons, u, BitDepth{cfg.t_bits});
    if (pre_enabled) {
        auto [pre, report] = qavp::preprocess(p, cfg.preprocess.bounds);
        p = std::move(pre);
        std::cerr << "scale_factor=" << report.scale_factor << " zeroed=" << report.zeroed_count
                  << " q_max=" << report.q_max_before << "->" << report.q_max_after << '\n';
    }
    if (out_file.empty()) {
        qavp::write_qubo(std::cout, p);
    } else {
        std::ofstream os(out_file);
        qavp::write_qubo(os, p);
    }
    return 0;
}

int cmd_solve(const std::string& qubo_file, const SimConfig& cfg) {
    std::ifstream is(qubo_file);
    if (!is) {
        std::cerr << "cannot open " << qubo_file << '\n';
        return kExitRuntime;
    }
    const qavp::QuboProblem p = qavp::read_qubo(is);

    qavp::RawSolve raw;
    if (cfg.solver.name == "brute") {
        raw = qavp::solve_brute_force(p);
    } else if (cfg.solver.name == "sa") {
        qavp::SolverRequest req;
        req.num_reads = cfg.solver.num_reads;
        req.anneal_sweeps = cfg.solver.sweeps;
        req.beta_start = cfg.solver.beta_start;
        req.beta_end = cfg.solver.beta_end;
        req.seed = cfg.master_seed;
        raw = qavp::solve_sa(p, req);
    } else {
        std::cerr << "solve reads a qubo file; use --solver brute or sa\n";
        return kExitConfig;
    }

    const qavp::Read* best = &raw.reads.front();
    for (const auto& r : raw.reads)
        if (r.energy < best->energy) best = &r;
    std::cout << "energy " << best->energy << "\nbits ";
    for (auto b : best->bits) std::cout << int(b);
    std::cout << '\n';
    return 0;
}

int cmd_embed(int n_logical, int grid_m, const std::string& out_file) {
    const qavp::HardwareGraph g = qavp::chimera(grid_m);
    const qavp::Embedding e = qavp::clique_embed(n_logical, g);
    const auto issues = qavp::validate_embedding(e, g);
    if (!issues.empty()) {
        for (const auto& s : issues) std::cerr << s << '\n';
        return kExitRuntime;
    }
    if (out_file.empty()) {
        qavp::write_embedding(std::cout, e);
    } else {
        std::ofstream os(out_file);
        qavp::write_embedding(os, e);
    }
    std::cerr << "embedded " << n_logical << " logical variables on "
              << e.physical_qubit_count() << " physical qubits\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vector perturbation precoding testbench (QUBO form, annealer model, baselines)"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "ini file with a [simulate] section; command-line flags override it");

    SimConfig cfg;
    std::string out_dir;
    bool pre_enabled = false;
    bool hw_enabled = false;
    double ice_sigma = 0.01;

    CLI::App* simulate = app.add_subcommand("simulate", "run an SNR sweep and emit CSV/JSON");
    add_sim_options(simulate, cfg, out_dir, pre_enabled, hw_enabled, ice_sigma);

    CLI::App* qubo = app.add_subcommand("qubo", "QUBO utilities");
    qubo->require_subcommand(1);
    CLI::App* dump = qubo->add_subcommand("dump", "build one instance and print its QUBO");
    add_sim_options(dump, cfg, out_dir, pre_enabled, hw_enabled, ice_sigma);

    CLI::App* solve = app.add_subcommand("solve", "solve a QUBO file");
    std::string qubo_file;
    solve->add_option("--qubo", qubo_file, "QUBO text file")->required();
    solve->add_option("--solver", cfg.solver.name, "brute|sa");
    solve->add_option("--reads", cfg.solver.num_reads, "anneal reads");
    solve->add_option("--sweeps", cfg.solver.sweeps, "sweeps per read");
    solve->add_option("--seed", cfg.master_seed, "seed");

    CLI::App* embed = app.add_subcommand("embed", "clique-embed n variables on a chimera graph");
    int n_logical = 4;
    int grid_m = 16;
    std::string embed_out;
    embed->add_option("--n-logical", n_logical, "logical variable count")->required();
    embed->add_option("--chimera-grid", grid_m, "grid size m");
    embed->add_option("--out", embed_out, "embedding file (default stdout)");

    CLI::App* capacity = app.add_subcommand("capacity", "parallel problem capacity of a chip");
    capacity->add_option("--n-logical", n_logical, "logical variable count")->required();
    capacity->add_option("--chimera-grid", grid_m, "grid size m");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (simulate->parsed())
            return cmd_simulate(cfg, out_dir, pre_enabled, hw_enabled, ice_sigma);
        if (qubo->parsed()) return cmd_qubo_dump(cfg, pre_enabled, out_dir);
        if (solve->parsed()) return cmd_solve(qubo_file, cfg);
        if (embed->parsed()) return cmd_embed(n_logical, grid_m, embed_out);
        if (capacity->parsed()) {
            std::cout << qavp::parallel_capacity(n_logical, qavp::chimera(grid_m)) << '\n';
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
