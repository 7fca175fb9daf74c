#include "qavp/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>
#include <thread>

namespace qavp {

namespace {

const std::set<std::string> kSolverNames = {"brute", "sa", "sphere", "fse", "zf"};

constexpr int kMaxRedraws = 1000;

struct TrialContext {
    const SimConfig& cfg;
    const Constellation& cons;
    BitDepth t;
    const HardwareGraph* hw_graph;  // null unless the hardware model is on
};

bool needs_qubo(const SimConfig& cfg) {
    return cfg.solver.name == "brute" || cfg.solver.name == "sa" ||
           (cfg.preprocess.enabled && cfg.ppl_samples > 0);
}

TrialRecord run_trial(const TrialContext& ctx, int snr_idx, long trial) {
    const SimConfig& cfg = ctx.cfg;
    const auto si = static_cast<std::uint64_t>(snr_idx);
    const auto ti = static_cast<std::uint64_t>(trial);

    TrialRecord rec;
    rec.snr_db = cfg.snr_points[snr_idx];
    rec.channel_seed =
        derive_seed(cfg.master_seed, {si, ti, static_cast<std::uint64_t>(StreamTag::channel)});

    // channels failing the conditioning check are counted and redrawn
    ChannelInstance ch;
    for (int attempt = 0;; ++attempt) {
        if (attempt >= kMaxRedraws) throw std::runtime_error("channel redraw limit exceeded");
        RandomStream rng(derive_seed(rec.channel_seed, {static_cast<std::uint64_t>(attempt)}));
        try {
            ch = generate_channel(cfg.n_t, cfg.n_r, rng);
            rec.redraws = attempt;
            break;
        } catch (const IllConditionedChannel&) {
        }
    }

    RandomStream data_rng =
        substream(cfg.master_seed, {si, ti, static_cast<std::uint64_t>(StreamTag::data)});
    const SymbolVector u = draw_symbols(ctx.cons, cfg.n_r, data_rng);

    const std::uint64_t solver_seed =
        derive_seed(cfg.master_seed, {si, ti, static_cast<std::uint64_t>(StreamTag::solver)});

    QuboProblem qubo, conditioned;
    if (needs_qubo(cfg)) {
        qubo = build_qubo(ch, ctx.cons, u, ctx.t);
        if (cfg.preprocess.enabled) {
            auto [pre, report] = preprocess(qubo, cfg.preprocess.bounds);
            conditioned = std::move(pre);
            rec.pre_scale_factor = report.scale_factor;
            rec.pre_zeroed = report.zeroed_count;
        } else {
            conditioned = qubo;
        }
    }

    SolverResult result;
    if (cfg.solver.name == "zf") {
        result.best_v = PerturbationVector(cfg.n_r);
        result.best_objective = zf_power(ch, u);
    } else if (cfg.solver.name == "sphere") {
        result = select_with_fallback(solve_sphere_encoder(ch, ctx.cons, u, ctx.t), ch, ctx.cons,
                                      u, ctx.t);
    } else if (cfg.solver.name == "fse") {
        result = select_with_fallback(solve_fse(ch, ctx.cons, u, ctx.t, cfg.solver.breadth), ch,
                                      ctx.cons, u, ctx.t);
    } else if (cfg.solver.name == "brute") {
        result = select_with_fallback(solve_brute_force(conditioned), ch, ctx.cons, u, ctx.t);
    } else if (cfg.solver.name == "sa" && !cfg.hw.enabled) {
        SolverRequest req;
        req.num_reads = cfg.solver.num_reads;
        req.anneal_sweeps = cfg.solver.sweeps;
        req.beta_start = cfg.solver.beta_start;
        req.beta_end = cfg.solver.beta_end;
        req.seed = solver_seed;
        result = select_with_fallback(solve_sa(conditioned, req), ch, ctx.cons, u, ctx.t);
    } else {  // sa on the modeled device
        const IsingProblem logical = qubo_to_ising(conditioned);
        const double j_m = logical.max_coupling_magnitude();
        Embedding emb = clique_embed(logical.n_vars, *ctx.hw_graph);
        emb.chain_strength = cfg.hw.jf_mult * (j_m > 0.0 ? j_m : 1.0);
        DeviceRanges ranges;
        ranges.quantize_bits = cfg.hw.quantize_bits;
        const IceModel ice{cfg.hw.ice_sigma_h, cfg.hw.ice_sigma_j};
        SolverRequest req;
        req.num_reads = cfg.solver.num_reads;
        req.anneal_sweeps = cfg.solver.sweeps;
        req.beta_start = cfg.solver.beta_start;
        req.beta_end = cfg.solver.beta_end;
        req.seed = solver_seed;
        result = select_with_fallback(
            solve_on_hardware_model(logical, emb, *ctx.hw_graph, ranges, ice, req), ch, ctx.cons,
            u, ctx.t);
    }

    if (cfg.preprocess.enabled && cfg.ppl_samples > trial && qubo.n_vars <= 24) {
        try {
            rec.ppl = ppl(qubo, conditioned, qubo_argmin_exact);
        } catch (const std::runtime_error&) {
            // degenerate reference energy: leave unmeasured
        }
    }

    RandomStream noise_rng =
        substream(cfg.master_seed, {si, ti, static_cast<std::uint64_t>(StreamTag::noise)});
    double p_t = 0.0;
    const Eigen::VectorXcd y =
        transmit(ch, ctx.cons, u, result.best_v, rec.snr_db, noise_rng, p_t);
    const SymbolVector decoded = receive_decode(y, p_t, ctx.cons);

    rec.chosen_v = result.best_v;
    rec.p_t = p_t;
    rec.zf_p_t = zf_power(ch, u);
    rec.bits = static_cast<long>(u.source_bits.size());
    for (long b = 0; b < rec.bits; ++b) {
        if (decoded.source_bits[b] != u.source_bits[b]) {
            ++rec.bit_errors;
            rec.error_positions.push_back(static_cast<int>(b));
        }
    }
    rec.fallback_used = result.fallback_used;
    rec.solver_time_us = result.model_time_us;
    rec.broken_chain_fraction = result.mean_broken_fraction;
    return rec;
}

SnrSummary summarize(const SimConfig& cfg, int snr_idx, const std::vector<TrialRecord>& records) {
    SnrSummary s;
    s.snr_db = cfg.snr_points[snr_idx];
    s.trials = static_cast<long>(records.size());
    double pt_sum = 0.0, zf_sum = 0.0, broken_sum = 0.0, scale_sum = 0.0;
    long fallbacks = 0, broken_count = 0, scale_count = 0;
    for (const auto& r : records) {
        s.bits += r.bits;
        s.bit_errors += r.bit_errors;
        s.redraws += r.redraws;
        pt_sum += r.p_t;
        zf_sum += r.zf_p_t;
        if (r.fallback_used) ++fallbacks;
        if (r.broken_chain_fraction >= 0.0) {
            broken_sum += r.broken_chain_fraction;
            ++broken_count;
        }
        if (r.pre_scale_factor >= 0.0) {
            scale_sum += r.pre_scale_factor;
            ++scale_count;
            s.zeroed_total += r.pre_zeroed;
        }
        if (r.ppl >= 0.0) {
            ++s.ppl_count;
            s.ppl_mean += r.ppl;
            s.ppl_max = std::max(s.ppl_max, r.ppl);
        }
    }
    s.ber = s.bits > 0 ? static_cast<double>(s.bit_errors) / static_cast<double>(s.bits) : 0.0;
    s.throughput = throughput(records, cfg.packet_bits);
    if (s.trials > 0) {
        s.mean_p_t = pt_sum / static_cast<double>(s.trials);
        s.mean_zf_p_t = zf_sum / static_cast<double>(s.trials);
        s.fallback_rate = static_cast<double>(fallbacks) / static_cast<double>(s.trials);
    }
    if (broken_count > 0) s.mean_broken_chain_fraction = broken_sum / broken_count;
    if (scale_count > 0) s.mean_scale_factor = scale_sum / scale_count;
    if (s.ppl_count > 0) s.ppl_mean /= static_cast<double>(s.ppl_count);
    return s;
}

}  // namespace

std::vector<std::string> SimConfig::validate() const {
    std::vector<std::string> issues;
    const auto bad = [&](const std::string& field, const std::string& why) {
        issues.push_back(field + ": " + why);
    };

    if (n_t < 1) bad("n_t", "must be >= 1");
    if (n_r < 1 || n_r > n_t) bad("n_r", "must satisfy 1 <= n_r <= n_t");
    try {
        Constellation::get(modulation);
    } catch (const std::invalid_argument&) {
        bad("modulation", "must be one of BPSK/QPSK/16QAM/64QAM");
    }
    if (t_bits < 1 || t_bits > 6) bad("t_bits", "must be in [1, 6]");
    if (snr_points.empty()) bad("snr_points", "must be nonempty");
    for (double snr : snr_points)
        if (!std::isfinite(snr)) bad("snr_points", "entries must be finite");
    if (trials_per_point < 1) bad("trials_per_point", "must be >= 1");
    if (!kSolverNames.count(solver.name))
        bad("solver.name", "must be one of brute/sa/sphere/fse/zf");
    if (solver.num_reads < 1) bad("solver.num_reads", "must be >= 1");
    if (solver.sweeps < 1) bad("solver.sweeps", "must be >= 1");
    if (solver.breadth < 1) bad("solver.breadth", "must be >= 1");
    if (!(solver.beta_start > 0.0) || !(solver.beta_end >= solver.beta_start))
        bad("solver.beta_start", "need 0 < beta_start <= beta_end");
    if (preprocess.enabled) {
        if (!(preprocess.bounds.t_high > 0.0)) bad("preprocess.t_high", "must be positive");
        if (!(preprocess.bounds.elimination_threshold() < preprocess.bounds.t_high))
            bad("preprocess.t_low", "10^t_low must stay below t_high");
    }
    if (hw.enabled) {
        if (solver.name != "sa") bad("hw.enabled", "hardware model requires solver sa");
        if (hw.grid_m < 1) bad("hw.grid_m", "must be >= 1");
        if (!(hw.jf_mult > 0.0)) bad("hw.jf_mult", "must be positive");
        if (hw.ice_sigma_h < 0.0 || hw.ice_sigma_j < 0.0)
            bad("hw.ice_sigma", "must be non-negative");
        if (hw.quantize_bits < 0 || hw.quantize_bits > 16)
            bad("hw.quantize_bits", "must be in [0, 16]");
        if (n_r >= 1 && t_bits >= 1 && hw.grid_m >= 1) {
            const int logical = logical_qubit_count(n_r, BitDepth{t_bits});
            if (logical > 4 * hw.grid_m)
                bad("hw.grid_m", "chimera grid too small for " + std::to_string(logical) +
                                     " logical variables");
        }
    }
    if (solver.name == "brute") {
        const int logical = logical_qubit_count(std::max(n_r, 1), BitDepth{std::max(t_bits, 1)});
        if (logical > 24) bad("solver.name", "brute force limited to 24 logical variables");
    }
    if (packet_bits < 1) bad("packet_bits", "must be >= 1");
    if (threads < 1) bad("threads", "must be >= 1");
    if (ppl_samples < 0) bad("ppl_samples", "must be >= 0");
    return issues;
}

SweepResult run_sweep(const SimConfig& cfg) {
    const auto issues = cfg.validate();
    if (!issues.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& s : issues) msg += "\n  " + s;
        throw std::invalid_argument(msg);
    }

    const Constellation& cons = Constellation::get(cfg.modulation);
    const BitDepth t{cfg.t_bits};
    HardwareGraph graph;
    if (cfg.hw.enabled) graph = chimera(cfg.hw.grid_m);
    const TrialContext ctx{cfg, cons, t, cfg.hw.enabled ? &graph : nullptr};

    const int n_points = static_cast<int>(cfg.snr_points.size());
    const long per_point = cfg.trials_per_point;
    const long total = static_cast<long>(n_points) * per_point;

    SweepResult out;
    out.records.resize(total);

    std::atomic<long> next{0};
    const auto worker = [&] {
        for (;;) {
            const long idx = next.fetch_add(1);
            if (idx >= total) return;
            const int snr_idx = static_cast<int>(idx / per_point);
            const long trial = idx % per_point;
            out.records[idx] = run_trial(ctx, snr_idx, trial);
        }
    };

    const int n_threads = std::min<long>(cfg.threads, total);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    out.per_snr.reserve(n_points);
    for (int p = 0; p < n_points; ++p) {
        const std::vector<TrialRecord> slice(out.records.begin() + p * per_point,
                                             out.records.begin() + (p + 1) * per_point);
        out.per_snr.push_back(summarize(cfg, p, slice));
    }
    return out;
}

std::optional<double> throughput(const std::vector<TrialRecord>& records, long packet_bits) {
    if (packet_bits < 1) throw std::invalid_argument("packet_bits must be >= 1");
    long total_bits = 0;
    for (const auto& r : records) total_bits += r.bits;
    const long n_packets = total_bits / packet_bits;
    if (n_packets == 0) return std::nullopt;

    std::vector<std::uint8_t> dirty(n_packets, 0);
    long offset = 0;
    for (const auto& r : records) {
        for (int pos : r.error_positions) {
            const long packet = (offset + pos) / packet_bits;
            if (packet < n_packets) dirty[packet] = 1;
        }
        offset += r.bits;
    }
    long good = 0;
    for (std::uint8_t d : dirty)
        if (!d) ++good;
    return static_cast<double>(good) / static_cast<double>(n_packets);
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json config_json(const SimConfig& cfg) {
    nlohmann::json j;
    j["n_t"] = cfg.n_t;
    j["n_r"] = cfg.n_r;
    j["modulation"] = cfg.modulation;
    j["t_bits"] = cfg.t_bits;
    j["snr_points"] = cfg.snr_points;
    j["trials_per_point"] = cfg.trials_per_point;
    j["solver"] = {{"name", cfg.solver.name},
                   {"num_reads", cfg.solver.num_reads},
                   {"sweeps", cfg.solver.sweeps},
                   {"breadth", cfg.solver.breadth},
                   {"beta_start", cfg.solver.beta_start},
                   {"beta_end", cfg.solver.beta_end}};
    j["preprocess"] = {{"enabled", cfg.preprocess.enabled},
                       {"t_high", cfg.preprocess.bounds.t_high},
                       {"t_low", cfg.preprocess.bounds.t_low}};
    j["hw"] = {{"enabled", cfg.hw.enabled},
               {"grid_m", cfg.hw.grid_m},
               {"jf_mult", cfg.hw.jf_mult},
               {"ice_sigma_h", cfg.hw.ice_sigma_h},
               {"ice_sigma_j", cfg.hw.ice_sigma_j},
               {"quantize_bits", cfg.hw.quantize_bits}};
    j["master_seed"] = cfg.master_seed;
    j["packet_bits"] = cfg.packet_bits;
    j["ppl_samples"] = cfg.ppl_samples;
    return j;
}

}  // namespace

void emit_outputs(const SweepResult& result, const SimConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ofstream csv(fs::path(out_dir) / "trials.csv");
        csv << "snr_db,trial,p_t,zf_p_t,bit_errors,bits,fallback,wall_time_us,broken_chain_frac\n";
        const long per_point = cfg.trials_per_point;
        for (std::size_t idx = 0; idx < result.records.size(); ++idx) {
            const TrialRecord& r = result.records[idx];
            csv << fmt17(r.snr_db) << ',' << (idx % per_point) << ',' << fmt17(r.p_t) << ','
                << fmt17(r.zf_p_t) << ',' << r.bit_errors << ',' << r.bits << ','
                << (r.fallback_used ? 1 : 0) << ',' << std::llround(r.solver_time_us) << ',';
            if (r.broken_chain_fraction >= 0.0) csv << fmt17(r.broken_chain_fraction);
            csv << '\n';
        }
    }

    nlohmann::json summary;
    summary["config"] = config_json(cfg);
    long total_bits = 0, total_errors = 0, total_redraws = 0;
    summary["per_snr"] = nlohmann::json::array();
    for (const auto& s : result.per_snr) {
        nlohmann::json j;
        j["snr_db"] = s.snr_db;
        j["trials"] = s.trials;
        j["bits"] = s.bits;
        j["bit_errors"] = s.bit_errors;
        j["ber"] = s.ber;
        j["throughput"] = s.throughput ? nlohmann::json(*s.throughput) : nlohmann::json();
        j["mean_p_t"] = s.mean_p_t;
        j["mean_zf_p_t"] = s.mean_zf_p_t;
        j["fallback_rate"] = s.fallback_rate;
        j["mean_broken_chain_frac"] = s.mean_broken_chain_fraction
                                          ? nlohmann::json(*s.mean_broken_chain_fraction)
                                          : nlohmann::json();
        j["redraws"] = s.redraws;
        if (s.mean_scale_factor)
            j["preprocess"] = {{"mean_scale_factor", *s.mean_scale_factor},
                               {"zeroed_total", s.zeroed_total}};
        else
            j["preprocess"] = nullptr;
        if (s.ppl_count > 0)
            j["ppl"] = {{"count", s.ppl_count}, {"mean", s.ppl_mean}, {"max", s.ppl_max}};
        else
            j["ppl"] = nullptr;
        summary["per_snr"].push_back(std::move(j));
        total_bits += s.bits;
        total_errors += s.bit_errors;
        total_redraws += s.redraws;
    }
    summary["totals"] = {
        {"bits", total_bits},
        {"bit_errors", total_errors},
        {"ber", total_bits > 0 ? static_cast<double>(total_errors) / total_bits : 0.0},
        {"redraws", total_redraws},
        {"trials", static_cast<long>(result.records.size())}};
    {
        std::ofstream js(fs::path(out_dir) / "summary.json");
        js << summary.dump(2) << '\n';
    }

    {
        std::ofstream curve(fs::path(out_dir) / "curve.csv");
        curve << "solver,snr_db,ber,throughput\n";
        for (const auto& s : result.per_snr) {
            curve << cfg.solver.name << ',' << fmt17(s.snr_db) << ',' << fmt17(s.ber) << ',';
            if (s.throughput) curve << fmt17(*s.throughput);
            curve << '\n';
        }
    }
}

}  // namespace qavp
