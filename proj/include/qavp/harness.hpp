#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qavp/hardware.hpp"
#include "qavp/mimo.hpp"
#include "qavp/preprocess.hpp"
#include "qavp/solvers.hpp"

namespace qavp {

struct SolverConfig {
    std::string name = "sphere";  // brute | sa | sphere | fse | zf
    int num_reads = 100;
    int sweeps = 1000;
    int breadth = 4;
    double beta_start = 0.1;
    double beta_end = 10.0;
};

struct HwModelConfig {
    bool enabled = false;
    int grid_m = 16;
    double jf_mult = 1.2;
    double ice_sigma_h = 0.01;
    double ice_sigma_j = 0.01;
    int quantize_bits = 0;
};

struct PreprocessSettings {
    bool enabled = false;
    PreprocessConfig bounds;
};

struct SimConfig {
    int n_t = 4;
    int n_r = 4;
    std::string modulation = "16QAM";
    int t_bits = 1;
    std::vector<double> snr_points;
    long trials_per_point = 1000;
    SolverConfig solver;
    PreprocessSettings preprocess;
    HwModelConfig hw;
    std::uint64_t master_seed = 1;
    long packet_bits = 12000;  // 1500-byte packets
    int threads = 1;
    int ppl_samples = 0;  // PPL measured on this many leading trials per point

    // Empty when valid; otherwise one "field: problem" line per issue.
    std::vector<std::string> validate() const;
};

struct SnrSummary {
    double snr_db = 0.0;
    long trials = 0;
    long bits = 0;
    long bit_errors = 0;
    double ber = 0.0;
    std::optional<double> throughput;
    double mean_p_t = 0.0;
    double mean_zf_p_t = 0.0;
    double fallback_rate = 0.0;
    std::optional<double> mean_broken_chain_fraction;
    std::optional<double> mean_scale_factor;
    long zeroed_total = 0;
    long redraws = 0;
    long ppl_count = 0;
    double ppl_mean = 0.0;
    double ppl_max = 0.0;
};

struct SweepResult {
    std::vector<TrialRecord> records;  // sorted by (snr index, trial index)
    std::vector<SnrSummary> per_snr;
};

// Runs the whole experiment grid. Deterministic given the config: every
// trial derives independent channel/data/noise/solver substreams from
// (master_seed, snr index, trial index, purpose), so results do not depend
// on scheduling and paired runs see identical channels across solvers.
SweepResult run_sweep(const SimConfig& cfg);

// Fraction of error-free packets after concatenating the records' bit
// streams into packet_bits-sized units; the trailing partial packet is
// dropped. Empty when no complete packet exists.
std::optional<double> throughput(const std::vector<TrialRecord>& records, long packet_bits);

// Writes trials.csv, summary.json and curve.csv. Output bytes are a pure
// function of (config, master_seed).
void emit_outputs(const SweepResult& result, const SimConfig& cfg, const std::string& out_dir);

}  // namespace qavp
