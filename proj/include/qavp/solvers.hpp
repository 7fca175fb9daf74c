#pragma once

#include <cstdint>
#include <vector>

#include "qavp/qubo.hpp"

namespace qavp {

struct SolverRequest {
    int num_reads = 1;       // N_a
    int anneal_sweeps = 1000;  // classical surrogate for the anneal time
    std::uint64_t seed = 0;
    double beta_start = 0.1;
    double beta_end = 10.0;
};

// One candidate solution. `energy` is the problem energy plus offset, so for
// VPP-derived problems it approximates the transmit-power objective.
struct Read {
    std::vector<std::uint8_t> bits;
    double energy = 0.0;
    double broken_fraction = -1.0;  // < 0 when no embedding was involved
};

// Raw solver output before objective-based selection.
struct RawSolve {
    std::vector<Read> reads;
    std::uint64_t nodes_visited = 0;
    double model_time_us = 0.0;  // deterministic compute-cost model
};

// Final result after evaluating candidates on the original objective and
// applying the ZF fallback rule.
struct SolverResult {
    PerturbationVector best_v;
    double best_objective = 0.0;
    std::vector<Read> all_reads;
    int reads_used = 0;
    bool fallback_used = false;
    std::uint64_t nodes_visited = 0;
    double model_time_us = 0.0;
    double mean_broken_fraction = -1.0;
};

// Exact minimum by Gray-code enumeration; requires n_vars <= 24.
// Ties resolve to the lexicographically smallest bit string.
RawSolve solve_brute_force(const QuboProblem& p);

// Convenience wrapper for PPL and tests.
std::vector<std::uint8_t> qubo_argmin_exact(const QuboProblem& p);

// Metropolis single-spin-flip annealer: independent restarts, each running
// anneal_sweeps full passes in fixed index order over a geometric inverse
// temperature schedule. Deterministic given the seed.
RawSolve solve_sa(const QuboProblem& p, const SolverRequest& req);

// Same annealer on a spin problem; read bits are q_i = (s_i + 1)/2.
RawSolve solve_sa_ising(const IsingProblem& p, const SolverRequest& req);

// Depth-first Fincke-Pohst search with radius shrinking over the
// real-stacked lattice, restricted to the box [-2^t, 2^t - 1]^(2 n_r).
// Exact on every instance.
RawSolve solve_sphere_encoder(const ChannelInstance& ch, const Constellation& cons,
                              const SymbolVector& u, BitDepth t);

// Fixed-complexity variant: breadth-first with the `breadth` best partial
// metrics kept per level.
RawSolve solve_fse(const ChannelInstance& ch, const Constellation& cons, const SymbolVector& u,
                   BitDepth t, int breadth = 4);

// Decodes every read, evaluates the original objective, takes the minimum
// (first read wins ties) and falls back to v = 0 whenever no candidate
// beats plain zero forcing.
SolverResult select_with_fallback(const RawSolve& raw, const ChannelInstance& ch,
                                  const Constellation& cons, const SymbolVector& u, BitDepth t);

}  // namespace qavp
