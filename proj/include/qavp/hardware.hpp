#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qavp/qubo.hpp"
#include "qavp/rng.hpp"
#include "qavp/solvers.hpp"

namespace qavp {

// Chimera C_m: an m x m grid of K4,4 unit cells with vertical couplers
// between side-0 qubits of vertically adjacent cells and horizontal
// couplers between side-1 qubits of horizontally adjacent cells.
struct HardwareGraph {
    int grid_m = 0;
    int n_qubits = 0;
    std::vector<std::pair<int, int>> couplers;  // a < b
    std::vector<std::vector<int>> adjacency;    // sorted neighbor lists

    bool has_coupler(int a, int b) const;
    static int qubit_id(int m, int row, int col, int side, int unit);
};

HardwareGraph chimera(int m);

// Logical variable -> ordered physical chain (consecutive entries adjacent).
struct Embedding {
    std::vector<std::vector<int>> chains;
    double chain_strength = 0.0;  // |J_F|

    int physical_qubit_count() const;
};

// Deterministic triangle clique embedding; uses the top-left ceil(n/4)
// cell block and produces uniform chains of length ceil(n/4)+1
// (a single qubit when n == 1). Throws when n exceeds the 4m capacity,
// naming the minimum grid that fits.
Embedding clique_embed(int n_logical, const HardwareGraph& g);

// Checks chain disjointness, connectivity, and the presence of a physical
// coupler for every logical coupling (when a problem is supplied).
// Returns human-readable violations; empty means valid.
std::vector<std::string> validate_embedding(const Embedding& e, const HardwareGraph& g,
                                            const IsingProblem* logical = nullptr);

struct DeviceRanges {
    double bias_min = -2.0, bias_max = 2.0;
    double coupler_min = -2.0, coupler_max = 1.0;
    int quantize_bits = 0;  // 0 disables coefficient quantization

    static DeviceRanges unbounded();
};

// Analog coefficient noise, sigma on the order of 1e-2.
struct IceModel {
    double sigma_h = 0.01;
    double sigma_j = 0.01;
};

// Splits each logical bias equally across its chain, places each logical
// coupling on the first physical coupler between the two chains, sets every
// intra-chain coupler to -|J_F|, then rescales uniformly into the device
// ranges (and optionally quantizes).
IsingProblem embed_problem(const IsingProblem& p, const Embedding& e, const HardwareGraph& g,
                           const DeviceRanges& ranges);

// Perturbs every nonzero coefficient with independent zero-mean Gaussians.
IsingProblem apply_ice(const IsingProblem& p, const IceModel& ice, RandomStream& rng);

struct UnembedResult {
    std::vector<std::int8_t> spins;  // logical
    double broken_fraction = 0.0;
};

// Majority vote per chain; exact ties resolve greedily (in logical index
// order) to the value minimizing the logical energy.
UnembedResult unembed(const std::vector<std::int8_t>& physical, const Embedding& e,
                      const IsingProblem& logical);

// How many independent copies of the n-variable problem fit on the chip,
// by physical-qubit budget: floor(8 m^2 / tile qubits), 0 when a single
// tile does not fit.
long parallel_capacity(int n_logical, const HardwareGraph& g);

// Full device pipeline per read: ICE perturbation, annealing on the
// embedded physical problem, chain resolution, and decode back to logical
// bits. Reads carry their broken-chain fraction.
RawSolve solve_on_hardware_model(const IsingProblem& logical, const Embedding& e,
                                 const HardwareGraph& g, const DeviceRanges& ranges,
                                 const IceModel& ice, const SolverRequest& req);

// One line per logical variable: "var_id: q1 q2 ...".
void write_embedding(std::ostream& os, const Embedding& e);
Embedding read_embedding(std::istream& is);

}  // namespace qavp
