#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qavp/mimo.hpp"

namespace qavp {

// Signed binary expansion width: t+1 bits represent every integer in
// [-2^t, 2^t - 1].
struct BitDepth {
    int t = 1;
    int bits() const { return t + 1; }
    int lo() const { return -(1 << t); }
    int hi() const { return (1 << t) - 1; }
};

// Which perturbation bit a QUBO variable encodes.
struct VarInfo {
    int user = 0;
    bool imag = false;
    int bit = 0;  // 0..t-1 carry weight 2^bit, bit t carries -2^t
};

struct QuadTerm {
    int i = 0;
    int j = 0;
    double value = 0.0;
};

// Upper-triangular QUBO: E(q) = sum_i linear[i] q_i + sum_{i<j} value q_i q_j.
// The v-independent part of the objective lives in `offset`, so
// energy(q) + offset reproduces the original objective exactly.
struct QuboProblem {
    int n_vars = 0;
    std::vector<double> linear;   // diagonal f_i
    std::vector<QuadTerm> quad;   // i < j, ascending (i, j), nonzero
    double offset = 0.0;
    std::vector<VarInfo> var_map;  // empty for problems without VPP bookkeeping
    int bit_depth = 0;             // t, 0 when var_map is empty

    double energy(std::span<const std::uint8_t> bits) const;
    long term_count() const;  // nonzero linear + quadratic coefficients
};

// E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j with s_i in {-1,+1}.
struct IsingProblem {
    int n_vars = 0;
    std::vector<double> h;
    std::vector<QuadTerm> couplings;  // i < j, ascending, nonzero
    double offset = 0.0;

    double energy(std::span<const std::int8_t> spins) const;
    double max_coupling_magnitude() const;  // J_m
};

// sum_{m=1..t} 2^(m-1) q_m - 2^t q_{t+1}; bits.size() determines t.
int bits_to_integer(std::span<const std::uint8_t> bits);

// Inverse of bits_to_integer for values in [-2^t, 2^t - 1].
std::vector<std::uint8_t> integer_to_bits(int value, BitDepth t);

int logical_qubit_count(int n_r, BitDepth t);

// Expands ||P(u + tau v)||^2 over the real-stacked lattice with each integer
// component substituted by its signed binary expansion.
QuboProblem build_qubo(const ChannelInstance& ch, const Constellation& cons, const SymbolVector& u,
                       BitDepth t);

PerturbationVector decode_bits(std::span<const std::uint8_t> bits,
                               const std::vector<VarInfo>& var_map);

// Canonical-layout decode (real components first, then imaginary).
PerturbationVector decode_bits(std::span<const std::uint8_t> bits, int n_r, BitDepth t);

std::vector<std::uint8_t> encode_perturbation(const PerturbationVector& v, BitDepth t);

IsingProblem qubo_to_ising(const QuboProblem& p);
QuboProblem ising_to_qubo(const IsingProblem& p);

// Text format: "p qubo <n_vars> <n_terms> <offset>" then "i j value" lines,
// 0-based, i <= j, ascending, 17 significant digits.
void write_qubo(std::ostream& os, const QuboProblem& p);
QuboProblem read_qubo(std::istream& is);

}  // namespace qavp
