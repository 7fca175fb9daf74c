#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qavp {

// Square QAM / BPSK alphabet on the odd-integer lattice (..., -3, -1, 1, 3, ...),
// unnormalized so the symbol spacing is exactly 2 and the perturbation
// lattice stays integer-exact. Axis bits are Gray mapped.
struct Constellation {
    std::string name;
    std::vector<std::complex<double>> points;  // all symbols, level-ordered
    std::vector<int> axis_levels;              // ascending odd integers
    int bits_per_axis = 0;   // 0 on the imaginary axis for BPSK
    int bits_per_symbol = 0;
    double c_max = 0.0;      // magnitude of the largest symbol
    double delta = 2.0;      // nearest-neighbor spacing
    double tau = 0.0;        // modulo base 2*(c_max + delta/2)

    bool has_imag_axis() const { return bits_per_symbol > bits_per_axis; }

    // bits -> symbol; bits.size() == bits_per_symbol, real-axis bits first
    std::complex<double> map_bits(std::span<const std::uint8_t> bits) const;

    // nearest symbol plus its bit pattern; ties resolve to the point with
    // the lexicographically smallest (real, imag)
    std::complex<double> slice(std::complex<double> y, std::uint8_t* bits_out) const;

    bool contains(std::complex<double> p, double tol = 1e-9) const;

    static const Constellation& get(const std::string& name);  // BPSK/QPSK/16QAM/64QAM
};

}  // namespace qavp
