#include "qavp/constellation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace qavp {

namespace {

unsigned gray_encode(unsigned i) { return i ^ (i >> 1); }

// Builds the ascending odd-integer levels -L+1, ..., -1, 1, ..., L-1.
std::vector<int> make_levels(int count) {
    std::vector<int> levels(count);
    for (int i = 0; i < count; ++i) levels[i] = 2 * i - (count - 1);
    return levels;
}

Constellation make_constellation(const std::string& name, int bits_re, int bits_im) {
    Constellation c;
    c.name = name;
    c.bits_per_axis = bits_re;
    c.bits_per_symbol = bits_re + bits_im;
    c.axis_levels = make_levels(1 << bits_re);

    const int n_re = 1 << bits_re;
    const int n_im = bits_im > 0 ? (1 << bits_im) : 1;
    c.points.reserve(static_cast<std::size_t>(n_re) * n_im);
    for (int a = 0; a < n_re; ++a) {
        for (int b = 0; b < n_im; ++b) {
            const double re = c.axis_levels[a];
            const double im = bits_im > 0 ? c.axis_levels[b] : 0.0;
            c.points.emplace_back(re, im);
        }
    }

    c.c_max = 0.0;
    for (const auto& p : c.points) c.c_max = std::max(c.c_max, std::abs(p));
    c.delta = 2.0;
    c.tau = 2.0 * (c.c_max + c.delta / 2.0);
    return c;
}

// Gray index of an ascending level position: level index i maps to the bit
// pattern gray(i), so adjacent levels differ in exactly one bit.
int level_from_bits(const std::vector<int>& levels, std::span<const std::uint8_t> bits) {
    unsigned g = 0;
    for (std::uint8_t b : bits) g = (g << 1) | (b & 1u);
    // invert g = i ^ (i >> 1)
    unsigned i = g;
    for (unsigned shift = 1; shift < 32; shift <<= 1) i ^= i >> shift;
    return levels[i];
}

void bits_from_level_index(unsigned index, int width, std::uint8_t* out) {
    const unsigned g = gray_encode(index);
    for (int b = 0; b < width; ++b) out[b] = static_cast<std::uint8_t>((g >> (width - 1 - b)) & 1u);
}

// Nearest level index; exact midpoint ties go to the smaller level.
int slice_axis(const std::vector<int>& levels, double x) {
    int best = 0;
    double best_d = std::abs(x - levels[0]);
    for (int i = 1; i < static_cast<int>(levels.size()); ++i) {
        const double d = std::abs(x - levels[i]);
        if (d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

}  // namespace

std::complex<double> Constellation::map_bits(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) != bits_per_symbol)
        throw std::invalid_argument("Constellation::map_bits: wrong bit count");
    const double re = level_from_bits(axis_levels, bits.subspan(0, bits_per_axis));
    double im = 0.0;
    if (has_imag_axis()) im = level_from_bits(axis_levels, bits.subspan(bits_per_axis));
    return {re, im};
}

std::complex<double> Constellation::slice(std::complex<double> y, std::uint8_t* bits_out) const {
    const int re_idx = slice_axis(axis_levels, y.real());
    double im = 0.0;
    if (has_imag_axis()) {
        const int im_idx = slice_axis(axis_levels, y.imag());
        im = axis_levels[im_idx];
        bits_from_level_index(static_cast<unsigned>(re_idx), bits_per_axis, bits_out);
        bits_from_level_index(static_cast<unsigned>(im_idx), bits_per_symbol - bits_per_axis,
                              bits_out + bits_per_axis);
    } else {
        bits_from_level_index(static_cast<unsigned>(re_idx), bits_per_axis, bits_out);
    }
    return {static_cast<double>(axis_levels[re_idx]), im};
}

bool Constellation::contains(std::complex<double> p, double tol) const {
    for (const auto& q : points)
        if (std::abs(p - q) <= tol) return true;
    return false;
}

const Constellation& Constellation::get(const std::string& name) {
    static const std::map<std::string, Constellation> table = {
        {"BPSK", make_constellation("BPSK", 1, 0)},
        {"QPSK", make_constellation("QPSK", 1, 1)},
        {"16QAM", make_constellation("16QAM", 2, 2)},
        {"64QAM", make_constellation("64QAM", 3, 3)},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown modulation: " + name);
    return it->second;
}

}  // namespace qavp
