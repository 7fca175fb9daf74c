#include "qavp/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qavp {

double QuboProblem::energy(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) != n_vars)
        throw std::invalid_argument("assignment length mismatch");
    double e = 0.0;
    for (int i = 0; i < n_vars; ++i)
        if (bits[i]) e += linear[i];
    for (const auto& t : quad)
        if (bits[t.i] && bits[t.j]) e += t.value;
    return e;
}

long QuboProblem::term_count() const {
    long n = static_cast<long>(quad.size());
    for (double f : linear)
        if (f != 0.0) ++n;
    return n;
}

double IsingProblem::energy(std::span<const std::int8_t> spins) const {
    if (static_cast<int>(spins.size()) != n_vars)
        throw std::invalid_argument("spin vector length mismatch");
    double e = 0.0;
    for (int i = 0; i < n_vars; ++i) e += h[i] * spins[i];
    for (const auto& t : couplings) e += t.value * spins[t.i] * spins[t.j];
    return e;
}

double IsingProblem::max_coupling_magnitude() const {
    double m = 0.0;
    for (const auto& t : couplings) m = std::max(m, std::abs(t.value));
    return m;
}

int bits_to_integer(std::span<const std::uint8_t> bits) {
    if (bits.size() < 2) throw std::invalid_argument("need at least t+1 = 2 bits");
    const int t = static_cast<int>(bits.size()) - 1;
    int value = 0;
    for (int m = 0; m < t; ++m)
        if (bits[m]) value += 1 << m;
    if (bits[t]) value -= 1 << t;
    return value;
}

std::vector<std::uint8_t> integer_to_bits(int value, BitDepth t) {
    if (value < t.lo() || value > t.hi())
        throw std::invalid_argument("integer outside representable range");
    std::vector<std::uint8_t> bits(t.bits(), 0);
    int rest = value;
    if (rest < 0) {
        bits[t.t] = 1;
        rest += 1 << t.t;
    }
    for (int m = 0; m < t.t; ++m) bits[m] = static_cast<std::uint8_t>((rest >> m) & 1);
    return bits;
}

int logical_qubit_count(int n_r, BitDepth t) { return 2 * n_r * t.bits(); }

QuboProblem build_qubo(const ChannelInstance& ch, const Constellation& cons, const SymbolVector& u,
                       BitDepth t) {
    const int n_r = ch.n_r;
    if (u.symbols.size() != n_r) throw std::invalid_argument("symbol vector length mismatch");
    const int n_comp = 2 * n_r;
    const int bits = t.bits();
    const int n_vars = n_comp * bits;
    const double tau = cons.tau;

    // Over the real-stacked lattice the objective is
    // (u~ + tau v~)^T G (u~ + tau v~) with v~ in Z^(2 n_r).
    const Eigen::MatrixXd G = real_stacked_gram(ch.P);
    const Eigen::VectorXd u_stack = real_stack(u.symbols);
    const Eigen::VectorXd gu = G * u_stack;

    // Expansion weights of one component's bits.
    std::vector<double> w(bits);
    for (int m = 0; m < t.t; ++m) w[m] = static_cast<double>(1 << m);
    w[t.t] = -static_cast<double>(1 << t.t);

    QuboProblem p;
    p.n_vars = n_vars;
    p.bit_depth = t.t;
    p.offset = u_stack.dot(gu);
    p.linear.assign(n_vars, 0.0);
    p.var_map.resize(n_vars);
    p.quad.reserve(static_cast<std::size_t>(n_vars) * (n_vars - 1) / 2);

    const double tau2 = tau * tau;
    for (int i = 0; i < n_vars; ++i) {
        const int ci = i / bits, mi = i % bits;
        p.var_map[i] = VarInfo{ci % n_r, ci >= n_r, mi};
        // diagonal: quadratic self-term collapses onto the linear part
        p.linear[i] = tau2 * w[mi] * w[mi] * G(ci, ci) + 2.0 * tau * w[mi] * gu(ci);
        for (int j = i + 1; j < n_vars; ++j) {
            const int cj = j / bits, mj = j % bits;
            const double g = 2.0 * tau2 * w[mi] * w[mj] * G(ci, cj);
            if (g != 0.0) p.quad.push_back({i, j, g});
        }
    }
    return p;
}

PerturbationVector decode_bits(std::span<const std::uint8_t> bits,
                               const std::vector<VarInfo>& var_map) {
    if (bits.size() != var_map.size()) throw std::invalid_argument("bit/var_map length mismatch");
    int n_r = 0, t = 0;
    for (const auto& v : var_map) {
        n_r = std::max(n_r, v.user + 1);
        t = std::max(t, v.bit);  // highest position is the sign bit
    }
    PerturbationVector out(n_r);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!bits[i]) continue;
        const VarInfo& info = var_map[i];
        const int contribution = info.bit == t ? -(1 << info.bit) : (1 << info.bit);
        if (info.imag)
            out[info.user].im += contribution;
        else
            out[info.user].re += contribution;
    }
    return out;
}

PerturbationVector decode_bits(std::span<const std::uint8_t> bits, int n_r, BitDepth t) {
    const int width = t.bits();
    if (static_cast<int>(bits.size()) != 2 * n_r * width)
        throw std::invalid_argument("bit string length mismatch");
    PerturbationVector out(n_r);
    for (int c = 0; c < 2 * n_r; ++c) {
        const int value = bits_to_integer(bits.subspan(static_cast<std::size_t>(c) * width, width));
        if (c < n_r)
            out[c].re = value;
        else
            out[c - n_r].im = value;
    }
    return out;
}

std::vector<std::uint8_t> encode_perturbation(const PerturbationVector& v, BitDepth t) {
    const int n_r = static_cast<int>(v.size());
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(2 * n_r) * t.bits());
    for (int k = 0; k < n_r; ++k) {
        auto b = integer_to_bits(v[k].re, t);
        bits.insert(bits.end(), b.begin(), b.end());
    }
    for (int k = 0; k < n_r; ++k) {
        auto b = integer_to_bits(v[k].im, t);
        bits.insert(bits.end(), b.begin(), b.end());
    }
    return bits;
}

IsingProblem qubo_to_ising(const QuboProblem& p) {
    // q_i = (s_i + 1)/2
    IsingProblem out;
    out.n_vars = p.n_vars;
    out.h.assign(p.n_vars, 0.0);
    out.offset = p.offset;
    for (int i = 0; i < p.n_vars; ++i) {
        out.h[i] += p.linear[i] / 2.0;
        out.offset += p.linear[i] / 2.0;
    }
    out.couplings.reserve(p.quad.size());
    for (const auto& t : p.quad) {
        const double j = t.value / 4.0;
        if (j != 0.0) out.couplings.push_back({t.i, t.j, j});
        out.h[t.i] += t.value / 4.0;
        out.h[t.j] += t.value / 4.0;
        out.offset += t.value / 4.0;
    }
    return out;
}

QuboProblem ising_to_qubo(const IsingProblem& p) {
    // s_i = 2 q_i - 1
    QuboProblem out;
    out.n_vars = p.n_vars;
    out.linear.assign(p.n_vars, 0.0);
    out.offset = p.offset;
    for (int i = 0; i < p.n_vars; ++i) {
        out.linear[i] += 2.0 * p.h[i];
        out.offset -= p.h[i];
    }
    out.quad.reserve(p.couplings.size());
    for (const auto& t : p.couplings) {
        const double g = 4.0 * t.value;
        if (g != 0.0) out.quad.push_back({t.i, t.j, g});
        out.linear[t.i] -= 2.0 * t.value;
        out.linear[t.j] -= 2.0 * t.value;
        out.offset += t.value;
    }
    return out;
}

void write_qubo(std::ostream& os, const QuboProblem& p) {
    char buf[64];
    const auto put = [&](int i, int j, double value) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        os << i << ' ' << j << ' ' << buf << '\n';
    };
    std::snprintf(buf, sizeof(buf), "%.17g", p.offset);
    os << "p qubo " << p.n_vars << ' ' << p.term_count() << ' ' << buf << '\n';
    // single ascending (i, j) pass; quad is already sorted
    std::size_t qi = 0;
    for (int i = 0; i < p.n_vars; ++i) {
        if (p.linear[i] != 0.0) put(i, i, p.linear[i]);
        while (qi < p.quad.size() && p.quad[qi].i == i) {
            put(p.quad[qi].i, p.quad[qi].j, p.quad[qi].value);
            ++qi;
        }
    }
}

QuboProblem read_qubo(std::istream& is) {
    std::string tag, kind;
    QuboProblem p;
    long n_terms = 0;
    if (!(is >> tag >> kind >> p.n_vars >> n_terms >> p.offset) || tag != "p" || kind != "qubo")
        throw std::runtime_error("bad qubo header");
    if (p.n_vars < 0) throw std::runtime_error("bad qubo variable count");
    p.linear.assign(p.n_vars, 0.0);
    int i, j;
    double value;
    long seen = 0;
    while (is >> i >> j >> value) {
        if (i < 0 || j < i || j >= p.n_vars) throw std::runtime_error("bad qubo term indices");
        if (i == j)
            p.linear[i] = value;
        else
            p.quad.push_back({i, j, value});
        ++seen;
    }
    if (seen != n_terms) throw std::runtime_error("qubo term count mismatch");
    std::sort(p.quad.begin(), p.quad.end(),
              [](const QuadTerm& a, const QuadTerm& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    return p;
}

}  // namespace qavp
