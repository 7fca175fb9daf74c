#include "qavp/mimo.hpp"

#include <cmath>

namespace qavp {

namespace {

constexpr double kCondLimit = 1e12;
constexpr double kResidualTol = 1e-9;

ChannelInstance build_precoder(Eigen::MatrixXcd H) {
    const int n_r = static_cast<int>(H.rows());
    const int n_t = static_cast<int>(H.cols());
    if (n_r < 1 || n_r > n_t) throw std::invalid_argument("require 1 <= n_r <= n_t");

    const Eigen::MatrixXcd gram = H * H.adjoint();  // n_r x n_r
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > kCondLimit)
        throw IllConditionedChannel();

    ChannelInstance ch;
    ch.P = H.adjoint() * gram.inverse();
    ch.H = std::move(H);
    ch.n_t = n_t;
    ch.n_r = n_r;

    const double residual = (ch.H * ch.P - Eigen::MatrixXcd::Identity(n_r, n_r)).norm();
    if (residual > kResidualTol * std::sqrt(static_cast<double>(n_r)))
        throw IllConditionedChannel();
    return ch;
}

}  // namespace

double ber(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw std::invalid_argument("ber over an empty record set");
    long errors = 0, bits = 0;
    for (const auto& r : records) {
        errors += r.bit_errors;
        bits += r.bits;
    }
    if (bits == 0) throw std::invalid_argument("ber over zero transmitted bits");
    return static_cast<double>(errors) / static_cast<double>(bits);
}

ChannelInstance generate_channel(int n_t, int n_r, RandomStream& rng) {
    if (n_r < 1 || n_r > n_t) throw std::invalid_argument("require 1 <= n_r <= n_t");
    Eigen::MatrixXcd H(n_r, n_t);
    const double scale = 1.0 / std::sqrt(2.0);  // unit-variance complex entries
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_t; ++j)
            H(i, j) = std::complex<double>(rng.gaussian() * scale, rng.gaussian() * scale);
    return build_precoder(std::move(H));
}

ChannelInstance channel_from_matrix(Eigen::MatrixXcd H) { return build_precoder(std::move(H)); }

SymbolVector draw_symbols(const Constellation& cons, int n_r, RandomStream& rng) {
    SymbolVector u;
    u.symbols.resize(n_r);
    u.source_bits.resize(static_cast<std::size_t>(n_r) * cons.bits_per_symbol);
    for (int k = 0; k < n_r; ++k) {
        const int idx = rng.uniform_int(0, static_cast<int>(cons.points.size()) - 1);
        u.symbols(k) = cons.points[idx];
        // recover the bit pattern through the slicer so bits and symbol agree
        cons.slice(u.symbols(k), u.source_bits.data() + static_cast<std::size_t>(k) * cons.bits_per_symbol);
    }
    return u;
}

SymbolVector symbols_from_bits(const Constellation& cons, const std::vector<std::uint8_t>& bits) {
    if (bits.size() % cons.bits_per_symbol != 0)
        throw std::invalid_argument("bit string length not a multiple of bits per symbol");
    const int n_r = static_cast<int>(bits.size()) / cons.bits_per_symbol;
    SymbolVector u;
    u.symbols.resize(n_r);
    u.source_bits = bits;
    for (int k = 0; k < n_r; ++k)
        u.symbols(k) = cons.map_bits(
            {bits.data() + static_cast<std::size_t>(k) * cons.bits_per_symbol,
             static_cast<std::size_t>(cons.bits_per_symbol)});
    return u;
}

Eigen::VectorXcd perturbed_vector(const Constellation& cons, const SymbolVector& u,
                                  const PerturbationVector& v) {
    if (static_cast<int>(v.size()) != u.symbols.size())
        throw std::invalid_argument("perturbation length mismatch");
    Eigen::VectorXcd d = u.symbols;
    for (int k = 0; k < d.size(); ++k)
        d(k) += cons.tau * std::complex<double>(v[k].re, v[k].im);
    return d;
}

double vpp_objective(const ChannelInstance& ch, const Constellation& cons, const SymbolVector& u,
                     const PerturbationVector& v) {
    return (ch.P * perturbed_vector(cons, u, v)).squaredNorm();
}

double zf_power(const ChannelInstance& ch, const SymbolVector& u) {
    return (ch.P * u.symbols).squaredNorm();
}

Eigen::VectorXcd transmit(const ChannelInstance& ch, const Constellation& cons,
                          const SymbolVector& u, const PerturbationVector& v, double snr_db,
                          RandomStream& rng, double& p_t_out) {
    if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite");
    const Eigen::VectorXcd d = perturbed_vector(cons, u, v);
    const Eigen::VectorXcd pd = ch.P * d;
    const double p_t = pd.squaredNorm();
    if (p_t <= 0.0) throw DegenerateTransmit();
    p_t_out = p_t;

    const double sigma2 = std::pow(10.0, -snr_db / 10.0);
    const double axis_std = std::sqrt(sigma2 / 2.0);
    Eigen::VectorXcd y = (ch.H * pd) / std::sqrt(p_t);
    for (int i = 0; i < y.size(); ++i)
        y(i) += std::complex<double>(rng.gaussian() * axis_std, rng.gaussian() * axis_std);
    return y;
}

double mod_tau(double x, double tau) {
    return x - tau * std::floor((x + tau / 2.0) / tau);
}

Eigen::MatrixXd real_stacked_gram(const Eigen::MatrixXcd& P) {
    const int n = static_cast<int>(P.cols());
    const Eigen::MatrixXcd M = P.adjoint() * P;
    Eigen::MatrixXd G(2 * n, 2 * n);
    G.topLeftCorner(n, n) = M.real();
    G.topRightCorner(n, n) = -M.imag();
    G.bottomLeftCorner(n, n) = M.imag();
    G.bottomRightCorner(n, n) = M.real();
    return G;
}

Eigen::VectorXd real_stack(const Eigen::VectorXcd& x) {
    Eigen::VectorXd out(2 * x.size());
    out.head(x.size()) = x.real();
    out.tail(x.size()) = x.imag();
    return out;
}

SymbolVector receive_decode(const Eigen::VectorXcd& y, double p_t, const Constellation& cons) {
    if (p_t <= 0.0) throw std::invalid_argument("p_t must be positive");
    const double root_pt = std::sqrt(p_t);
    const int n_r = static_cast<int>(y.size());
    SymbolVector out;
    out.symbols.resize(n_r);
    out.source_bits.resize(static_cast<std::size_t>(n_r) * cons.bits_per_symbol);
    for (int k = 0; k < n_r; ++k) {
        const std::complex<double> folded(mod_tau(root_pt * y(k).real(), cons.tau),
                                          mod_tau(root_pt * y(k).imag(), cons.tau));
        out.symbols(k) =
            cons.slice(folded, out.source_bits.data() + static_cast<std::size_t>(k) * cons.bits_per_symbol);
    }
    return out;
}

}  // namespace qavp
