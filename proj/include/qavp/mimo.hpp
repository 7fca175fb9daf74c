#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qavp/constellation.hpp"
#include "qavp/rng.hpp"

namespace qavp {

// Gaussian integer (one perturbation entry).
struct Gint {
    int re = 0;
    int im = 0;
    bool operator==(const Gint&) const = default;
};

using PerturbationVector = std::vector<Gint>;

// Channel H together with its zero-forcing precoder P = H^H (H H^H)^-1.
struct ChannelInstance {
    Eigen::MatrixXcd H;  // n_r x n_t
    Eigen::MatrixXcd P;  // n_t x n_r
    int n_t = 0;
    int n_r = 0;
};

struct SymbolVector {
    Eigen::VectorXcd symbols;             // length n_r
    std::vector<std::uint8_t> source_bits;  // length n_r * bits_per_symbol
};

struct IllConditionedChannel : std::runtime_error {
    IllConditionedChannel() : std::runtime_error("ill-conditioned channel") {}
};

struct DegenerateTransmit : std::runtime_error {
    DegenerateTransmit() : std::runtime_error("degenerate transmit vector") {}
};

// Outcome of one simulated transmission.
struct TrialRecord {
    double snr_db = 0.0;
    std::uint64_t channel_seed = 0;
    PerturbationVector chosen_v;
    double p_t = 0.0;
    double zf_p_t = 0.0;
    long bit_errors = 0;
    long bits = 0;
    bool fallback_used = false;
    double solver_time_us = 0.0;          // modeled compute cost, deterministic
    double broken_chain_fraction = -1.0;  // < 0 when the hardware model is off
    double ppl = -1.0;                    // < 0 when not measured
    double pre_scale_factor = -1.0;       // < 0 when pre-processing is off
    long pre_zeroed = -1;
    int redraws = 0;
    std::vector<int> error_positions;  // bit offsets within this trial
};

// Total erroneous bits over total transmitted bits.
double ber(const std::vector<TrialRecord>& records);

// Rayleigh fading draw: H entries i.i.d. CN(0,1). Throws IllConditionedChannel
// when cond(H H^H) exceeds 1e12; the caller decides whether to redraw.
ChannelInstance generate_channel(int n_t, int n_r, RandomStream& rng);

// Builds the precoder for a given H (same conditioning check).
ChannelInstance channel_from_matrix(Eigen::MatrixXcd H);

// Uniform random data symbols for each user.
SymbolVector draw_symbols(const Constellation& cons, int n_r, RandomStream& rng);

// Rebuild symbols from a bit string (inverse of the demapper).
SymbolVector symbols_from_bits(const Constellation& cons, const std::vector<std::uint8_t>& bits);

Eigen::VectorXcd perturbed_vector(const Constellation& cons, const SymbolVector& u,
                                  const PerturbationVector& v);

// ||P (u + tau v)||^2, the transmit power scaling the perturbation minimizes.
double vpp_objective(const ChannelInstance& ch, const Constellation& cons, const SymbolVector& u,
                     const PerturbationVector& v);

// ZF transmit power, i.e. the objective at v = 0.
double zf_power(const ChannelInstance& ch, const SymbolVector& u);

// y = H P (u + tau v) / sqrt(P_t) + n with n_i ~ CN(0, sigma^2),
// sigma^2 = 10^(-snr_db/10). Returns y and writes P_t.
Eigen::VectorXcd transmit(const ChannelInstance& ch, const Constellation& cons,
                          const SymbolVector& u, const PerturbationVector& v, double snr_db,
                          RandomStream& rng, double& p_t_out);

// Scales by sqrt(p_t), reduces each axis into [-tau/2, tau/2) and slices.
SymbolVector receive_decode(const Eigen::VectorXcd& y, double p_t, const Constellation& cons);

// Centered modulo: maps x into [-tau/2, tau/2).
double mod_tau(double x, double tau);

// Real stacking [Re; Im] used by the QUBO expansion and the lattice
// solvers: with M = P^H P, returns G = [Re M, -Im M; Im M, Re M] so that
// ||P c||^2 == c~^T G c~ for the stacked real vector c~.
Eigen::MatrixXd real_stacked_gram(const Eigen::MatrixXcd& P);
Eigen::VectorXd real_stack(const Eigen::VectorXcd& x);

}  // namespace qavp
