#include "qavp/solvers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qavp/rng.hpp"

namespace qavp {

namespace {

constexpr double kBruteNodeUs = 0.01;  // compute-cost model constants
constexpr double kTreeNodeUs = 0.01;
constexpr double kSweepUs = 0.1;  // 1000 sweeps ~ one 100us anneal

struct Adjacency {
    std::vector<std::vector<std::pair<int, double>>> rows;

    explicit Adjacency(int n, const std::vector<QuadTerm>& terms) : rows(n) {
        for (const auto& t : terms) {
            rows[t.i].emplace_back(t.j, t.value);
            rows[t.j].emplace_back(t.i, t.value);
        }
    }
};

bool lex_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

RawSolve solve_brute_force(const QuboProblem& p) {
    if (p.n_vars > 24) throw std::invalid_argument("brute force limited to 24 variables");
    RawSolve out;
    if (p.n_vars == 0) {
        out.reads.push_back({{}, p.offset, -1.0});
        out.nodes_visited = 1;
        out.model_time_us = kBruteNodeUs;
        return out;
    }

    const Adjacency adj(p.n_vars, p.quad);
    std::vector<std::uint8_t> q(p.n_vars, 0);
    // field[i]: energy change of raising q_i from 0 to 1 given the others
    std::vector<double> field = p.linear;

    std::vector<std::uint8_t> best_q = q;
    double best_e = 0.0;  // exact energy of best_q (all-zero state)
    double e = 0.0;
    const std::uint64_t total = 1ULL << p.n_vars;

    // Gray-code walk: one flip per state. The tracked energy is refreshed
    // periodically and candidates are re-evaluated exactly, so accumulated
    // rounding never decides a winner.
    for (std::uint64_t k = 1; k < total; ++k) {
        const int i = std::countr_zero(k);
        const double delta = q[i] ? -field[i] : field[i];
        q[i] ^= 1;
        e += delta;
        const double sign = q[i] ? 1.0 : -1.0;
        for (const auto& [j, c] : adj.rows[i]) field[j] += sign * c;

        if ((k & 0xFFFULL) == 0) e = p.energy(q);  // kill drift
        if (e <= best_e + 1e-6 * (1.0 + std::abs(best_e))) {
            const double exact = p.energy(q);
            if (exact < best_e || (exact == best_e && lex_less(q, best_q))) {
                best_e = exact;
                best_q = q;
            }
        }
    }

    out.reads.push_back({std::move(best_q), best_e + p.offset, -1.0});
    out.nodes_visited = total;
    out.model_time_us = static_cast<double>(total) * kBruteNodeUs;
    return out;
}

std::vector<std::uint8_t> qubo_argmin_exact(const QuboProblem& p) {
    return solve_brute_force(p).reads.front().bits;
}

RawSolve solve_sa(const QuboProblem& p, const SolverRequest& req) {
    return solve_sa_ising(qubo_to_ising(p), req);
}

RawSolve solve_sa_ising(const IsingProblem& ising, const SolverRequest& req) {
    if (req.num_reads < 1) throw std::invalid_argument("num_reads must be >= 1");
    const Adjacency adj(ising.n_vars, ising.couplings);
    const int n = ising.n_vars;
    const int sweeps = std::max(1, req.anneal_sweeps);

    std::vector<double> beta(sweeps);
    if (sweeps == 1) {
        beta[0] = req.beta_end;
    } else {
        const double ratio = std::pow(req.beta_end / req.beta_start,
                                      1.0 / static_cast<double>(sweeps - 1));
        beta[0] = req.beta_start;
        for (int s = 1; s < sweeps; ++s) beta[s] = beta[s - 1] * ratio;
    }

    RawSolve out;
    out.reads.reserve(req.num_reads);
    std::vector<std::int8_t> spins(n);
    std::vector<std::int8_t> best_spins(n);
    std::vector<double> field(n);

    for (int read = 0; read < req.num_reads; ++read) {
        RandomStream rng = substream(req.seed, {static_cast<std::uint64_t>(read)});
        for (int i = 0; i < n; ++i) spins[i] = rng.uniform01() < 0.5 ? -1 : 1;

        std::fill(field.begin(), field.end(), 0.0);
        for (int i = 0; i < n; ++i)
            for (const auto& [j, c] : adj.rows[i]) field[i] += c * spins[j];
        double e = ising.energy(spins);
        double best_e = e;
        best_spins = spins;

        for (int s = 0; s < sweeps; ++s) {
            const double b = beta[s];
            for (int i = 0; i < n; ++i) {
                const double delta = -2.0 * spins[i] * (ising.h[i] + field[i]);
                if (delta > 0.0 && rng.uniform01() >= std::exp(-b * delta)) continue;
                spins[i] = static_cast<std::int8_t>(-spins[i]);
                e += delta;
                for (const auto& [j, c] : adj.rows[i]) field[j] += 2.0 * c * spins[i];
                if (e < best_e) {
                    best_e = e;
                    best_spins = spins;
                }
            }
        }

        Read r;
        r.bits.resize(n);
        for (int i = 0; i < n; ++i) r.bits[i] = best_spins[i] > 0 ? 1 : 0;
        r.energy = ising.energy(best_spins) + ising.offset;  // exact, no drift
        out.reads.push_back(std::move(r));
    }
    out.nodes_visited = static_cast<std::uint64_t>(req.num_reads) * sweeps * std::max(n, 1);
    out.model_time_us = static_cast<double>(req.num_reads) * sweeps * kSweepUs;
    return out;
}

namespace {

// Shared lattice setup for the tree-search encoders: the objective over the
// real-stacked integer vector is ||R v - z||^2 + const with R the Cholesky
// factor of tau^2 G.
struct LatticeProblem {
    Eigen::MatrixXd R;  // upper triangular, positive diagonal
    Eigen::VectorXd z;
    int n = 0;
    int lo = 0, hi = 0;
};

LatticeProblem make_lattice(const ChannelInstance& ch, const Constellation& cons,
                            const SymbolVector& u, BitDepth t) {
    LatticeProblem lp;
    lp.n = 2 * ch.n_r;
    lp.lo = t.lo();
    lp.hi = t.hi();
    const Eigen::MatrixXd G = real_stacked_gram(ch.P);
    Eigen::LLT<Eigen::MatrixXd> llt(G * (cons.tau * cons.tau));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("lattice Gram matrix not positive definite");
    lp.R = Eigen::MatrixXd(llt.matrixU());
    // b = tau * G * u~; z = -R^-T b via forward substitution
    const Eigen::VectorXd b = cons.tau * (G * real_stack(u.symbols));
    lp.z = -llt.matrixL().solve(b);
    return lp;
}

PerturbationVector to_perturbation(const std::vector<int>& vals, int n_r) {
    PerturbationVector v(n_r);
    for (int k = 0; k < n_r; ++k) {
        v[k].re = vals[k];
        v[k].im = vals[k + n_r];
    }
    return v;
}

// Depth-first Schnorr-Euchner enumeration over the box.
struct SphereSearch {
    const LatticeProblem& lp;
    std::vector<int> current;
    std::vector<int> best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::uint64_t nodes = 0;

    explicit SphereSearch(const LatticeProblem& p) : lp(p), current(p.n), best(p.n) {}

    void descend(int k, double partial) {
        const double rkk = lp.R(k, k);
        double residual = lp.z(k);
        for (int j = k + 1; j < lp.n; ++j) residual -= lp.R(k, j) * current[j];
        const double center = residual / rkk;

        // zig-zag around the rounded center; per-level costs are then
        // non-decreasing, so the first pruned candidate ends the level
        const int start = std::clamp(static_cast<int>(std::lround(center)), lp.lo, lp.hi);
        int lo_next = start;
        int hi_next = start + 1;
        bool take_low;
        while (lo_next >= lp.lo || hi_next <= lp.hi) {
            if (lo_next < lp.lo)
                take_low = false;
            else if (hi_next > lp.hi)
                take_low = true;
            else
                take_low = std::abs(lo_next - center) <= std::abs(hi_next - center);
            const int v = take_low ? lo_next : hi_next;
            if (take_low)
                --lo_next;
            else
                ++hi_next;

            ++nodes;
            const double diff = rkk * v - residual;
            const double cost = partial + diff * diff;
            if (cost >= best_cost) break;

            current[k] = v;
            if (k == 0) {
                best_cost = cost;
                best = current;
            } else {
                descend(k - 1, cost);
            }
        }
    }
};

}  // namespace

RawSolve solve_sphere_encoder(const ChannelInstance& ch, const Constellation& cons,
                              const SymbolVector& u, BitDepth t) {
    const LatticeProblem lp = make_lattice(ch, cons, u, t);
    SphereSearch search(lp);
    search.descend(lp.n - 1, 0.0);

    const PerturbationVector v = to_perturbation(search.best, ch.n_r);
    RawSolve out;
    out.reads.push_back({encode_perturbation(v, t), vpp_objective(ch, cons, u, v), -1.0});
    out.nodes_visited = search.nodes;
    out.model_time_us = static_cast<double>(search.nodes) * kTreeNodeUs;
    return out;
}

RawSolve solve_fse(const ChannelInstance& ch, const Constellation& cons, const SymbolVector& u,
                   BitDepth t, int breadth) {
    if (breadth < 1) throw std::invalid_argument("breadth must be >= 1");
    const LatticeProblem lp = make_lattice(ch, cons, u, t);

    struct Partial {
        std::vector<int> vals;  // suffix, vals[0] corresponds to level k
        double cost;
    };
    std::vector<Partial> beam{{{}, 0.0}};
    std::uint64_t nodes = 0;

    for (int k = lp.n - 1; k >= 0; --k) {
        std::vector<Partial> next;
        next.reserve(beam.size() * static_cast<std::size_t>(lp.hi - lp.lo + 1));
        for (const auto& part : beam) {
            double residual = lp.z(k);
            for (int j = k + 1; j < lp.n; ++j)
                residual -= lp.R(k, j) * part.vals[static_cast<std::size_t>(j - k - 1)];
            for (int v = lp.lo; v <= lp.hi; ++v) {
                ++nodes;
                const double diff = lp.R(k, k) * v - residual;
                Partial child;
                child.vals.reserve(part.vals.size() + 1);
                child.vals.push_back(v);
                child.vals.insert(child.vals.end(), part.vals.begin(), part.vals.end());
                child.cost = part.cost + diff * diff;
                next.push_back(std::move(child));
            }
        }
        if (static_cast<int>(next.size()) > breadth) {
            std::stable_sort(next.begin(), next.end(),
                             [](const Partial& a, const Partial& b) { return a.cost < b.cost; });
            next.resize(breadth);
        }
        beam = std::move(next);
    }

    const Partial* best = &beam.front();
    for (const auto& part : beam)
        if (part.cost < best->cost) best = &part;

    const PerturbationVector v = to_perturbation(best->vals, ch.n_r);
    RawSolve out;
    out.reads.push_back({encode_perturbation(v, t), vpp_objective(ch, cons, u, v), -1.0});
    out.nodes_visited = nodes;
    out.model_time_us = static_cast<double>(nodes) * kTreeNodeUs;
    return out;
}

SolverResult select_with_fallback(const RawSolve& raw, const ChannelInstance& ch,
                                  const Constellation& cons, const SymbolVector& u, BitDepth t) {
    SolverResult result;
    result.all_reads = raw.reads;
    result.reads_used = static_cast<int>(raw.reads.size());
    result.nodes_visited = raw.nodes_visited;
    result.model_time_us = raw.model_time_us;

    double best_obj = std::numeric_limits<double>::infinity();
    PerturbationVector best_v;
    double broken_sum = 0.0;
    int broken_count = 0;
    for (const auto& read : raw.reads) {
        const PerturbationVector v = decode_bits(read.bits, ch.n_r, t);
        const double obj = vpp_objective(ch, cons, u, v);
        if (obj < best_obj) {  // strict: first read wins ties
            best_obj = obj;
            best_v = v;
        }
        if (read.broken_fraction >= 0.0) {
            broken_sum += read.broken_fraction;
            ++broken_count;
        }
    }
    if (broken_count > 0) result.mean_broken_fraction = broken_sum / broken_count;

    const double zf = zf_power(ch, u);
    if (raw.reads.empty() || best_obj >= zf) {
        result.best_v = PerturbationVector(ch.n_r);
        result.best_objective = zf;
        result.fallback_used = true;
    } else {
        result.best_v = std::move(best_v);
        result.best_objective = best_obj;
    }
    return result;
}

}  // namespace qavp
