#include "qavp/hardware.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qavp {

bool HardwareGraph::has_coupler(int a, int b) const {
    if (a < 0 || b < 0 || a >= n_qubits || b >= n_qubits || a == b) return false;
    const auto& row = adjacency[a];
    return std::binary_search(row.begin(), row.end(), b);
}

int HardwareGraph::qubit_id(int m, int row, int col, int side, int unit) {
    return ((row * m + col) * 2 + side) * 4 + unit;
}

HardwareGraph chimera(int m) {
    if (m < 1) throw std::invalid_argument("grid size must be >= 1");
    HardwareGraph g;
    g.grid_m = m;
    g.n_qubits = 8 * m * m;
    g.adjacency.resize(g.n_qubits);

    const auto add = [&](int a, int b) {
        g.couplers.emplace_back(std::min(a, b), std::max(a, b));
        g.adjacency[a].push_back(b);
        g.adjacency[b].push_back(a);
    };

    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            for (int u = 0; u < 4; ++u) {
                for (int w = 0; w < 4; ++w)
                    add(HardwareGraph::qubit_id(m, r, c, 0, u), HardwareGraph::qubit_id(m, r, c, 1, w));
                if (r + 1 < m)
                    add(HardwareGraph::qubit_id(m, r, c, 0, u), HardwareGraph::qubit_id(m, r + 1, c, 0, u));
                if (c + 1 < m)
                    add(HardwareGraph::qubit_id(m, r, c, 1, u), HardwareGraph::qubit_id(m, r, c + 1, 1, u));
            }
        }
    }
    for (auto& row : g.adjacency) std::sort(row.begin(), row.end());
    std::sort(g.couplers.begin(), g.couplers.end());
    return g;
}

int Embedding::physical_qubit_count() const {
    int n = 0;
    for (const auto& chain : chains) n += static_cast<int>(chain.size());
    return n;
}

Embedding clique_embed(int n_logical, const HardwareGraph& g) {
    if (n_logical < 1) throw std::invalid_argument("need at least one logical variable");
    const int m = g.grid_m;
    if (n_logical > 4 * m) {
        std::ostringstream msg;
        msg << "clique of " << n_logical << " exceeds capacity 4*m=" << 4 * m
            << "; need chimera grid m >= " << (n_logical + 3) / 4;
        throw std::invalid_argument(msg.str());
    }

    Embedding e;
    if (n_logical == 1) {
        e.chains = {{HardwareGraph::qubit_id(m, 0, 0, 0, 0)}};
        return e;
    }

    // Triangle layout in the top-left gxg block: variable 4a+k runs
    // horizontally through row a (columns 0..a, side 1, unit k) and then
    // vertically down column a (rows a..g-1, side 0, unit k). Each chain
    // has g+1 qubits and every pair of chains meets in some cell.
    const int grid = (n_logical + 3) / 4;
    e.chains.resize(n_logical);
    for (int var = 0; var < n_logical; ++var) {
        const int a = var / 4;
        const int k = var % 4;
        auto& chain = e.chains[var];
        chain.reserve(grid + 1);
        for (int c = 0; c <= a; ++c) chain.push_back(HardwareGraph::qubit_id(m, a, c, 1, k));
        for (int r = a; r < grid; ++r) chain.push_back(HardwareGraph::qubit_id(m, r, a, 0, k));
    }
    return e;
}

std::vector<std::string> validate_embedding(const Embedding& e, const HardwareGraph& g,
                                            const IsingProblem* logical) {
    std::vector<std::string> issues;
    std::set<int> used;
    for (std::size_t var = 0; var < e.chains.size(); ++var) {
        const auto& chain = e.chains[var];
        if (chain.empty()) {
            issues.push_back("chain " + std::to_string(var) + " is empty");
            continue;
        }
        for (int q : chain) {
            if (q < 0 || q >= g.n_qubits)
                issues.push_back("chain " + std::to_string(var) + " uses unknown qubit " +
                                 std::to_string(q));
            else if (!used.insert(q).second)
                issues.push_back("qubit " + std::to_string(q) + " appears in multiple chains");
        }
        // connectivity over the induced subgraph
        std::set<int> members(chain.begin(), chain.end());
        std::vector<int> stack{chain.front()};
        std::set<int> seen{chain.front()};
        while (!stack.empty()) {
            const int q = stack.back();
            stack.pop_back();
            if (q < 0 || q >= g.n_qubits) continue;
            for (int nb : g.adjacency[q])
                if (members.count(nb) && seen.insert(nb).second) stack.push_back(nb);
        }
        if (seen.size() != members.size())
            issues.push_back("chain " + std::to_string(var) + " is not connected");
    }

    if (logical) {
        if (logical->n_vars != static_cast<int>(e.chains.size()))
            issues.push_back("embedding covers " + std::to_string(e.chains.size()) +
                             " variables, problem has " + std::to_string(logical->n_vars));
        for (const auto& term : logical->couplings) {
            if (term.i >= static_cast<int>(e.chains.size()) ||
                term.j >= static_cast<int>(e.chains.size()))
                continue;
            bool found = false;
            for (int a : e.chains[term.i]) {
                for (int b : e.chains[term.j])
                    if (g.has_coupler(a, b)) {
                        found = true;
                        break;
                    }
                if (found) break;
            }
            if (!found)
                issues.push_back("no physical coupler between chains " + std::to_string(term.i) +
                                 " and " + std::to_string(term.j));
        }
    }
    return issues;
}

DeviceRanges DeviceRanges::unbounded() {
    DeviceRanges r;
    r.bias_min = r.coupler_min = -std::numeric_limits<double>::infinity();
    r.bias_max = r.coupler_max = std::numeric_limits<double>::infinity();
    return r;
}

namespace {

double quantize(double value, double lo, double hi, int bits) {
    // power-of-two interval count keeps 0 representable
    const double step = (hi - lo) / static_cast<double>(1 << bits);
    return lo + std::round((value - lo) / step) * step;
}

}  // namespace

IsingProblem embed_problem(const IsingProblem& p, const Embedding& e, const HardwareGraph& g,
                           const DeviceRanges& ranges) {
    if (static_cast<int>(e.chains.size()) < p.n_vars)
        throw std::invalid_argument("embedding does not cover all variables");
    bool needs_chains = false;
    for (int i = 0; i < p.n_vars; ++i)
        if (e.chains[i].size() > 1) needs_chains = true;
    if (needs_chains && e.chain_strength <= 0.0)
        throw std::invalid_argument("chain_strength must be positive for multi-qubit chains");

    // map physical qubit -> dense index
    std::vector<int> qubits;
    for (int i = 0; i < p.n_vars; ++i)
        qubits.insert(qubits.end(), e.chains[i].begin(), e.chains[i].end());
    std::sort(qubits.begin(), qubits.end());
    const auto dense = [&](int q) {
        return static_cast<int>(std::lower_bound(qubits.begin(), qubits.end(), q) - qubits.begin());
    };

    IsingProblem out;
    out.n_vars = static_cast<int>(qubits.size());
    out.h.assign(out.n_vars, 0.0);
    out.offset = p.offset;

    for (int i = 0; i < p.n_vars; ++i) {
        const double share = p.h[i] / static_cast<double>(e.chains[i].size());
        for (int q : e.chains[i]) out.h[dense(q)] += share;
    }

    std::vector<std::vector<int>> sorted_chains(p.n_vars);
    for (int i = 0; i < p.n_vars; ++i) {
        sorted_chains[i] = e.chains[i];
        std::sort(sorted_chains[i].begin(), sorted_chains[i].end());
    }

    std::vector<QuadTerm> terms;
    for (const auto& term : p.couplings) {
        // lexicographically first physical coupler between the two chains
        bool placed = false;
        for (int a : sorted_chains[term.i]) {
            for (int b : sorted_chains[term.j]) {
                if (!g.has_coupler(a, b)) continue;
                const int da = dense(a), db = dense(b);
                terms.push_back({std::min(da, db), std::max(da, db), term.value});
                placed = true;
                break;
            }
            if (placed) break;
        }
        if (!placed)
            throw std::invalid_argument("embedding invalid for this problem: no coupler for (" +
                                        std::to_string(term.i) + "," + std::to_string(term.j) + ")");
    }
    for (int i = 0; i < p.n_vars; ++i) {
        const auto& chain = e.chains[i];
        for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
            if (!g.has_coupler(chain[k], chain[k + 1]))
                throw std::invalid_argument("chain " + std::to_string(i) +
                                            " entries are not consecutive-adjacent");
            const int da = dense(chain[k]), db = dense(chain[k + 1]);
            terms.push_back({std::min(da, db), std::max(da, db), -e.chain_strength});
        }
    }

    // single uniform rescale into the device ranges
    double factor = 1.0;
    for (double h : out.h) {
        if (h > 0.0) factor = std::min(factor, ranges.bias_max / h);
        if (h < 0.0) factor = std::min(factor, ranges.bias_min / h);
    }
    for (const auto& t : terms) {
        if (t.value > 0.0) factor = std::min(factor, ranges.coupler_max / t.value);
        if (t.value < 0.0) factor = std::min(factor, ranges.coupler_min / t.value);
    }
    if (factor < 1.0) {
        for (double& h : out.h) h *= factor;
        for (auto& t : terms) t.value *= factor;
        out.offset *= factor;
    }
    if (ranges.quantize_bits > 0) {
        for (double& h : out.h)
            if (h != 0.0) h = quantize(h, ranges.bias_min, ranges.bias_max, ranges.quantize_bits);
        for (auto& t : terms)
            if (t.value != 0.0)
                t.value = quantize(t.value, ranges.coupler_min, ranges.coupler_max,
                                   ranges.quantize_bits);
    }

    std::sort(terms.begin(), terms.end(), [](const QuadTerm& a, const QuadTerm& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    // merge duplicates (a logical coupler can land on a chain edge's coupler)
    for (const auto& t : terms) {
        if (!out.couplings.empty() && out.couplings.back().i == t.i &&
            out.couplings.back().j == t.j)
            out.couplings.back().value += t.value;
        else
            out.couplings.push_back(t);
    }
    return out;
}

IsingProblem apply_ice(const IsingProblem& p, const IceModel& ice, RandomStream& rng) {
    if (ice.sigma_h < 0.0 || ice.sigma_j < 0.0) throw std::invalid_argument("negative ICE sigma");
    IsingProblem out = p;
    for (double& h : out.h)
        if (h != 0.0) h += ice.sigma_h * rng.gaussian();
    for (auto& t : out.couplings)
        if (t.value != 0.0) t.value += ice.sigma_j * rng.gaussian();
    return out;
}

UnembedResult unembed(const std::vector<std::int8_t>& physical, const Embedding& e,
                      const IsingProblem& logical) {
    const int n = logical.n_vars;
    if (static_cast<int>(e.chains.size()) < n)
        throw std::invalid_argument("embedding does not cover all variables");

    // dense index of each physical qubit, mirroring embed_problem
    std::vector<int> qubits;
    for (int i = 0; i < n; ++i) qubits.insert(qubits.end(), e.chains[i].begin(), e.chains[i].end());
    std::sort(qubits.begin(), qubits.end());
    if (physical.size() != qubits.size())
        throw std::invalid_argument("physical state length mismatch");
    const auto spin_of = [&](int q) {
        return physical[std::lower_bound(qubits.begin(), qubits.end(), q) - qubits.begin()];
    };

    UnembedResult result;
    result.spins.assign(n, 0);
    std::vector<int> tied;
    int broken = 0;
    for (int i = 0; i < n; ++i) {
        int sum = 0;
        bool uniform = true;
        for (int q : e.chains[i]) {
            const int s = spin_of(q);
            sum += s;
            if (s != spin_of(e.chains[i].front())) uniform = false;
        }
        if (!uniform) ++broken;
        if (sum > 0)
            result.spins[i] = 1;
        else if (sum < 0)
            result.spins[i] = -1;
        else
            tied.push_back(i);  // provisional value fixed below
    }
    for (int i : tied) result.spins[i] = 1;
    // greedy energy-minimizing resolution, in index order
    for (int i : tied) {
        result.spins[i] = 1;
        const double e_up = logical.energy(result.spins);
        result.spins[i] = -1;
        const double e_down = logical.energy(result.spins);
        result.spins[i] = e_up < e_down ? 1 : -1;
    }
    result.broken_fraction = n > 0 ? static_cast<double>(broken) / n : 0.0;
    return result;
}

long parallel_capacity(int n_logical, const HardwareGraph& g) {
    if (n_logical < 1) throw std::invalid_argument("need at least one logical variable");
    if (n_logical > 4 * g.grid_m) return 0;
    const long tile =
        n_logical == 1 ? 1 : static_cast<long>(n_logical) * ((n_logical + 3) / 4 + 1);
    return static_cast<long>(g.n_qubits) / tile;
}

RawSolve solve_on_hardware_model(const IsingProblem& logical, const Embedding& e,
                                 const HardwareGraph& g, const DeviceRanges& ranges,
                                 const IceModel& ice, const SolverRequest& req) {
    const IsingProblem embedded = embed_problem(logical, e, g, ranges);

    RawSolve out;
    out.reads.reserve(req.num_reads);
    SolverRequest one_read = req;
    one_read.num_reads = 1;

    for (int read = 0; read < req.num_reads; ++read) {
        RandomStream ice_rng =
            substream(req.seed, {static_cast<std::uint64_t>(StreamTag::ice), static_cast<std::uint64_t>(read)});
        const IsingProblem noisy = apply_ice(embedded, ice, ice_rng);

        one_read.seed = derive_seed(req.seed, {static_cast<std::uint64_t>(StreamTag::solver),
                                               static_cast<std::uint64_t>(read)});
        const RawSolve sa = solve_sa_ising(noisy, one_read);

        std::vector<std::int8_t> physical(noisy.n_vars);
        const auto& bits = sa.reads.front().bits;
        for (int i = 0; i < noisy.n_vars; ++i) physical[i] = bits[i] ? 1 : -1;

        const UnembedResult logical_state = unembed(physical, e, logical);
        Read r;
        r.bits.resize(logical.n_vars);
        for (int i = 0; i < logical.n_vars; ++i) r.bits[i] = logical_state.spins[i] > 0 ? 1 : 0;
        r.energy = logical.energy(logical_state.spins) + logical.offset;
        r.broken_fraction = logical_state.broken_fraction;
        out.reads.push_back(std::move(r));
        out.nodes_visited += sa.nodes_visited;
        out.model_time_us += sa.model_time_us;
    }
    return out;
}

void write_embedding(std::ostream& os, const Embedding& e) {
    for (std::size_t var = 0; var < e.chains.size(); ++var) {
        os << var << ':';
        for (int q : e.chains[var]) os << ' ' << q;
        os << '\n';
    }
}

Embedding read_embedding(std::istream& is) {
    Embedding e;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw std::runtime_error("bad embedding line: " + line);
        const std::size_t var = std::stoul(line.substr(0, colon));
        if (var >= e.chains.size()) e.chains.resize(var + 1);
        std::istringstream rest(line.substr(colon + 1));
        int q;
        while (rest >> q) e.chains[var].push_back(q);
    }
    return e;
}

}  // namespace qavp
