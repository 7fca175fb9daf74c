#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "qavp/hardware.hpp"

using namespace qavp;

namespace {

IsingProblem triangle(double j = 1.0) {
    IsingProblem p;
    p.n_vars = 3;
    p.h = {0.0, 0.0, 0.0};
    p.couplings = {{0, 1, j}, {0, 2, j}, {1, 2, j}};
    return p;
}

}  // namespace

TEST_CASE("chimera cell counts") {
    const auto c1 = chimera(1);
    CHECK(c1.n_qubits == 8);
    CHECK(c1.couplers.size() == 16);  // one K4,4 cell

    const auto c2 = chimera(2);
    CHECK(c2.n_qubits == 32);
    int inter = 0;
    for (const auto& [a, b] : c2.couplers) {
        const int cell_a = a / 8, cell_b = b / 8;
        if (cell_a != cell_b) ++inter;
    }
    CHECK(inter == 16);

    const auto c16 = chimera(16);
    CHECK(c16.n_qubits == 2048);

    // interior qubits reach degree 6, never more
    int max_degree = 0;
    for (const auto& row : c16.adjacency) max_degree = std::max(max_degree, (int)row.size());
    CHECK(max_degree == 6);
}

TEST_CASE("clique embedding shapes") {
    const auto c1 = chimera(1);
    const auto k4 = clique_embed(4, c1);
    CHECK(k4.chains.size() == 4);
    for (const auto& chain : k4.chains) CHECK(chain.size() == 2);
    CHECK(k4.physical_qubit_count() == 8);
    CHECK(validate_embedding(k4, c1).empty());

    const auto c7 = chimera(7);
    const auto k28 = clique_embed(28, c7);
    CHECK(k28.chains.size() == 28);
    for (const auto& chain : k28.chains) CHECK(chain.size() == 8);
    CHECK(k28.physical_qubit_count() == 224);
    CHECK(validate_embedding(k28, c7).empty());

    const auto single = clique_embed(1, c1);
    CHECK(single.chains.size() == 1);
    CHECK(single.chains[0].size() == 1);
}

TEST_CASE("capacity error names the minimum grid") {
    const auto c2 = chimera(2);
    CHECK_THROWS_WITH_AS(clique_embed(9, c2), doctest::Contains("m >= 3"), std::invalid_argument);
}

TEST_CASE("validator passes on clique embeddings up to n = 32") {
    for (int n = 2; n <= 32; ++n) {
        const int m = (n + 3) / 4;
        const auto g = chimera(m);
        const auto e = clique_embed(n, g);

        // a dense problem needs a coupler for every pair
        IsingProblem dense;
        dense.n_vars = n;
        dense.h.assign(n, 0.1);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) dense.couplings.push_back({i, j, 0.2});

        const auto issues = validate_embedding(e, g, &dense);
        CHECK(issues.empty());
    }
}

TEST_CASE("validator flags overlap, disconnection, and missing couplers") {
    const auto g = chimera(1);
    Embedding bad;
    bad.chains = {{0, 0}, {1}};
    CHECK(!validate_embedding(bad, g).empty());

    Embedding disconnected;
    disconnected.chains = {{0, 1}};  // same side of the cell: no coupler
    const auto issues = validate_embedding(disconnected, g);
    REQUIRE(!issues.empty());
    CHECK(issues.front().find("not connected") != std::string::npos);

    IsingProblem p;
    p.n_vars = 2;
    p.h = {0.0, 0.0};
    p.couplings = {{0, 1, 1.0}};
    Embedding no_edge;
    no_edge.chains = {{0}, {1}};  // vertical qubits of one cell: not adjacent
    const auto missing = validate_embedding(no_edge, g, &p);
    REQUIRE(!missing.empty());
    CHECK(missing.front().find("no physical coupler") != std::string::npos);
}

TEST_CASE("triangle embeds via a two-qubit chain as in the worked example") {
    const auto g = chimera(1);
    const auto tri = triangle(0.5);

    // s1 -> qubit 0, s2 -> qubit 4, s3 -> chain {1, 5}
    Embedding e;
    e.chains = {{0}, {4}, {1, 5}};
    e.chain_strength = 1.0;
    CHECK(validate_embedding(e, g, &tri).empty());

    const auto phys = embed_problem(tri, e, g, DeviceRanges::unbounded());
    CHECK(phys.n_vars == 4);  // qubits 0, 1, 4, 5

    // J12 on (0,4), J13 on (0,5), J23 on (1,4), chain coupler (1,5) at -|J_F|
    std::map<std::pair<int, int>, double> coeff;
    for (const auto& t : phys.couplings) coeff[{t.i, t.j}] = t.value;
    CHECK(coeff.at({0, 2}) == 0.5);   // dense ids: 0->0, 1->1, 4->2, 5->3
    CHECK(coeff.at({0, 3}) == 0.5);
    CHECK(coeff.at({1, 2}) == 0.5);
    CHECK(coeff.at({1, 3}) == -1.0);
}

TEST_CASE("chain-consistent embedded energies equal logical energies plus a constant") {
    const auto g = chimera(1);
    const auto tri = triangle(0.4);
    Embedding e;
    e.chains = {{0}, {4}, {1, 5}};
    e.chain_strength = 0.6;

    // coefficients sit inside the device ranges, so no rescaling happens
    const auto phys = embed_problem(tri, e, g, DeviceRanges{});

    double constant = 0.0;
    bool first = true;
    for (unsigned code = 0; code < 8; ++code) {
        std::vector<std::int8_t> logical(3);
        for (int i = 0; i < 3; ++i) logical[i] = (code >> i) & 1 ? 1 : -1;
        // chain-consistent physical state (dense order: q0, q1, q4, q5)
        const std::vector<std::int8_t> physical{logical[0], logical[2], logical[1], logical[2]};
        const double diff = phys.energy(physical) - tri.energy(logical);
        if (first) {
            constant = diff;
            first = false;
        }
        CHECK(diff == doctest::Approx(constant).epsilon(1e-12));
    }
    CHECK(constant == doctest::Approx(-0.6));  // one aligned ferromagnetic chain edge
}

TEST_CASE("strong chains reproduce the logical ground state") {
    RandomStream rng(91);
    for (int k = 0; k < 5; ++k) {
        IsingProblem p;
        p.n_vars = 3;
        p.h = {rng.uniform01() - 0.5, rng.uniform01() - 0.5, rng.uniform01() - 0.5};
        p.couplings = {{0, 1, rng.uniform01() - 0.5},
                       {0, 2, rng.uniform01() - 0.5},
                       {1, 2, rng.uniform01() - 0.5}};

        const auto g = chimera(1);
        Embedding e;
        e.chains = {{0}, {4}, {1, 5}};
        e.chain_strength = 25.0;  // dominates every logical coefficient
        const auto phys = embed_problem(p, e, g, DeviceRanges::unbounded());

        // global physical minimum must be chain consistent and match the
        // logical minimum up to the chain constant
        std::vector<std::int8_t> s(4);
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::int8_t> best_s;
        for (unsigned code = 0; code < 16; ++code) {
            for (int i = 0; i < 4; ++i) s[i] = (code >> i) & 1 ? 1 : -1;
            const double en = oracle::ising_energy_direct(phys, s);
            if (en < best) {
                best = en;
                best_s = s;
            }
        }
        CHECK(best_s[1] == best_s[3]);  // chain intact at the optimum

        double logical_best = std::numeric_limits<double>::infinity();
        for (unsigned code = 0; code < 8; ++code) {
            std::vector<std::int8_t> logical(3);
            for (int i = 0; i < 3; ++i) logical[i] = (code >> i) & 1 ? 1 : -1;
            logical_best = std::min(logical_best, oracle::ising_energy_direct(p, logical));
        }
        CHECK(best == doctest::Approx(logical_best - 25.0).epsilon(1e-12));
    }
}

TEST_CASE("single-variable problems embed unchanged apart from range scaling") {
    IsingProblem p;
    p.n_vars = 1;
    p.h = {4.0};  // outside the [-2, 2] bias range
    const auto g = chimera(1);
    const auto e = clique_embed(1, g);
    const auto phys = embed_problem(p, e, g, DeviceRanges{});
    CHECK(phys.n_vars == 1);
    CHECK(phys.h[0] == doctest::Approx(2.0));
    CHECK(phys.couplings.empty());
}

TEST_CASE("embedded coefficients respect the device ranges") {
    RandomStream rng(92);
    for (int k = 0; k < 10; ++k) {
        const auto p = oracle::random_qubo(8, rng, 20.0);
        const auto logical = qubo_to_ising(p);
        const auto g = chimera(2);
        auto e = clique_embed(8, g);
        e.chain_strength = 1.2 * logical.max_coupling_magnitude();
        const auto phys = embed_problem(logical, e, g, DeviceRanges{});
        for (double h : phys.h) {
            CHECK(h <= 2.0 + 1e-12);
            CHECK(h >= -2.0 - 1e-12);
        }
        for (const auto& t : phys.couplings) {
            CHECK(t.value <= 1.0 + 1e-12);
            CHECK(t.value >= -2.0 - 1e-12);
        }
    }
}

TEST_CASE("coefficient quantization is off by default and snaps to the grid") {
    IsingProblem p;
    p.n_vars = 2;
    p.h = {0.513, -1.496};
    p.couplings = {{0, 1, 0.308}};
    const auto g = chimera(1);
    Embedding e;
    e.chains = {{0}, {4}};
    e.chain_strength = 1.0;

    const auto exact = embed_problem(p, e, g, DeviceRanges{});
    CHECK(exact.h[0] == 0.513);
    CHECK(exact.couplings[0].value == 0.308);

    DeviceRanges coarse;
    coarse.quantize_bits = 4;  // bias grid step 0.25, coupler step 0.1875
    const auto q = embed_problem(p, e, g, coarse);
    CHECK(q.h[0] == doctest::Approx(0.5));
    CHECK(q.h[1] == doctest::Approx(-1.5));
    CHECK(q.couplings[0].value == doctest::Approx(0.25));  // coupler grid step 3/16
    for (double h : q.h) CHECK(std::abs(std::remainder(h + 2.0, 4.0 / 16.0)) < 1e-12);
}

TEST_CASE("missing inter-chain coupler is an embedding error") {
    IsingProblem p;
    p.n_vars = 2;
    p.h = {0.0, 0.0};
    p.couplings = {{0, 1, 1.0}};
    const auto g = chimera(1);
    Embedding e;
    e.chains = {{0}, {1}};  // same side, no coupler
    e.chain_strength = 1.0;
    CHECK_THROWS_AS(embed_problem(p, e, g, DeviceRanges{}), std::invalid_argument);
}

TEST_CASE("ice noise statistics") {
    IsingProblem p;
    p.n_vars = 2;
    p.h = {1.0, -1.0};
    p.couplings = {{0, 1, 0.5}};

    RandomStream rng(93);
    const auto same = apply_ice(p, IceModel{0.0, 0.0}, rng);
    CHECK(same.h == p.h);
    CHECK(same.couplings[0].value == p.couplings[0].value);

    // |delta| over many draws approaches the half-normal mean sigma*sqrt(2/pi)
    const double sigma = 0.01;
    double sum = 0.0;
    const int draws = 10000;
    RandomStream rng2(94);
    for (int k = 0; k < draws / 2; ++k) {
        const auto noisy = apply_ice(p, IceModel{sigma, sigma}, rng2);
        sum += std::abs(noisy.h[0] - p.h[0]);
        sum += std::abs(noisy.h[1] - p.h[1]);
    }
    const double mean = sum / draws;
    const double expected = sigma * std::sqrt(2.0 / M_PI);
    const double sd = sigma * std::sqrt(1.0 - 2.0 / M_PI);
    CHECK(std::abs(mean - expected) < 3.0 * sd / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("ice noise can flip a near-degenerate ground state") {
    // two spins with gap far below sigma
    IsingProblem p;
    p.n_vars = 2;
    p.h = {0.001, 0.0};
    p.couplings = {{0, 1, 0.002}};

    RandomStream rng(95);
    int flips = 0;
    for (int k = 0; k < 200; ++k) {
        const auto noisy = apply_ice(p, IceModel{0.01, 0.01}, rng);
        // compare ground states by enumeration
        double best_orig = std::numeric_limits<double>::infinity();
        double best_noisy = std::numeric_limits<double>::infinity();
        unsigned arg_orig = 0, arg_noisy = 0;
        for (unsigned code = 0; code < 4; ++code) {
            std::vector<std::int8_t> s{(code & 1) ? std::int8_t(1) : std::int8_t(-1),
                                       (code & 2) ? std::int8_t(1) : std::int8_t(-1)};
            const double eo = oracle::ising_energy_direct(p, s);
            const double en = oracle::ising_energy_direct(noisy, s);
            if (eo < best_orig) {
                best_orig = eo;
                arg_orig = code;
            }
            if (en < best_noisy) {
                best_noisy = en;
                arg_noisy = code;
            }
        }
        if (arg_orig != arg_noisy) ++flips;
    }
    CHECK(flips > 0);
}

TEST_CASE("unembed majority vote and tie handling") {
    IsingProblem p;
    p.n_vars = 1;
    p.h = {0.5};

    Embedding e3;
    e3.chains = {{0, 4, 1}};
    const std::vector<std::int8_t> intact{1, 1, 1};
    const auto r1 = unembed(intact, e3, p);
    CHECK(r1.spins[0] == 1);
    CHECK(r1.broken_fraction == 0.0);

    const std::vector<std::int8_t> majority{1, 1, -1};
    const auto r2 = unembed(majority, e3, p);
    CHECK(r2.spins[0] == 1);
    CHECK(r2.broken_fraction == 1.0);

    // exact tie on a 1-variable problem with h > 0 resolves to -1
    Embedding e2;
    e2.chains = {{0, 4}};
    const std::vector<std::int8_t> tied{1, -1};
    const auto r3 = unembed(tied, e2, p);
    CHECK(r3.spins[0] == -1);
    CHECK(r3.broken_fraction == 1.0);
}

TEST_CASE("parallel capacity arithmetic") {
    CHECK(parallel_capacity(28, chimera(16)) == 9);
    CHECK(parallel_capacity(4, chimera(1)) == 1);
    CHECK(parallel_capacity(5, chimera(1)) == 0);  // exceeds 4m

    // capacity times tile size never exceeds the chip
    for (int n : {4, 8, 12, 28, 32}) {
        const auto g = chimera(16);
        const long tile = static_cast<long>(n) * ((n + 3) / 4 + 1);
        CHECK(parallel_capacity(n, g) * tile <= g.n_qubits);
    }
}

TEST_CASE("hardware pipeline matches the logical optimum when noise is off") {
    RandomStream rng(96);
    const auto& cons = Constellation::get("QPSK");
    ChannelInstance ch;
    while (true) {
        try {
            ch = generate_channel(2, 1, rng);
            break;
        } catch (const IllConditionedChannel&) {
        }
    }
    const auto u = draw_symbols(cons, 1, rng);
    const auto qubo = build_qubo(ch, cons, u, BitDepth{1});
    const auto logical = qubo_to_ising(qubo);

    const auto g = chimera(1);
    auto e = clique_embed(logical.n_vars, g);
    e.chain_strength = 1.2 * logical.max_coupling_magnitude();

    SolverRequest req;
    req.num_reads = 100;
    req.anneal_sweeps = 100;
    req.seed = 4321;
    const auto raw = solve_on_hardware_model(logical, e, g, DeviceRanges{}, IceModel{0.0, 0.0}, req);

    const double exact = solve_brute_force(qubo).reads.front().energy;
    int matches = 0;
    for (const auto& read : raw.reads) {
        CHECK(read.broken_fraction >= 0.0);
        if (read.energy <= exact + 1e-9 * (1.0 + std::abs(exact))) ++matches;
    }
    CHECK(matches >= 95);
}

TEST_CASE("weak chains break more often than strong chains") {
    RandomStream rng(97);
    const auto& cons = Constellation::get("QPSK");
    int weak_higher = 0, comparisons = 0;
    for (int k = 0; k < 10; ++k) {
        ChannelInstance ch;
        while (true) {
            try {
                ch = generate_channel(3, 3, rng);
                break;
            } catch (const IllConditionedChannel&) {
            }
        }
        const auto u = draw_symbols(cons, 3, rng);
        const auto logical = qubo_to_ising(build_qubo(ch, cons, u, BitDepth{1}));
        const auto g = chimera(3);
        const double j_m = logical.max_coupling_magnitude();

        double fractions[2] = {0.0, 0.0};
        int idx = 0;
        for (double mult : {0.1, 1.2}) {
            auto e = clique_embed(logical.n_vars, g);
            e.chain_strength = mult * j_m;
            SolverRequest req;
            req.num_reads = 50;
            req.anneal_sweeps = 50;
            req.seed = derive_seed(31337, {static_cast<std::uint64_t>(k)});
            const auto raw =
                solve_on_hardware_model(logical, e, g, DeviceRanges{}, IceModel{0.0, 0.0}, req);
            double mean = 0.0;
            for (const auto& r : raw.reads) mean += r.broken_fraction / raw.reads.size();
            fractions[idx++] = mean;
        }
        ++comparisons;
        if (fractions[0] > fractions[1]) ++weak_higher;
    }
    CHECK(weak_higher > comparisons / 2);
}

TEST_CASE("embedding file round-trips") {
    const auto g = chimera(3);
    const auto e = clique_embed(10, g);
    std::ostringstream os;
    write_embedding(os, e);
    std::istringstream is(os.str());
    const auto back = read_embedding(is);
    CHECK(back.chains == e.chains);
}
