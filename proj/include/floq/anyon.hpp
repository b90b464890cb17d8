#pragma once

// Creation, transport, fusion and braiding of Majorana zero modes by
// adiabatic bond-sign flipping, plus the chiral-edge quench experiment.
//
// A flipped bond (coupling scale -1) binds a pair of low-energy modes on the
// two adjacent plaquettes. Transport extends the flipped set one dual-lattice
// step at a time; each step ramps one bond linearly through zero while the
// state evolves under the instantaneous Hamiltonian.

#include "floq/floquet.hpp"
#include "floq/variational.hpp"

namespace floq {

enum class TransportBackend { ideal_h, floquet_circuit };

struct TransportOptions {
    int substeps = 20;
    double dt = 2.0;  // evolution time per substep (ideal backend)
    TransportBackend backend = TransportBackend::ideal_h;
    double tau = 0.25;           // floquet backend: trotter step
    int cycles_per_substep = 8;  // floquet backend: cycles between ramp updates
};

struct AnyonState {
    LatticeGraph lattice;
    GaugeConfig gauge;
    Couplings cpl;
    Mat gamma;
};

// Linear ramp of one bond's coupling scale from its current value to -current.
inline void flip_bond_adiabatic(AnyonState& st, int link, const TransportOptions& opt) {
    if (link < 0 || link >= static_cast<int>(st.lattice.links.size()))
        throw std::invalid_argument("flip_bond_adiabatic: invalid link");
    if (opt.substeps < 1) throw std::invalid_argument("flip_bond_adiabatic: substeps >= 1");
    double s0 = st.cpl.bond_scale[link];
    for (int m = 0; m < opt.substeps; ++m) {
        double s = s0 * (1.0 - (2.0 * m + 1.0) / opt.substeps);  // midpoint values
        st.cpl.bond_scale[link] = s;
        if (opt.backend == TransportBackend::ideal_h) {
            Mat a = assemble_hamiltonian(st.lattice, st.gauge, st.cpl);
            st.gamma = evolve(st.gamma, a, opt.dt);
        } else {
            for (int c = 0; c < opt.cycles_per_substep; ++c)
                apply_cycle(st.gamma, st.lattice, st.gauge, st.cpl, opt.tau);
        }
    }
    st.cpl.bond_scale[link] = -s0;
}

// lowest single-particle energy of a length-`separation` flipped-bond ladder
inline double zero_mode_splitting(int L, double kappa, int separation, double J = 1.0) {
    if (separation < 1) throw std::invalid_argument("zero_mode_splitting: separation >= 1");
    if (separation > L / 2)
        throw std::invalid_argument("zero_mode_splitting: separation exceeds half lattice size");
    LatticeGraph g = build_lattice(L, L, Boundary::torus);
    GaugeConfig gauge = GaugeConfig::vortex_free(g);
    Couplings cpl = Couplings::uniform(g, J, kappa);
    int y0 = L / 2;
    for (int k = 1; k <= separation; ++k)
        cpl.bond_scale[g.cell_link(k, y0, LinkType::Z)] = -1.0;
    Mat a = assemble_hamiltonian(g, gauge, cpl);
    SkewCanonical c = canonical_skew(a);
    return c.eps(0);
}

// Instantaneous logical frame: |0>_L with the two lowest modes empty, |1>_L
// with both occupied (fixed total parity).
struct LogicalFrame {
    Mat g00, g11;
    double eps0 = 0, eps1 = 0;
};

inline LogicalFrame build_logical_frame(const Mat& a) {
    GroundState gs = ground_state(a);
    LogicalFrame f;
    f.g00 = gs.gamma;
    f.g11 = excite_mode(excite_mode(gs.gamma, gs.frame, 0), gs.frame, 1);
    f.eps0 = gs.frame.eps(0);
    f.eps1 = gs.frame.eps(1);
    return f;
}

struct LogicalOverlaps {
    double p0 = 0, p1 = 0;
    double leakage() const { return std::max(0.0, 1.0 - p0 - p1); }
};

inline LogicalOverlaps logical_overlaps(const Mat& gamma, const LogicalFrame& f) {
    return {overlap(gamma, f.g00), overlap(gamma, f.g11)};
}

struct TracePoint {
    int step;
    double p0, p1;
};

// ---------------------------------------------------------------------------
// Fusion: two pairs recombined in the crossed pairing
// ---------------------------------------------------------------------------

struct FusionResult {
    int steps = 0;
    double p_vacuum = 0, p_psi = 0;        // frame overlaps in the final configuration
    double p_occ_local = 0;                // occupation of the measured local mode
    std::vector<TracePoint> trace;
    double max_leakage = 0;
};

struct FusionGeometry {
    int y0, a;
    int bond_pair_a, bond_pair_b;
    std::vector<int> path2, path3;  // links flipped by the two mobile modes
};

inline FusionGeometry fusion_geometry(const LatticeGraph& g) {
    const int L = g.L1;
    if (L % 2 != 0 || L < 8) throw std::invalid_argument("fusion: need even L >= 8");
    FusionGeometry geo;
    geo.y0 = L / 2;
    geo.a = 1;
    const int d = L / 2;
    // modes 1,2 on plaquettes (a, y0), (a+1, y0); modes 3,4 on (a+d-1, y0), (a+d, y0)
    geo.bond_pair_a = g.cell_link(geo.a + 1, geo.y0, LinkType::Z);
    geo.bond_pair_b = g.cell_link(geo.a + d, geo.y0, LinkType::Z);
    // mode 2 walks right along row y0; mode 3 hops up-left and walks left one row up
    int p2 = g.plaquette_index(geo.a + 1, geo.y0);
    for (int k = 0; k < d - 3; ++k) {
        auto s = g.dual_step(p2, 1, 0);
        geo.path2.push_back(s.link);
        p2 = s.plaq;
    }
    int p3 = g.plaquette_index(geo.a + d - 1, geo.y0);
    {
        auto s = g.dual_step(p3, -1, 1);
        geo.path3.push_back(s.link);
        p3 = s.plaq;
        for (int k = 0; k < d - 4; ++k) {
            s = g.dual_step(p3, -1, 0);
            geo.path3.push_back(s.link);
            p3 = s.plaq;
        }
    }
    return geo;
}

inline FusionResult fusion_experiment(int L, double kappa, const TransportOptions& opt,
                                      double J = 1.0) {
    LatticeGraph g = build_lattice(L, L, Boundary::torus);
    FusionGeometry geo = fusion_geometry(g);
    AnyonState st{g, GaugeConfig::vortex_free(g), Couplings::uniform(g, J, kappa), Mat()};
    st.cpl.bond_scale[geo.bond_pair_a] = -1.0;
    st.cpl.bond_scale[geo.bond_pair_b] = -1.0;
    Mat a0 = assemble_hamiltonian(st.lattice, st.gauge, st.cpl);
    st.gamma = ground_state(a0).gamma;  // |0>_L of the initial pairing

    FusionResult res;
    LogicalFrame f0 = build_logical_frame(a0);
    LogicalOverlaps o0 = logical_overlaps(st.gamma, f0);
    res.trace.push_back({0, o0.p0, o0.p1});

    // interleave the two walks
    size_t k2 = 0, k3 = 0;
    int step = 0;
    while (k2 < geo.path2.size() || k3 < geo.path3.size()) {
        if (k2 < geo.path2.size()) {
            flip_bond_adiabatic(st, geo.path2[k2++], opt);
            ++step;
            LogicalFrame f = build_logical_frame(assemble_hamiltonian(st.lattice, st.gauge, st.cpl));
            LogicalOverlaps o = logical_overlaps(st.gamma, f);
            res.trace.push_back({step, o.p0, o.p1});
        }
        if (k3 < geo.path3.size()) {
            flip_bond_adiabatic(st, geo.path3[k3++], opt);
            ++step;
            LogicalFrame f = build_logical_frame(assemble_hamiltonian(st.lattice, st.gauge, st.cpl));
            LogicalOverlaps o = logical_overlaps(st.gamma, f);
            res.trace.push_back({step, o.p0, o.p1});
        }
    }
    res.steps = step;

    Mat a_fin = assemble_hamiltonian(st.lattice, st.gauge, st.cpl);
    GroundState gs_fin = ground_state(a_fin);
    LogicalFrame f_fin = build_logical_frame(a_fin);
    LogicalOverlaps o_fin = logical_overlaps(st.gamma, f_fin);
    res.p_vacuum = o_fin.p0;
    res.p_psi = o_fin.p1;
    for (const auto& t : res.trace)
        res.max_leakage = std::max(res.max_leakage, 1.0 - t.p0 - t.p1);

    // measured local mode: the near-zero mode with more weight near the
    // crossed (2,4) pair, i.e. the right half of the defect region
    int y0 = geo.y0;
    auto weight_right = [&](int m) {
        double w = 0;
        for (int s = 0; s < g.n_sites; ++s) {
            int x = g.cell_x(s), y = g.cell_y(s);
            if (std::abs(y - y0) <= 1 && x >= geo.a + L / 2 - 3)
                w += gs_fin.frame.frame(s, 2 * m) * gs_fin.frame.frame(s, 2 * m) +
                     gs_fin.frame.frame(s, 2 * m + 1) * gs_fin.frame.frame(s, 2 * m + 1);
        }
        return w;
    };
    int local_mode = weight_right(0) > weight_right(1) ? 0 : 1;
    res.p_occ_local = mode_occupation(st.gamma, gs_fin.frame, local_mode);
    return res;
}

// ---------------------------------------------------------------------------
// Braiding: mode 2 loops once around mode 3, measured in the original basis
// ---------------------------------------------------------------------------

inline int braiding_step_formula(int L) { return 9 * (L / 3) - 23; }
inline int braiding_step_formula_table(int L) { return 9 * (L / 3) - 18; }

struct BraidGeometry {
    int y0, a, d3;
    int bond_pair_a, bond_pair_b;
    std::vector<int> setup;  // moves separating mode 4 from the loop corridor
    std::vector<int> loop;   // closed walk of mode 2 around mode 3
};

inline BraidGeometry braiding_geometry(const LatticeGraph& g) {
    const int L = g.L1;
    const int d3 = L / 3;
    if (L < 12) throw std::invalid_argument("braiding: need L >= 12");
    BraidGeometry geo;
    geo.y0 = L / 2;
    geo.a = 1;
    geo.d3 = d3;
    const int x3 = geo.a + 1 + d3;
    geo.bond_pair_a = g.cell_link(geo.a + 1, geo.y0, LinkType::Z);
    geo.bond_pair_b = g.cell_link(x3 + 1, geo.y0, LinkType::Z);

    const int r = 1;
    const bool diag = (d3 % 2 == 0);
    const int rb = diag ? (7 * d3 - 24) / 2 : (7 * d3 - 25) / 2;
    const int b = rb - r;
    if (b < 1) throw std::invalid_argument("braiding: lattice too small for the loop");

    // setup: move mode 4 one step right, out of the loop corridor
    int p4 = g.plaquette_index(x3 + 1, geo.y0);
    {
        auto s = g.dual_step(p4, 1, 0);
        geo.setup.push_back(s.link);
        p4 = s.plaq;
    }

    // closed loop of mode 2, total 9*d3 - 23 bond flips
    std::vector<std::pair<int, int>> moves;
    for (int k = 0; k < d3 - 1; ++k) moves.emplace_back(1, 0);   // approach to x3-1
    moves.emplace_back(0, 1);                                     // up
    for (int k = 0; k < r; ++k) moves.emplace_back(1, 0);         // along the top
    if (diag) {
        moves.emplace_back(1, -1);                                // down-right diagonal
    } else {
        moves.emplace_back(1, 0);
        moves.emplace_back(0, -1);
    }
    for (int k = 0; k < b; ++k) moves.emplace_back(0, -1);        // down the far side
    for (int k = 0; k < d3 + r; ++k) moves.emplace_back(-1, 0);   // return along the bottom
    for (int k = 0; k < b; ++k) moves.emplace_back(0, 1);         // close

    int p2 = g.plaquette_index(geo.a + 1, geo.y0);
    int start = p2;
    for (auto [dx, dy] : moves) {
        auto s = g.dual_step(p2, dx, dy);
        if (s.plaq < 0) throw std::logic_error("braiding: walk left the lattice");
        geo.loop.push_back(s.link);
        p2 = s.plaq;
    }
    if (p2 != start) throw std::logic_error("braiding: walk did not close");
    if (static_cast<int>(geo.loop.size()) != braiding_step_formula(L))
        throw std::logic_error("braiding: step count does not match the loop formula");
    return geo;
}

struct BraidResult {
    int steps = 0;
    int setup_steps = 0;
    double p_flip = 0;  // overlap with |1>_L of the original pairing after the loop
    double p_stay = 0;
    std::vector<TracePoint> trace;
};

inline BraidResult braiding_experiment(int L, double kappa, const TransportOptions& opt,
                                       double J = 1.0, int n_loops = 1) {
    LatticeGraph g = build_lattice(L, L, Boundary::torus);
    BraidGeometry geo = braiding_geometry(g);
    AnyonState st{g, GaugeConfig::vortex_free(g), Couplings::uniform(g, J, kappa), Mat()};
    st.cpl.bond_scale[geo.bond_pair_a] = -1.0;
    st.cpl.bond_scale[geo.bond_pair_b] = -1.0;
    for (int l : geo.setup) flip_bond_adiabatic(st, l, opt);  // state not yet set; see below
    // prepare |0>_L in the fully assembled initial configuration
    Mat a0 = assemble_hamiltonian(st.lattice, st.gauge, st.cpl);
    st.gamma = ground_state(a0).gamma;

    BraidResult res;
    res.setup_steps = static_cast<int>(geo.setup.size());
    LogicalFrame f0 = build_logical_frame(a0);
    LogicalOverlaps o0 = logical_overlaps(st.gamma, f0);
    res.trace.push_back({0, o0.p0, o0.p1});
    int step = 0;
    for (int loop = 0; loop < n_loops; ++loop) {
        for (int l : geo.loop) {
            flip_bond_adiabatic(st, l, opt);
            ++step;
            LogicalFrame f = build_logical_frame(assemble_hamiltonian(st.lattice, st.gauge, st.cpl));
            LogicalOverlaps o = logical_overlaps(st.gamma, f);
            res.trace.push_back({step, o.p0, o.p1});
        }
    }
    res.steps = static_cast<int>(geo.loop.size());
    Mat a_fin = assemble_hamiltonian(st.lattice, st.gauge, st.cpl);
    LogicalFrame f_fin = build_logical_frame(a_fin);
    LogicalOverlaps o_fin = logical_overlaps(st.gamma, f_fin);
    res.p_flip = o_fin.p1;
    res.p_stay = o_fin.p0;
    return res;
}

// ---------------------------------------------------------------------------
// Chiral edge quench on a cylinder
// ---------------------------------------------------------------------------

struct ChiralEdgeResult {
    std::vector<std::vector<double>> signal;  // [cycle][x] background-subtracted <Y Y>
    double velocity = 0;                      // signed, plaquettes per unit time
};

inline ChiralEdgeResult chiral_edge_experiment(int L, double tau, int n_cycles,
                                               bool reversed_order = false, double J = 1.0,
                                               int pulse_x = 0) {
    LatticeGraph torus = build_lattice(L, L, Boundary::torus);
    LatticeGraph cyl = build_lattice(L, L, Boundary::cylinder);
    GaugeConfig gauge_t = GaugeConfig::vortex_free(torus);
    GaugeConfig gauge_c = GaugeConfig::vortex_free(cyl);
    Couplings cpl_t = Couplings::uniform(torus, J, kappa_for_step(J, tau));
    Couplings cpl_c = Couplings::uniform(cyl, J, 0.0);

    Mat gamma = ground_state(assemble_hamiltonian(torus, gauge_t, cpl_t)).gamma;
    Mat gamma_bg = gamma;
    // pi-pulse Z on an edge site: the Z bond is cut, so only the matter
    // Majorana picks up the sign
    int site = cyl.site_a(pulse_x, 0);
    gamma.row(site) *= -1.0;
    gamma.col(site) *= -1.0;

    ChiralEdgeResult res;
    auto edge_corr = [&](const Mat& gm, int x) {
        return -gm(cyl.site_a(x, 0), cyl.site_b(x, 0));  // <Y_i Y_j> on the edge Y link
    };
    for (int c = 0; c < n_cycles; ++c) {
        apply_cycle(gamma, cyl, gauge_c, cpl_c, tau, reversed_order);
        apply_cycle(gamma_bg, cyl, gauge_c, cpl_c, tau, reversed_order);
        std::vector<double> row(L);
        for (int x = 0; x < L; ++x) row[x] = edge_corr(gamma, x) - edge_corr(gamma_bg, x);
        res.signal.push_back(row);
    }

    // circular centroid of |signal|, unwrapped, linear fit over the early window
    std::vector<double> ts, cent;
    double prev = 0;
    int n_fit = std::min<int>(n_cycles, std::max(8, static_cast<int>(0.3 * L / tau)));
    for (int c = 0; c < n_fit; ++c) {
        std::complex<double> z = 0;
        for (int x = 0; x < L; ++x)
            z += std::abs(res.signal[c][x]) * std::polar(1.0, 2.0 * M_PI * (x - pulse_x) / L);
        if (std::abs(z) < 1e-12) continue;
        double ang = std::arg(z) * L / (2.0 * M_PI);
        while (ang - prev > L / 2.0) ang -= L;
        while (ang - prev < -L / 2.0) ang += L;
        prev = ang;
        ts.push_back((c + 1) * tau);
        cent.push_back(ang);
    }
    if (ts.size() >= 4) res.velocity = fit_line(ts, cent).slope;
    return res;
}

}  // namespace floq
