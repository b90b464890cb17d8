#pragma once

// Exact 2^N state-vector oracle for small systems. Ground truth for the
// free-fermion modules on (2,2)/(2,3)-scale lattices.
//
// Qubit k maps to bit k of the basis index; |0> is the Z = +1 state.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>

#include "floq/fermion.hpp"
#include "floq/lattice.hpp"

namespace floq {

using cplx = std::complex<double>;

constexpr int kOracleMaxQubits = 24;

struct PauliString {
    int n = 0;
    std::vector<uint8_t> ops;  // 0=I 1=X 2=Y 3=Z

    explicit PauliString(int n_) : n(n_), ops(n_, 0) {}
    void set(int site, uint8_t op) { ops.at(site) = op; }

    uint64_t mask_flip() const {  // X or Y sites
        uint64_t m = 0;
        for (int k = 0; k < n; ++k)
            if (ops[k] == 1 || ops[k] == 2) m |= (1ull << k);
        return m;
    }
    uint64_t mask_zy() const {  // Z or Y sites carry (-1)^bit
        uint64_t m = 0;
        for (int k = 0; k < n; ++k)
            if (ops[k] == 2 || ops[k] == 3) m |= (1ull << k);
        return m;
    }
    int count_y() const {
        int c = 0;
        for (int k = 0; k < n; ++k) c += ops[k] == 2;
        return c;
    }
};

// product sigma_a sigma_b = phase * sigma_c per site
inline void pauli_product(uint8_t a, uint8_t b, uint8_t& c, cplx& phase) {
    static const uint8_t tbl[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
    static const cplx ph[4][4] = {{1, 1, 1, 1},
                                  {1, 1, {0, 1}, {0, -1}},
                                  {1, {0, -1}, 1, {0, 1}},
                                  {1, {0, 1}, {0, -1}, 1}};
    phase *= ph[a][b];
    c = tbl[a][b];
}

struct WeightedPauli {
    PauliString p;
    cplx coeff{1.0, 0.0};
};

inline WeightedPauli pauli_multiply(const WeightedPauli& a, const WeightedPauli& b) {
    WeightedPauli out{PauliString(a.p.n), a.coeff * b.coeff};
    for (int k = 0; k < a.p.n; ++k) {
        uint8_t c;
        pauli_product(a.p.ops[k], b.p.ops[k], c, out.coeff);
        out.p.ops[k] = c;
    }
    return out;
}

class SpinState {
public:
    int n = 0;
    std::vector<cplx> amp;

    explicit SpinState(int n_qubits) : n(n_qubits) {
        if (n < 1 || n > kOracleMaxQubits)
            throw std::invalid_argument("SpinState: qubit count outside [1, 24]");
        amp.assign(1ull << n, cplx(0, 0));
        amp[0] = 1.0;  // |00...0>
    }

    double norm2() const {
        double s = 0;
        for (const auto& a : amp) s += std::norm(a);
        return s;
    }
    void normalize() {
        double s = std::sqrt(norm2());
        for (auto& a : amp) a /= s;
    }
    cplx inner(const SpinState& other) const {
        cplx s = 0;
        for (size_t k = 0; k < amp.size(); ++k) s += std::conj(amp[k]) * other.amp[k];
        return s;
    }
};

namespace detail {
inline cplx i_pow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}
}  // namespace detail

// in place |psi> -> P |psi>
inline void apply_pauli(SpinState& st, const PauliString& p) {
    const uint64_t mx = p.mask_flip(), mzy = p.mask_zy();
    const cplx iy = detail::i_pow(p.count_y());
    const uint64_t dim = 1ull << st.n;
    if (mx == 0) {
        for (uint64_t s = 0; s < dim; ++s) {
            double sgn = (__builtin_popcountll(s & mzy) & 1) ? -1.0 : 1.0;
            st.amp[s] *= iy * sgn;
        }
        return;
    }
    for (uint64_t s = 0; s < dim; ++s) {
        uint64_t t = s ^ mx;
        if (t < s) continue;
        double sgn_s = (__builtin_popcountll(s & mzy) & 1) ? -1.0 : 1.0;
        double sgn_t = (__builtin_popcountll(t & mzy) & 1) ? -1.0 : 1.0;
        cplx as = st.amp[s], at = st.amp[t];
        st.amp[t] = iy * sgn_s * as;
        st.amp[s] = iy * sgn_t * at;
    }
}

// in place |psi> -> exp(i theta P) |psi>
inline void apply_pauli_rotation(SpinState& st, const PauliString& p, double theta) {
    const uint64_t mx = p.mask_flip(), mzy = p.mask_zy();
    const cplx iy = detail::i_pow(p.count_y());
    const cplx co(std::cos(theta), 0.0);
    const cplx isin(0.0, std::sin(theta));
    const uint64_t dim = 1ull << st.n;
    if (mx == 0) {
        for (uint64_t s = 0; s < dim; ++s) {
            double sgn = (__builtin_popcountll(s & mzy) & 1) ? -1.0 : 1.0;
            st.amp[s] *= co + isin * iy * sgn;
        }
        return;
    }
    for (uint64_t s = 0; s < dim; ++s) {
        uint64_t t = s ^ mx;
        if (t < s) continue;
        double sgn_s = (__builtin_popcountll(s & mzy) & 1) ? -1.0 : 1.0;
        double sgn_t = (__builtin_popcountll(t & mzy) & 1) ? -1.0 : 1.0;
        cplx as = st.amp[s], at = st.amp[t];
        st.amp[s] = co * as + isin * iy * sgn_t * at;
        st.amp[t] = co * at + isin * iy * sgn_s * as;
    }
}

inline double measure_pauli_string(const SpinState& st, const PauliString& p) {
    const uint64_t mx = p.mask_flip(), mzy = p.mask_zy();
    const cplx iy = detail::i_pow(p.count_y());
    cplx acc = 0;
    const uint64_t dim = 1ull << st.n;
    for (uint64_t s = 0; s < dim; ++s) {
        uint64_t t = s ^ mx;
        double sgn = (__builtin_popcountll(s & mzy) & 1) ? -1.0 : 1.0;
        acc += std::conj(st.amp[t]) * iy * sgn * st.amp[s];
    }
    return acc.real();
}

inline void apply_single(SpinState& st, int site, uint8_t axis, double theta) {
    if (site < 0 || site >= st.n) throw std::out_of_range("apply_single: bad site");
    PauliString p(st.n);
    p.set(site, axis);
    apply_pauli_rotation(st, p, theta);
}

// exp(i theta sigma^t_i sigma^t_j) on the given link
inline void apply_two_body(SpinState& st, const LatticeGraph& g, int link, double theta) {
    const Link& l = g.links.at(link);
    PauliString p(st.n);
    uint8_t op = static_cast<uint8_t>(static_cast<int>(l.type) + 1);
    p.set(l.i, op);
    p.set(l.j, op);
    apply_pauli_rotation(st, p, theta);
}

inline PauliString plaquette_string(const LatticeGraph& g, int p, int n) {
    PauliString w(n);
    for (auto [site, label] : plaquette_operator(g, p))
        w.set(site, static_cast<uint8_t>(static_cast<int>(label) + 1));
    return w;
}

// ---------------------------------------------------------------------------
// Spin Hamiltonian terms matching the fermionic matrix A
// ---------------------------------------------------------------------------

struct SpinHamiltonian {
    std::vector<WeightedPauli> terms;  // coefficients real (stored in coeff.real())
};

inline uint8_t third_axis(LinkType a, LinkType b) {
    return static_cast<uint8_t>(3 - static_cast<int>(a) - static_cast<int>(b) + 1);
}

// -J sum sigma sigma   + kappa-weighted three-body terms + optional -h Z field
inline SpinHamiltonian spin_hamiltonian(const LatticeGraph& g, const Couplings& cpl,
                                        double h = 0.0, int field_site = -1) {
    SpinHamiltonian ham;
    const int n = g.n_sites;
    for (size_t l = 0; l < g.links.size(); ++l) {
        const Link& lk = g.links[l];
        WeightedPauli t{PauliString(n), -cpl.J * cpl.scale(static_cast<int>(l))};
        uint8_t op = static_cast<uint8_t>(static_cast<int>(lk.type) + 1);
        t.p.set(lk.i, op);
        t.p.set(lk.j, op);
        ham.terms.push_back(t);
    }
    if (cpl.kappa != 0.0) {
        for (int j = 0; j < n; ++j) {
            for (int t1 = 0; t1 < 3; ++t1) {
                for (int t2 = t1 + 1; t2 < 3; ++t2) {
                    int l1 = g.link_at(j, static_cast<LinkType>(t1));
                    int l2 = g.link_at(j, static_cast<LinkType>(t2));
                    if (l1 < 0 || l2 < 0) continue;
                    const Link& lk1 = g.links[l1];
                    const Link& lk2 = g.links[l2];
                    int i = lk1.i == j ? lk1.j : lk1.i;
                    int k = lk2.i == j ? lk2.j : lk2.i;
                    if (i == k) continue;
                    // path i -(t1)- j -(t2)- k with t1 < t2: sign +1
                    WeightedPauli t{PauliString(n),
                                    cpl.kappa * cpl.scale(l1) * cpl.scale(l2)};
                    t.p.set(i, static_cast<uint8_t>(t1 + 1));
                    t.p.set(j, third_axis(static_cast<LinkType>(t1), static_cast<LinkType>(t2)));
                    t.p.set(k, static_cast<uint8_t>(t2 + 1));
                    ham.terms.push_back(t);
                }
            }
        }
    }
    if (h != 0.0) {
        if (field_site < 0 || field_site >= n) throw std::invalid_argument("spin_hamiltonian: bad field site");
        WeightedPauli t{PauliString(n), -h};
        t.p.set(field_site, 3);
        ham.terms.push_back(t);
    }
    return ham;
}

inline double spin_energy(const SpinState& st, const SpinHamiltonian& ham) {
    double e = 0;
    for (const auto& t : ham.terms) e += t.coeff.real() * measure_pauli_string(st, t.p);
    return e;
}

// second-order Trotter step exp(-i H t) applied with n_steps substeps
inline void trotter_evolve(SpinState& st, const SpinHamiltonian& ham, double t, int n_steps) {
    double dt = t / n_steps;
    for (int s = 0; s < n_steps; ++s) {
        for (size_t k = 0; k < ham.terms.size(); ++k)
            apply_pauli_rotation(st, ham.terms[k].p, -0.5 * dt * ham.terms[k].coeff.real());
        for (size_t k = ham.terms.size(); k-- > 0;)
            apply_pauli_rotation(st, ham.terms[k].p, -0.5 * dt * ham.terms[k].coeff.real());
    }
}

// ---------------------------------------------------------------------------
// Vortex projection, syndrome sampling and pairing
// ---------------------------------------------------------------------------

// Pi_p (1 + W_p)/2 over all but the last plaquette; the remaining one is
// fixed by the global constraint. Returns the projection probability.
inline double project_vortex_free(SpinState& st, const LatticeGraph& g) {
    double n0 = st.norm2();
    SpinState work(st.n);
    for (size_t p = 0; p + 1 < g.plaquettes.size(); ++p) {
        PauliString w = plaquette_string(g, static_cast<int>(p), st.n);
        work.amp = st.amp;
        apply_pauli(work, w);
        for (size_t k = 0; k < st.amp.size(); ++k) st.amp[k] = 0.5 * (st.amp[k] + work.amp[k]);
    }
    double n1 = st.norm2();
    if (n1 < 1e-300) throw std::runtime_error("project_vortex_free: projection annihilated the state");
    for (auto& a : st.amp) a /= std::sqrt(n1);
    return n1 / n0;
}

struct Syndrome {
    int rows = 0, cols = 0;
    std::vector<int> w;  // per plaquette, +-1, row-major
    int at(int x, int y) const { return w[y * cols + x]; }
};

struct PairingCorrection {
    int row = 0;
    int from = 0, to = 0;     // plaquette columns paired within the row
    std::vector<int> sites;   // Z string sites moving `from` onto `to`
};

// Z string moving a vortex at column x1 to column x2 within plaquette row y,
// stepping through the shorter arc if `wrap` is set.
inline std::vector<int> row_z_string(const LatticeGraph& g, int y, int x1, int x2, bool wrap) {
    std::vector<int> sites;
    int L = g.L1;
    int x = x1;
    auto step = [&](int dir) {
        // Z at B(x+1, y) flips p(x, y) and p(x+1, y); moving left uses B(x, y)
        if (dir > 0) {
            sites.push_back(g.site_b(g.wrap_x(x + 1), y));
            x = g.wrap_x(x + 1);
        } else {
            sites.push_back(g.site_b(g.wrap_x(x), y));
            x = g.wrap_x(x - 1);
        }
    };
    int fwd = ((x2 - x1) % L + L) % L;  // steps moving right
    if (!wrap) {
        for (int k = 0; k < fwd; ++k) step(+1);
    } else {
        for (int k = 0; k < L - fwd; ++k) step(-1);
    }
    return sites;
}

namespace detail {
// Minimum-total-arc-length perfect matching of sorted marked columns on a
// ring. Optimal matchings are non-crossing, so an interval DP is exact:
// point 0 pairs with an odd-offset partner, splitting the rest into two
// independent line segments.
inline double ring_pair(const std::vector<int>& pos, int L, std::vector<std::pair<int, int>>& pairs) {
    const int k = static_cast<int>(pos.size());
    pairs.clear();
    if (k == 0) return 0;
    auto dist = [&](int a, int b) {
        int d = std::abs(pos[a] - pos[b]);
        return static_cast<double>(std::min(d, L - d));
    };
    const double inf = 1e300;
    std::vector<std::vector<double>> dp(k, std::vector<double>(k, 0.0));
    std::vector<std::vector<int>> choice(k, std::vector<int>(k, -1));
    for (int len = 2; len <= k; len += 2) {
        for (int i = 0; i + len - 1 < k; ++i) {
            int j = i + len - 1;
            dp[i][j] = inf;
            for (int m = i + 1; m <= j; m += 2) {
                double c = dist(i, m) + (m > i + 1 ? dp[i + 1][m - 1] : 0.0) +
                           (m < j ? dp[m + 1][j] : 0.0);
                if (c < dp[i][j]) {
                    dp[i][j] = c;
                    choice[i][j] = m;
                }
            }
        }
    }
    double best = inf;
    int bm = -1;
    for (int m = 1; m < k; m += 2) {
        double c = dist(0, m) + (m > 1 ? dp[1][m - 1] : 0.0) + (m + 1 < k ? dp[m + 1][k - 1] : 0.0);
        if (c < best) {
            best = c;
            bm = m;
        }
    }
    std::function<void(int, int)> rec = [&](int i, int j) {
        if (i >= j) return;
        int m = choice[i][j];
        pairs.emplace_back(i, m);
        rec(i + 1, m - 1);
        rec(m + 1, j);
    };
    pairs.emplace_back(0, bm);
    rec(1, bm - 1);
    rec(bm + 1, k - 1);
    return best;
}
}  // namespace detail

struct SampleAndPairResult {
    Syndrome syndrome;
    std::vector<PairingCorrection> corrections;
};

// Projective measurement of every W_p (with collapse) followed by in-row
// minimal pairing; applying the returned Z strings makes the state vortex-free.
inline SampleAndPairResult sample_and_pair(SpinState& st, const LatticeGraph& g, std::mt19937_64& rng) {
    if (g.boundary != Boundary::torus) throw std::invalid_argument("sample_and_pair: torus only");
    SampleAndPairResult out;
    out.syndrome.rows = g.plaquette_rows();
    out.syndrome.cols = g.L1;
    out.syndrome.w.assign(g.plaquettes.size(), 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    SpinState work(st.n);
    for (size_t p = 0; p < g.plaquettes.size(); ++p) {
        PauliString w = plaquette_string(g, static_cast<int>(p), st.n);
        double exp_w = measure_pauli_string(st, w);
        double p_plus = 0.5 * (1.0 + exp_w);
        int outcome = (uni(rng) < p_plus) ? 1 : -1;
        work.amp = st.amp;
        apply_pauli(work, w);
        for (size_t k = 0; k < st.amp.size(); ++k)
            st.amp[k] = 0.5 * (st.amp[k] + static_cast<double>(outcome) * work.amp[k]);
        st.normalize();
        out.syndrome.w[p] = outcome;
    }
    for (int y = 0; y < out.syndrome.rows; ++y) {
        std::vector<int> cols;
        for (int x = 0; x < g.L1; ++x)
            if (out.syndrome.at(x, y) < 0) cols.push_back(x);
        if (cols.size() % 2 != 0)
            throw std::runtime_error("sample_and_pair: odd vortex parity in a row");
        std::vector<std::pair<int, int>> pairs;
        detail::ring_pair(cols, g.L1, pairs);
        for (auto [a, b] : pairs) {
            PairingCorrection c;
            c.row = y;
            c.from = cols[a];
            c.to = cols[b];
            int fwd = ((cols[b] - cols[a]) % g.L1 + g.L1) % g.L1;
            c.sites = row_z_string(g, y, cols[a], cols[b], fwd > g.L1 - fwd);
            out.corrections.push_back(c);
        }
    }
    return out;
}

inline void apply_z_string(SpinState& st, const std::vector<int>& sites) {
    PauliString p(st.n);
    for (int s : sites) p.set(s, p.ops.at(s) == 3 ? 0 : 3);  // Z^2 = I on revisited sites
    apply_pauli(st, p);
}

// Conditional one-step transport of vortices toward a per-row sink column.
// Purely classical on the syndrome; returns vortex counts per round.
inline std::vector<int> dissipative_cooling_rounds(Syndrome syn, int sink_col) {
    std::vector<int> counts;
    auto count = [&] {
        int c = 0;
        for (int v : syn.w) c += v < 0;
        return c;
    };
    counts.push_back(count());
    int guard = syn.cols + 2;
    while (counts.back() > 0) {
        if (--guard < 0) throw std::runtime_error("dissipative_cooling: round bound exceeded");
        std::vector<int> next(syn.w.size(), 1);
        for (int y = 0; y < syn.rows; ++y) {
            for (int x = 0; x < syn.cols; ++x) {
                if (syn.at(x, y) > 0) continue;
                int tx = x;
                if (x != sink_col) {
                    int fwd = ((sink_col - x) % syn.cols + syn.cols) % syn.cols;
                    tx = (fwd <= syn.cols - fwd) ? (x + 1) % syn.cols : (x - 1 + syn.cols) % syn.cols;
                }
                next[y * syn.cols + tx] *= -1;
            }
        }
        syn.w = next;
        counts.push_back(count());
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Majorana two-point functions reconstructed from the spin state
// ---------------------------------------------------------------------------

// c_a c_b = i u(a->b) sigma^t_a sigma^t_b on a link; longer strings multiply
// along a site path.
inline WeightedPauli majorana_pair_operator(const LatticeGraph& g, const GaugeConfig& gauge,
                                            const std::vector<int>& path, int n) {
    WeightedPauli acc{PauliString(n), 1.0};
    for (size_t k = 0; k + 1 < path.size(); ++k) {
        int a = path[k], b = path[k + 1];
        int link = -1;
        for (int t = 0; t < 3; ++t) {
            int l = g.link_at(a, static_cast<LinkType>(t));
            if (l >= 0) {
                const Link& lk = g.links[l];
                if (lk.i == b || lk.j == b) { link = l; break; }
            }
        }
        if (link < 0) throw std::invalid_argument("majorana_pair_operator: path not along links");
        WeightedPauli hop{PauliString(n), cplx(0, 1) * static_cast<double>(gauge.value(g, link, a))};
        uint8_t op = static_cast<uint8_t>(static_cast<int>(g.links[link].type) + 1);
        hop.p.set(a, op);
        hop.p.set(b, op);
        acc = pauli_multiply(acc, hop);
    }
    return acc;
}

// deterministic BFS path between two sites
inline std::vector<int> site_path(const LatticeGraph& g, int a, int b) {
    std::vector<int> prev(g.n_sites, -2);
    std::vector<int> queue{a};
    prev[a] = -1;
    for (size_t h = 0; h < queue.size(); ++h) {
        int s = queue[h];
        if (s == b) break;
        for (int t = 0; t < 3; ++t) {
            int l = g.link_at(s, static_cast<LinkType>(t));
            if (l < 0) continue;
            int o = g.links[l].i == s ? g.links[l].j : g.links[l].i;
            if (prev[o] == -2) {
                prev[o] = s;
                queue.push_back(o);
            }
        }
    }
    std::vector<int> path;
    for (int s = b; s != -1; s = prev[s]) path.push_back(s);
    std::reverse(path.begin(), path.end());
    return path;
}

// Gamma_ij = i <c_i c_j> for every pair, via Pauli-string transport
inline Mat gamma_from_state(const SpinState& st, const LatticeGraph& g, const GaugeConfig& gauge) {
    Mat gamma = Mat::Zero(g.n_sites, g.n_sites);
    for (int i = 0; i < g.n_sites; ++i) {
        for (int j = i + 1; j < g.n_sites; ++j) {
            WeightedPauli op = majorana_pair_operator(g, gauge, site_path(g, i, j), st.n);
            cplx val = cplx(0, 1) * op.coeff * measure_pauli_string(st, op.p);
            gamma(i, j) = val.real();
            gamma(j, i) = -val.real();
        }
    }
    return gamma;
}

}  // namespace floq
