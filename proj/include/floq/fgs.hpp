#pragma once

// Fermionic-Gaussian-state dynamics with a local magnetic field: the Z bond
// under the field site is promoted to dynamical Majoranas {b_j, b_j'}, the
// Hamiltonian gains one J-type and four K-type quartic terms, and the state
// evolves under the self-consistent mean-field equation d_t G = [H(G), G].
//
// Extended index layout: matter Majoranas c_0..c_{N-1}, then b at the odd
// endpoint (index N) and b at the even endpoint (index N+1) of the broken
// bond. The plaquette factor <i b_o b_e> starts at the stored gauge value.

#include "floq/fermion.hpp"

namespace floq {

struct Quartic {
    int a, b, c, d;  // strictly ascending
    double coeff;    // coeff * g_a g_b g_c g_d
};

struct ExtendedHamiltonian {
    int n_matter = 0;
    Mat quad;  // (N+2) x (N+2), includes the field term
    std::vector<Quartic> quartics;
    int site_odd = -1, site_even = -1;  // endpoints of the broken bond
    int broken_link = -1;
    int field_site = -1;
    double h = 0;

    int idx_b_odd() const { return n_matter; }
    int idx_b_even() const { return n_matter + 1; }
};

namespace detail {
inline void add_quartic(std::vector<Quartic>& qs, std::array<int, 4> ix, double coeff) {
    // bubble sort with sign tracking
    for (int pass = 0; pass < 3; ++pass)
        for (int k = 0; k + 1 < 4 - pass; ++k)
            if (ix[k] > ix[k + 1]) {
                std::swap(ix[k], ix[k + 1]);
                coeff = -coeff;
            }
    for (int k = 0; k + 1 < 4; ++k)
        if (ix[k] == ix[k + 1]) throw std::logic_error("add_quartic: repeated index");
    qs.push_back({ix[0], ix[1], ix[2], ix[3], coeff});
}
}  // namespace detail

inline ExtendedHamiltonian build_extended_hamiltonian(const LatticeGraph& g,
                                                      const GaugeConfig& gauge,
                                                      const Couplings& cpl, double h, int site) {
    ExtendedHamiltonian eh;
    eh.n_matter = g.n_sites;
    eh.field_site = site;
    eh.h = h;
    int zl = g.link_at(site, LinkType::Z);
    if (zl < 0)
        throw std::invalid_argument("build_extended_hamiltonian: field site has no Z bond");
    eh.broken_link = zl;
    eh.site_odd = g.links[zl].i;
    eh.site_even = g.links[zl].j;
    const int bo = eh.idx_b_odd(), be = eh.idx_b_even();
    const double s_broken = cpl.scale(zl);

    // quadratic part: remove the broken bond (and every K path through it)
    Couplings cut = cpl;
    if (cut.bond_scale.empty()) cut.bond_scale.assign(g.links.size(), 1.0);
    cut.bond_scale[zl] = 0.0;
    Mat a = assemble_hamiltonian(g, gauge, cut);
    eh.quad = Mat::Zero(g.n_sites + 2, g.n_sites + 2);
    eh.quad.topLeftCorner(g.n_sites, g.n_sites) = a;
    // field -i h b_j c_j: A(b_j, j) = -2h
    int bfield = (site == eh.site_odd) ? bo : be;
    eh.quad(bfield, site) = -2.0 * h;
    eh.quad(site, bfield) = 2.0 * h;

    // J quartic: i J s (i g_bo g_be) c_o c_e  ->  +J s * g_e g_o g_bo g_be sorted
    detail::add_quartic(eh.quartics, {bo, be, eh.site_odd, eh.site_even}, -cpl.J * s_broken);

    // four K quartics: paths p -(broken)- mid -(l2)- q
    if (cpl.kappa != 0.0) {
        for (int mid : {eh.site_odd, eh.site_even}) {
            int p = (mid == eh.site_odd) ? eh.site_even : eh.site_odd;
            for (int t2 = 0; t2 < 3; ++t2) {
                if (static_cast<LinkType>(t2) == LinkType::Z) continue;
                int l2 = g.link_at(mid, static_cast<LinkType>(t2));
                if (l2 < 0) continue;
                const Link& lk2 = g.links[l2];
                int q = lk2.i == mid ? lk2.j : lk2.i;
                double kp = cpl.kappa * s_broken * cpl.scale(l2) *
                            knn_sign(LinkType::Z, static_cast<LinkType>(t2));
                double orient = (p == eh.site_odd) ? 1.0 : -1.0;  // u-hat(p->mid) = orient * i g_bo g_be
                double coeff = -kp * orient * gauge.value(g, l2, mid);
                detail::add_quartic(eh.quartics, {bo, be, p, q}, coeff);
            }
        }
    }
    return eh;
}

// extended covariance matrix: matter block plus the b pair at the gauge value
inline Mat extend_covariance(const Mat& gamma_matter, const GaugeConfig& gauge,
                             const ExtendedHamiltonian& eh) {
    const int n = eh.n_matter;
    Mat g = Mat::Zero(n + 2, n + 2);
    g.topLeftCorner(n, n) = gamma_matter;
    double u = gauge.u[eh.broken_link];
    g(eh.idx_b_odd(), eh.idx_b_even()) = u;
    g(eh.idx_b_even(), eh.idx_b_odd()) = -u;
    return g;
}

// mean-field matrix H(G) = 4 d<H>/dG: quadratic part plus Wick contractions
inline Mat mean_field_matrix(const ExtendedHamiltonian& eh, const Mat& g) {
    Mat h = eh.quad;
    auto add = [&](int x, int y, double v) {
        h(x, y) += v;
        h(y, x) -= v;
    };
    for (const auto& q : eh.quartics) {
        double l2 = 2.0 * q.coeff;
        add(q.a, q.b, -l2 * g(q.c, q.d));
        add(q.c, q.d, -l2 * g(q.a, q.b));
        add(q.a, q.c, l2 * g(q.b, q.d));
        add(q.b, q.d, l2 * g(q.a, q.c));
        add(q.a, q.d, -l2 * g(q.b, q.c));
        add(q.b, q.c, -l2 * g(q.a, q.d));
    }
    return h;
}

inline double fgs_energy(const ExtendedHamiltonian& eh, const Mat& g) {
    double e = -0.25 * (eh.quad * g).trace();
    for (const auto& q : eh.quartics)
        e += -q.coeff * (g(q.a, q.b) * g(q.c, q.d) - g(q.a, q.c) * g(q.b, q.d) +
                         g(q.a, q.d) * g(q.b, q.c));
    return e;
}

struct FgsStep {
    double t;
    double w_dynamic;  // <i b_o b_e>, the dynamical plaquette factor
    double energy;
    double purity;
};

struct FgsOptions {
    double dt = 0.02;
    int reproject_every = 10;
    double purity_guard = 1e-6;
    int sample_every = 1;
};

// RK4 on d_t G = sign [H(G), G] with periodic purity re-projection
inline std::vector<FgsStep> evolve_fgs(Mat& g, const ExtendedHamiltonian& eh, double t_total,
                                       const FgsOptions& opt, int sign = +1) {
    auto deriv = [&](const Mat& x) {
        Mat h = mean_field_matrix(eh, x);
        return Mat(sign * (h * x - x * h));
    };
    int n_steps = static_cast<int>(std::round(t_total / opt.dt));
    std::vector<FgsStep> traj;
    traj.reserve(n_steps / opt.sample_every + 2);
    auto record = [&](int k) {
        traj.push_back({k * opt.dt, g(eh.idx_b_odd(), eh.idx_b_even()), fgs_energy(eh, g),
                        purity_residual(g)});
    };
    record(0);
    for (int k = 1; k <= n_steps; ++k) {
        Mat k1 = deriv(g);
        Mat k2 = deriv(g + 0.5 * opt.dt * k1);
        Mat k3 = deriv(g + 0.5 * opt.dt * k2);
        Mat k4 = deriv(g + opt.dt * k3);
        g += (opt.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        g = skew_part(g);
        if (k % opt.reproject_every == 0) {
            double res = purity_residual(g);
            if (res > opt.purity_guard)
                throw std::runtime_error("evolve_fgs: purity drift " + std::to_string(res) +
                                         ", reduce dt");
            project_orthogonal(g, 2);
            g = skew_part(g);
        }
        if (k % opt.sample_every == 0 || k == n_steps) record(k);
    }
    return traj;
}

// the same Hamiltonian with everything negated except the field term
inline ExtendedHamiltonian negated_keeping_field(const ExtendedHamiltonian& eh) {
    ExtendedHamiltonian out = eh;
    out.quad = -eh.quad;
    int bfield = (eh.field_site == eh.site_odd) ? eh.idx_b_odd() : eh.idx_b_even();
    out.quad(bfield, eh.field_site) = eh.quad(bfield, eh.field_site);
    out.quad(eh.field_site, bfield) = eh.quad(eh.field_site, bfield);
    for (auto& q : out.quartics) q.coeff = -q.coeff;
    return out;
}

// <W_p> with the dynamical factor when p borders the broken bond
inline double measure_plaquette_dynamic(const LatticeGraph& g, const GaugeConfig& gauge,
                                        const ExtendedHamiltonian& eh, const Mat& gamma_ext,
                                        int p) {
    double w = 1.0;
    bool dynamic = false;
    for (int l : g.plaquettes.at(p).links) {
        if (l == eh.broken_link) {
            dynamic = true;
            continue;
        }
        w *= gauge.u[l];
    }
    if (dynamic) w *= gamma_ext(eh.idx_b_odd(), eh.idx_b_even());
    return w;
}

}  // namespace floq
