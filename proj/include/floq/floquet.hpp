#pragma once

// Trotterized Floquet cycles and layered circuits in the Majorana picture.
//
// A spin gate layer exp(i theta sum_l s_l sigma^t sigma^t) acts on the
// covariance matrix as Gamma -> R Gamma R^T where R is a direct sum of
// plane rotations by 2 * theta * s_l over the disjoint links of one type.
// Spin operator products map to Majorana matrix products in the same order,
// so U = e^{-iHx t} e^{-iHy t} e^{-iHz t} corresponds to R_X R_Y R_Z.

#include "floq/fermion.hpp"

namespace floq {

// R m (left) for the layer rotation R of the given type
inline void layer_rotate_left(Mat& m, const LatticeGraph& g, const GaugeConfig& gauge,
                              LinkType type, double theta, const std::vector<double>& scale) {
    for (int l : g.links_of_type(type)) {
        const Link& lk = g.links[l];
        double th = 2.0 * theta * (scale.empty() ? 1.0 : scale[l]);
        double c = std::cos(th), s = std::sin(th) * gauge.u[l];
        Eigen::RowVectorXd ri = m.row(lk.i);
        m.row(lk.i) = c * ri + s * m.row(lk.j);
        m.row(lk.j) = -s * ri + c * m.row(lk.j);
    }
}

// m R^T (right)
inline void layer_rotate_right(Mat& m, const LatticeGraph& g, const GaugeConfig& gauge,
                               LinkType type, double theta, const std::vector<double>& scale) {
    for (int l : g.links_of_type(type)) {
        const Link& lk = g.links[l];
        double th = 2.0 * theta * (scale.empty() ? 1.0 : scale[l]);
        double c = std::cos(th), s = std::sin(th) * gauge.u[l];
        Vec ci = m.col(lk.i);
        m.col(lk.i) = c * ci + s * m.col(lk.j);
        m.col(lk.j) = -s * ci + c * m.col(lk.j);
    }
}

// Gamma -> R Gamma R^T
inline void apply_layer(Mat& gamma, const LatticeGraph& g, const GaugeConfig& gauge, LinkType type,
                        double theta, const std::vector<double>& scale = {}) {
    layer_rotate_left(gamma, g, gauge, type, theta, scale);
    layer_rotate_right(gamma, g, gauge, type, theta, scale);
}

// dense orthogonal matrix of one layer
inline Mat layer_orthogonal(const LatticeGraph& g, const GaugeConfig& gauge, LinkType type,
                            double theta, const std::vector<double>& scale = {}) {
    if (!scale.empty() && scale.size() != g.links.size())
        throw std::invalid_argument("layer_orthogonal: per-link override size mismatch");
    Mat r = Mat::Identity(g.n_sites, g.n_sites);
    layer_rotate_left(r, g, gauge, type, theta, scale);
    return r;
}

// skew generator of one layer at unit coupling (d/dtheta of the layer at 0)
inline Mat layer_generator(const LatticeGraph& g, const GaugeConfig& gauge, LinkType type,
                           const std::vector<double>& scale = {}) {
    Mat gen = Mat::Zero(g.n_sites, g.n_sites);
    for (int l : g.links_of_type(type)) {
        const Link& lk = g.links[l];
        double v = 2.0 * (scale.empty() ? 1.0 : scale[l]) * gauge.u[l];
        gen(lk.i, lk.j) = v;
        gen(lk.j, lk.i) = -v;
    }
    return gen;
}

struct LayerStep {
    LinkType type;
    double angle;  // spin-gate angle; J*tau for one Floquet layer
};

// product of layer rotations; the first entry of `seq` is the leftmost matrix
// factor, i.e. the layer applied last to the state
inline Mat compose_layers(const LatticeGraph& g, const GaugeConfig& gauge,
                          const std::vector<LayerStep>& seq,
                          const std::vector<double>& scale = {}) {
    Mat r = Mat::Identity(g.n_sites, g.n_sites);
    for (auto it = seq.rbegin(); it != seq.rend(); ++it)
        layer_rotate_left(r, g, gauge, it->type, it->angle, scale);
    return r;
}

inline std::vector<LayerStep> cycle_sequence(double j_tau, bool reversed = false) {
    if (reversed)
        return {{LinkType::Z, j_tau}, {LinkType::Y, j_tau}, {LinkType::X, j_tau}};
    return {{LinkType::X, j_tau}, {LinkType::Y, j_tau}, {LinkType::Z, j_tau}};
}

// one driving period e^{-iHx tau} e^{-iHy tau} e^{-iHz tau} as R_X R_Y R_Z
inline Mat floquet_cycle(const LatticeGraph& g, const GaugeConfig& gauge, const Couplings& cpl,
                         double tau, bool reversed = false) {
    if (tau <= 0) throw std::invalid_argument("floquet_cycle: tau must be positive");
    return compose_layers(g, gauge, cycle_sequence(cpl.J * tau, reversed), cpl.bond_scale);
}

inline void apply_cycle(Mat& gamma, const LatticeGraph& g, const GaugeConfig& gauge,
                        const Couplings& cpl, double tau, bool reversed = false) {
    auto seq = cycle_sequence(cpl.J * tau, reversed);
    for (auto it = seq.rbegin(); it != seq.rend(); ++it)
        apply_layer(gamma, g, gauge, it->type, it->angle, cpl.bond_scale);
}

// kappa value generated by one Floquet step of size tau
inline double kappa_for_step(double J, double tau) { return J * J * tau; }

struct EffectiveGenerator {
    Mat exact;        // log(cycle)/tau
    Mat first_order;  // A(H0) + A(H1), kappa = J^2 tau
};

inline EffectiveGenerator effective_generator(const LatticeGraph& g, const GaugeConfig& gauge,
                                              const Couplings& cpl, double tau) {
    Mat r = floquet_cycle(g, gauge, cpl, tau);
    EffectiveGenerator eg;
    eg.exact = log_special_orthogonal(r) / tau;
    Couplings target = cpl;
    target.kappa = kappa_for_step(cpl.J, tau);
    eg.first_order = assemble_hamiltonian(g, gauge, target);
    return eg;
}

// closed-form roots of 2 phi^2 - 3 phi delta - delta^2 = 0
inline std::pair<double, double> symmetric_d2_delta(double phi) {
    if (phi == 0.0) throw std::invalid_argument("symmetric_d2_delta: phi must be nonzero");
    double s = std::sqrt(17.0);
    return {(-3.0 + s) * phi / 2.0, (-3.0 - s) * phi / 2.0};
}

// palindromic two-block sequence built from (phi, delta); layer angles listed
// as operator factors left to right
inline std::vector<LayerStep> d2_sequence(double phi, double delta) {
    return {{LinkType::X, phi - delta}, {LinkType::Y, phi}, {LinkType::Z, phi + delta},
            {LinkType::X, phi + delta}, {LinkType::Y, phi}, {LinkType::Z, phi - delta}};
}

// Least-squares projection of log(compose(seq)) minus its linear part onto
// the three layer-generator commutators. Returns (c_xy, c_xz, c_yz) and the
// relative residual of the fit.
struct CommutatorCoefficients {
    double c_xy, c_xz, c_yz;
    double residual;
};

inline CommutatorCoefficients magnus_commutator_coefficients(const LatticeGraph& g,
                                                             const GaugeConfig& gauge,
                                                             const std::vector<LayerStep>& seq) {
    Mat r = compose_layers(g, gauge, seq);
    Mat lg = log_special_orthogonal(r);
    Mat gen[3] = {layer_generator(g, gauge, LinkType::X), layer_generator(g, gauge, LinkType::Y),
                  layer_generator(g, gauge, LinkType::Z)};
    for (const auto& s : seq) lg -= s.angle * gen[static_cast<int>(s.type)];
    Mat basis[3] = {gen[0] * gen[1] - gen[1] * gen[0], gen[0] * gen[2] - gen[2] * gen[0],
                    gen[1] * gen[2] - gen[2] * gen[1]};
    Eigen::Matrix3d gram;
    Eigen::Vector3d rhs;
    for (int a = 0; a < 3; ++a) {
        rhs(a) = (basis[a].array() * lg.array()).sum();
        for (int b = 0; b < 3; ++b) gram(a, b) = (basis[a].array() * basis[b].array()).sum();
    }
    Eigen::Vector3d c = gram.ldlt().solve(rhs);
    Mat fit = c(0) * basis[0] + c(1) * basis[1] + c(2) * basis[2];
    CommutatorCoefficients out{c(0), c(1), c(2), 0.0};
    out.residual = (lg - fit).norm() / std::max(1e-300, lg.norm());
    return out;
}

struct HeatingCurve {
    std::vector<double> time;    // physical time, cycle * tau
    std::vector<double> energy;  // <H_target> per cycle
    double initial = 0;
    double plateau_mean = 0;     // mean over the second half
    double plateau_fluct = 0;    // stddev over the second half
    double drift = 0;            // |mean(50-100%) - mean(10-50%)| / offset
};

inline HeatingCurve heating_curve(const LatticeGraph& g, const GaugeConfig& gauge,
                                  const Couplings& cpl, double tau, int n_cycles,
                                  const Mat* gamma0 = nullptr) {
    Couplings target = cpl;
    target.kappa = kappa_for_step(cpl.J, tau);
    Mat a_target = assemble_hamiltonian(g, gauge, target);
    Mat gamma = gamma0 ? *gamma0 : ground_state(a_target).gamma;
    if (purity_residual(gamma) > kPurityTol)
        throw std::invalid_argument("heating_curve: initial state not pure");
    HeatingCurve hc;
    hc.initial = energy(gamma, a_target);
    hc.time.reserve(n_cycles + 1);
    hc.energy.reserve(n_cycles + 1);
    hc.time.push_back(0.0);
    hc.energy.push_back(hc.initial);
    for (int c = 1; c <= n_cycles; ++c) {
        apply_cycle(gamma, g, gauge, cpl, tau);
        hc.time.push_back(c * tau);
        hc.energy.push_back(energy(gamma, a_target));
    }
    auto window_mean = [&](double lo, double hi) {
        int a = static_cast<int>(lo * n_cycles), b = static_cast<int>(hi * n_cycles);
        double s = 0;
        for (int c = a; c < b; ++c) s += hc.energy[c + 1];
        return s / std::max(1, b - a);
    };
    hc.plateau_mean = window_mean(0.5, 1.0);
    double var = 0;
    int a = n_cycles / 2;
    for (int c = a; c < n_cycles; ++c) var += std::pow(hc.energy[c + 1] - hc.plateau_mean, 2);
    hc.plateau_fluct = std::sqrt(var / std::max(1, n_cycles - a));
    double offset = hc.plateau_mean - hc.initial;
    hc.drift = std::abs(hc.plateau_mean - window_mean(0.1, 0.5)) / std::max(1e-300, std::abs(offset));
    return hc;
}

}  // namespace floq
