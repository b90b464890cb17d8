#pragma once

// Variational circuit optimization in the Majorana picture: operator-norm
// (Frobenius) cost for effective-Hamiltonian engineering and Pfaffian-overlap
// cost for state preparation, both with analytic gradients.
//
// A depth-D ansatz is D blocks; block i applies the X, Y, Z gate layers with
// angles (tx_i, ty_i, tz_i). Block 1 acts first on the state, so the circuit
// matrix is U = B_D ... B_1 with B_i = R_X R_Y R_Z.

#include <functional>

#include "floq/floquet.hpp"

namespace floq {

struct CircuitAngles {
    int depth = 0;
    std::vector<std::array<double, 3>> theta;  // per block: X, Y, Z spin angles

    static CircuitAngles zeros(int d) { return {d, std::vector<std::array<double, 3>>(d, {0, 0, 0})}; }
    int count() const { return 3 * depth; }
    double* data() { return theta.front().data(); }
    const double* data() const { return theta.front().data(); }
};

inline double rng_uniform(std::mt19937_64& rng) {  // in [0,1)
    return (rng() >> 11) * 0x1.0p-53;
}

// palindromic profile (x_i = z_{D+1-i}, y symmetric) plus uniform noise
inline CircuitAngles randomized_symmetric_init(int depth, double base_angle, double noise,
                                               std::mt19937_64& rng) {
    CircuitAngles a = CircuitAngles::zeros(depth);
    std::vector<double> x(depth), y(depth), z(depth);
    for (int i = 0; i < (depth + 1) / 2; ++i) {
        double dx = base_angle * (2.0 * rng_uniform(rng) - 1.0);
        x[i] = base_angle + dx;
        z[i] = base_angle - dx;
        y[i] = base_angle;
        x[depth - 1 - i] = z[i];
        z[depth - 1 - i] = x[i];
        y[depth - 1 - i] = y[i];
    }
    for (int i = 0; i < depth; ++i) {
        a.theta[i][0] = x[i] + noise * (2.0 * rng_uniform(rng) - 1.0);
        a.theta[i][1] = y[i] + noise * (2.0 * rng_uniform(rng) - 1.0);
        a.theta[i][2] = z[i] + noise * (2.0 * rng_uniform(rng) - 1.0);
    }
    return a;
}

// circuit matrix and per-block suffix/prefix products for gradients
struct CircuitWork {
    Mat u;                    // full circuit
    std::vector<Mat> suffix;  // S_i = B_i ... B_1, S_0 = I
    std::vector<Mat> prefix;  // L_i = B_D ... B_{i+1}, L_D = I
};

inline Mat block_matrix(const LatticeGraph& g, const GaugeConfig& gauge,
                        const std::array<double, 3>& th, const std::vector<double>& scale) {
    Mat b = Mat::Identity(g.n_sites, g.n_sites);
    layer_rotate_left(b, g, gauge, LinkType::Z, th[2], scale);
    layer_rotate_left(b, g, gauge, LinkType::Y, th[1], scale);
    layer_rotate_left(b, g, gauge, LinkType::X, th[0], scale);
    return b;
}

inline Mat circuit_matrix(const LatticeGraph& g, const GaugeConfig& gauge, const CircuitAngles& a,
                          const std::vector<double>& scale = {}) {
    Mat u = Mat::Identity(g.n_sites, g.n_sites);
    for (int i = 0; i < a.depth; ++i) {
        layer_rotate_left(u, g, gauge, LinkType::Z, a.theta[i][2], scale);
        layer_rotate_left(u, g, gauge, LinkType::Y, a.theta[i][1], scale);
        layer_rotate_left(u, g, gauge, LinkType::X, a.theta[i][0], scale);
    }
    return u;
}

inline CircuitWork circuit_work(const LatticeGraph& g, const GaugeConfig& gauge,
                                const CircuitAngles& a, const std::vector<double>& scale = {}) {
    CircuitWork w;
    const int n = g.n_sites;
    w.suffix.resize(a.depth + 1);
    w.prefix.resize(a.depth + 1);
    w.suffix[0] = Mat::Identity(n, n);
    for (int i = 0; i < a.depth; ++i) {
        Mat s = w.suffix[i];
        layer_rotate_left(s, g, gauge, LinkType::Z, a.theta[i][2], scale);
        layer_rotate_left(s, g, gauge, LinkType::Y, a.theta[i][1], scale);
        layer_rotate_left(s, g, gauge, LinkType::X, a.theta[i][0], scale);
        w.suffix[i + 1] = std::move(s);
    }
    w.prefix[a.depth] = Mat::Identity(n, n);
    for (int i = a.depth; i-- > 0;) {
        Mat b = block_matrix(g, gauge, a.theta[i], scale);
        w.prefix[i] = w.prefix[i + 1] * b;
    }
    w.u = w.suffix[a.depth];
    return w;
}

namespace detail {
// sum_links of the generator-weighted entries: Tr[P G_type]
inline double trace_with_generator(const Mat& p, const LatticeGraph& g, const GaugeConfig& gauge,
                                   LinkType type, const std::vector<double>& scale) {
    double acc = 0;
    for (int l : g.links_of_type(type)) {
        const Link& lk = g.links[l];
        double v = 2.0 * (scale.empty() ? 1.0 : scale[l]) * gauge.u[l];
        acc += v * (p(lk.j, lk.i) - p(lk.i, lk.j));
    }
    return acc;
}
}  // namespace detail

// gradient of a trace-linear functional: given P_i = S_i * Y * L_i for the
// functional Tr[Y dU], fills grad[3i + axis]
inline void accumulate_circuit_gradient(const LatticeGraph& g, const GaugeConfig& gauge,
                                        const CircuitAngles& a, const std::vector<double>& scale,
                                        const CircuitWork& w, const Mat& y,
                                        std::vector<double>& grad, double factor) {
    for (int i = 0; i < a.depth; ++i) {
        Mat p = w.suffix[i + 1] * y * w.prefix[i + 1];
        grad[3 * i + 0] += factor * detail::trace_with_generator(p, g, gauge, LinkType::X, scale);
        // conjugate into the frame past the X layer for the Y angle, then past Y for Z
        Mat q = p;
        layer_rotate_left(q, g, gauge, LinkType::X, -a.theta[i][0], scale);
        layer_rotate_right(q, g, gauge, LinkType::X, -a.theta[i][0], scale);
        grad[3 * i + 1] += factor * detail::trace_with_generator(q, g, gauge, LinkType::Y, scale);
        layer_rotate_left(q, g, gauge, LinkType::Y, -a.theta[i][1], scale);
        layer_rotate_right(q, g, gauge, LinkType::Y, -a.theta[i][1], scale);
        grad[3 * i + 2] += factor * detail::trace_with_generator(q, g, gauge, LinkType::Z, scale);
    }
}

// Q_H = || U({theta}) - exp(A tau) ||_F^2
inline double cost_heff(const LatticeGraph& g, const GaugeConfig& gauge, const CircuitAngles& a,
                        const Mat& target, const std::vector<double>& scale = {}) {
    Mat u = circuit_matrix(g, gauge, a, scale);
    return (u - target).squaredNorm();
}

inline double cost_grad_heff(const LatticeGraph& g, const GaugeConfig& gauge,
                             const CircuitAngles& a, const Mat& target,
                             std::vector<double>& grad, const std::vector<double>& scale = {}) {
    CircuitWork w = circuit_work(g, gauge, a, scale);
    Mat diff = w.u - target;
    grad.assign(a.count(), 0.0);
    // dQ = 2 Tr[diff^T dU]; Y = diff^T
    Mat y = diff.transpose();
    accumulate_circuit_gradient(g, gauge, a, scale, w, y, grad, 2.0);
    return diff.squaredNorm();
}

// Q_VSP = -|<fin | U | ini>|^2 via the Pfaffian overlap of covariance matrices
inline double cost_vsp(const LatticeGraph& g, const GaugeConfig& gauge, const CircuitAngles& a,
                       const Mat& gamma_ini, const Mat& gamma_fin,
                       const std::vector<double>& scale = {}) {
    Mat u = circuit_matrix(g, gauge, a, scale);
    Mat gth = skew_part(u * gamma_ini * u.transpose());
    return -overlap_detail(gth, gamma_fin).raw;
}

inline double cost_grad_vsp(const LatticeGraph& g, const GaugeConfig& gauge, const CircuitAngles& a,
                            const Mat& gamma_ini, const Mat& gamma_fin, std::vector<double>& grad,
                            const std::vector<double>& scale = {}) {
    CircuitWork w = circuit_work(g, gauge, a, scale);
    Mat gth = skew_part(w.u * gamma_ini * w.u.transpose());
    double ov = overlap_detail(gth, gamma_fin).raw;
    Mat sum = gth + gamma_fin;
    Eigen::PartialPivLU<Mat> lu(sum);
    double rcond_proxy = std::abs(lu.determinant());
    if (!(rcond_proxy > 1e-250))
        throw std::runtime_error("grad_cost_vsp: Gamma_theta + Gamma_fin is singular (orthogonal states)");
    Mat winv = lu.inverse();
    grad.assign(a.count(), 0.0);
    // dQ = -ov * Tr[(gth+gfin)^{-1} dGth], dGth = dU Gi U^T + U Gi dU^T
    Mat y = gamma_ini * w.u.transpose() * winv;
    accumulate_circuit_gradient(g, gauge, a, scale, w, y, grad, -2.0 * ov * 0.5);
    return -ov;
}

struct OptimizerConfig {
    int max_iter = 2000;
    double tol_grad = 1e-9;
    double tol_step = 1e-14;
    double step0 = 0.5;
    double armijo = 1e-4;
    double backtrack = 0.5;
    double grow = 1.6;
    uint64_t seed = 1;
    double init_noise = 0.05;  // rad
};

struct OptimizeResult {
    CircuitAngles angles;
    std::vector<double> trace;  // accepted cost per iteration
    double cost = 0;
    double grad_norm = 0;
    int iterations = 0;
};

using CostGradFn = std::function<double(const std::vector<double>&, std::vector<double>&)>;

// plain gradient descent with Armijo backtracking; deterministic, keeps the
// best-seen point
inline OptimizeResult optimize_gd(const CostGradFn& f, std::vector<double> x,
                                  const OptimizerConfig& cfg) {
    OptimizeResult res;
    std::vector<double> g(x.size());
    double fx = f(x, g);
    if (!std::isfinite(fx)) throw std::runtime_error("optimize: non-finite initial cost");
    double step = cfg.step0;
    std::vector<double> best_x = x;
    double best_f = fx;
    res.trace.push_back(fx);
    int it = 0;
    for (; it < cfg.max_iter; ++it) {
        double gn2 = 0;
        for (double v : g) gn2 += v * v;
        res.grad_norm = std::sqrt(gn2);
        if (res.grad_norm < cfg.tol_grad) break;
        double eta = step;
        bool accepted = false;
        std::vector<double> xt(x.size()), gt(x.size());
        double ft = 0;
        while (eta * res.grad_norm > cfg.tol_step) {
            for (size_t k = 0; k < x.size(); ++k) xt[k] = x[k] - eta * g[k];
            ft = f(xt, gt);
            if (!std::isfinite(ft))
                throw std::runtime_error("optimize: non-finite cost during line search");
            if (ft <= fx - cfg.armijo * eta * gn2) {
                accepted = true;
                break;
            }
            eta *= cfg.backtrack;
        }
        if (!accepted) break;
        x.swap(xt);
        g.swap(gt);
        fx = ft;
        step = std::min(cfg.step0, eta * cfg.grow);
        res.trace.push_back(fx);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
    }
    res.iterations = it;
    res.cost = best_f;
    res.angles.depth = static_cast<int>(best_x.size() / 3);
    res.angles.theta.resize(res.angles.depth);
    for (int i = 0; i < res.angles.depth; ++i)
        res.angles.theta[i] = {best_x[3 * i], best_x[3 * i + 1], best_x[3 * i + 2]};
    return res;
}

inline std::vector<double> flatten(const CircuitAngles& a) {
    std::vector<double> x(a.count());
    for (int i = 0; i < a.depth; ++i)
        for (int k = 0; k < 3; ++k) x[3 * i + k] = a.theta[i][k];
    return x;
}

inline OptimizeResult optimize_heff(const LatticeGraph& g, const GaugeConfig& gauge,
                                    const Mat& a_target, double tau, const CircuitAngles& init,
                                    const OptimizerConfig& cfg,
                                    const std::vector<double>& scale = {}) {
    Mat target = expm_skew(a_target, tau);
    CostGradFn f = [&](const std::vector<double>& x, std::vector<double>& gr) {
        CircuitAngles a;
        a.depth = static_cast<int>(x.size() / 3);
        a.theta.resize(a.depth);
        for (int i = 0; i < a.depth; ++i) a.theta[i] = {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
        return cost_grad_heff(g, gauge, a, target, gr, scale);
    };
    return optimize_gd(f, flatten(init), cfg);
}

inline OptimizeResult optimize_vsp(const LatticeGraph& g, const GaugeConfig& gauge,
                                   const Mat& gamma_ini, const Mat& gamma_fin,
                                   const CircuitAngles& init, const OptimizerConfig& cfg,
                                   const std::vector<double>& scale = {}) {
    CostGradFn f = [&](const std::vector<double>& x, std::vector<double>& gr) {
        CircuitAngles a;
        a.depth = static_cast<int>(x.size() / 3);
        a.theta.resize(a.depth);
        for (int i = 0; i < a.depth; ++i) a.theta[i] = {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
        return cost_grad_vsp(g, gauge, a, gamma_ini, gamma_fin, gr, scale);
    };
    return optimize_gd(f, flatten(init), cfg);
}

// ---------------------------------------------------------------------------
// Recursive bootstrap: solve at (tau, D), duplicate, re-optimize at (2tau, 2D)
// ---------------------------------------------------------------------------

struct BootstrapStage {
    double tau;
    int depth;
    double cost;
};

struct BootstrapResult {
    CircuitAngles angles;
    std::vector<BootstrapStage> stages;
};

inline BootstrapResult recursive_bootstrap(const LatticeGraph& g, const GaugeConfig& gauge,
                                           double J, double base_tau, int base_depth,
                                           int n_doublings, double stage_threshold,
                                           const OptimizerConfig& cfg,
                                           const std::vector<double>& scale = {}) {
    std::mt19937_64 rng(cfg.seed);
    BootstrapResult out;
    double tau = base_tau;
    CircuitAngles cur =
        randomized_symmetric_init(base_depth, J * tau / base_depth, cfg.init_noise, rng);
    for (int stage = 0; stage <= n_doublings; ++stage) {
        Couplings cpl = Couplings::uniform(g, J, kappa_for_step(J, tau));
        if (!scale.empty()) cpl.bond_scale = scale;
        Mat a_target = assemble_hamiltonian(g, gauge, cpl);
        OptimizeResult r = optimize_heff(g, gauge, a_target, tau, cur, cfg, scale);
        out.stages.push_back({tau, r.angles.depth, r.cost});
        if (r.cost > stage_threshold) {
            throw std::runtime_error("recursive_bootstrap: stage " + std::to_string(stage) +
                                     " failed to reach threshold (cost " + std::to_string(r.cost) + ")");
        }
        cur = r.angles;
        if (stage < n_doublings) {
            CircuitAngles doubled = CircuitAngles::zeros(2 * cur.depth);
            for (int i = 0; i < cur.depth; ++i) {
                doubled.theta[i] = cur.theta[i];
                doubled.theta[cur.depth + i] = cur.theta[i];
            }
            cur = doubled;
            tau *= 2.0;
        }
    }
    out.angles = cur;
    return out;
}

// ---------------------------------------------------------------------------
// Depth scan for variational state preparation and the scaling fit
// ---------------------------------------------------------------------------

struct VspScanPoint {
    int L;
    int depth;
    double infidelity;  // 1 - F, clamped below at 1e-12
    double cost;
};

struct VspScalingFit {
    double A = 0;       // amplitude
    double alpha = 0;   // size exponent
    double D0 = 0;      // depth offset
    std::vector<std::pair<int, LineFit>> per_size;  // (L, fit of log(1-F) vs D)
};

struct VspScanResult {
    std::vector<VspScanPoint> points;
    VspScalingFit fit;
};

inline Couplings couplings_z_only(const LatticeGraph& g, double J) {
    Couplings c = Couplings::uniform(g, J, 0.0);
    for (size_t l = 0; l < g.links.size(); ++l)
        if (g.links[l].type != LinkType::Z) c.bond_scale[l] = 0.0;
    return c;
}

inline VspScalingFit fit_vsp_scaling(const std::vector<VspScanPoint>& pts) {
    VspScalingFit fit;
    std::vector<int> sizes;
    for (const auto& p : pts)
        if (sizes.empty() || sizes.back() != p.L) sizes.push_back(p.L);
    std::vector<double> logL, logSlope;
    double d0_acc = 0;
    for (int L : sizes) {
        std::vector<double> d, lf;
        for (const auto& p : pts)
            if (p.L == L && p.infidelity > 1e-11) {
                d.push_back(p.depth);
                lf.push_back(std::log(p.infidelity));
            }
        if (d.size() < 2) continue;
        LineFit f = fit_line(d, lf);
        fit.per_size.emplace_back(L, f);
        if (f.slope < 0) {
            logL.push_back(std::log(static_cast<double>(L)));
            logSlope.push_back(std::log(-f.slope));
            d0_acc += -f.intercept / f.slope;
        }
    }
    if (logL.size() >= 2) {
        LineFit cross = fit_line(logL, logSlope);
        fit.alpha = -cross.slope;
        fit.A = std::exp(cross.intercept);
        fit.D0 = d0_acc / logL.size();
    }
    return fit;
}

// scan (L, D) grid; warm-starts each depth from the previous solution
inline VspScanResult vsp_depth_scan(const std::vector<int>& sizes, const std::vector<int>& depths,
                                    double J, double kappa, const OptimizerConfig& cfg) {
    VspScanResult out;
    for (int L : sizes) {
        LatticeGraph g = build_lattice(L, L, Boundary::torus);
        GaugeConfig gauge = GaugeConfig::vortex_free(g);
        Mat a_ini = assemble_hamiltonian(g, gauge, couplings_z_only(g, J));
        Mat a_fin = assemble_hamiltonian(g, gauge, Couplings::uniform(g, J, kappa));
        Mat gamma_ini = ground_state(a_ini).gamma;
        Mat gamma_fin = ground_state(a_fin).gamma;
        std::mt19937_64 rng(cfg.seed + L);
        CircuitAngles warm;
        for (int D : depths) {
            CircuitAngles init;
            if (warm.depth == 0) {
                init = randomized_symmetric_init(D, 0.25 / 1.0, cfg.init_noise, rng);
            } else {
                init = CircuitAngles::zeros(D);
                for (int i = 0; i < D; ++i)
                    init.theta[i] = i < warm.depth ? warm.theta[i]
                                                   : std::array<double, 3>{
                                                         0.01 * (2 * rng_uniform(rng) - 1),
                                                         0.01 * (2 * rng_uniform(rng) - 1),
                                                         0.01 * (2 * rng_uniform(rng) - 1)};
            }
            OptimizeResult r = optimize_vsp(g, gauge, gamma_ini, gamma_fin, init, cfg);
            warm = r.angles;
            VspScanPoint p;
            p.L = L;
            p.depth = D;
            p.cost = r.cost;
            p.infidelity = std::max(1e-12, 1.0 + r.cost);  // cost = -F
            out.points.push_back(p);
        }
    }
    out.fit = fit_vsp_scaling(out.points);
    return out;
}

}  // namespace floq
