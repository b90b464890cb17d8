#pragma once

// Three-atom Rydberg pulse sequences under perfect blockade, and the numeric
// search for pulse parameters realizing the G3(theta) = exp(i theta ZZZ)
// gate family.
//
// Basis: product states over {0, 1, r} per atom with at most one atom in r
// (20 states). Energy unit Omega = 1; a pulse R(Delta, tau, phi) is
// exp(-i H tau), so the two-atom closure condition reads
// tau = 2*pi / sqrt(2 + Delta^2).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace floq {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

class BlockadeBasis {
public:
    int n_atoms;
    std::vector<std::array<int, 3>> states;  // 0, 1, 2=r per atom
    std::unordered_map<int, int> index;      // base-3 code -> basis index

    explicit BlockadeBasis(int atoms = 3) : n_atoms(atoms) {
        if (atoms != 2 && atoms != 3) throw std::invalid_argument("BlockadeBasis: 2 or 3 atoms");
        int total = 1;
        for (int a = 0; a < atoms; ++a) total *= 3;
        for (int code = 0; code < total; ++code) {
            std::array<int, 3> s{0, 0, 0};
            int c = code, nr = 0;
            for (int a = 0; a < atoms; ++a) {
                s[a] = c % 3;
                c /= 3;
                nr += s[a] == 2;
            }
            if (nr <= 1) {
                index[code] = static_cast<int>(states.size());
                states.push_back(s);
            }
        }
    }
    int dim() const { return static_cast<int>(states.size()); }
    int code(const std::array<int, 3>& s) const {
        int c = 0, m = 1;
        for (int a = 0; a < n_atoms; ++a) {
            c += s[a] * m;
            m *= 3;
        }
        return c;
    }
};

// H = sum_a [ e^{i phi}/2 |r><1|_a + h.c. ] - Delta sum_a |r><r|_a, blockaded
inline CMat pulse_hamiltonian(const BlockadeBasis& b, double delta, double phi) {
    CMat h = CMat::Zero(b.dim(), b.dim());
    const std::complex<double> up = 0.5 * std::polar(1.0, phi);
    for (int k = 0; k < b.dim(); ++k) {
        int nr = 0;
        for (int a = 0; a < b.n_atoms; ++a) nr += b.states[k][a] == 2;
        h(k, k) = -delta * static_cast<double>(nr);
        for (int a = 0; a < b.n_atoms; ++a) {
            if (b.states[k][a] != 1) continue;
            auto s = b.states[k];
            s[a] = 2;
            auto it = b.index.find(b.code(s));
            if (it == b.index.end()) continue;  // blockaded
            h(it->second, k) += up;
            h(k, it->second) += std::conj(up);
        }
    }
    return h;
}

inline CMat pulse_unitary(const BlockadeBasis& b, double delta, double tau, double phi) {
    CMat h = pulse_hamiltonian(b, delta, phi);
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    CVec ph = (-std::complex<double>(0, 1) * tau * es.eigenvalues().array()).exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

struct PulseParams {
    double delta1 = 0, delta2 = 0;
    double tau1 = 0, tau2 = 0;
    double phi = 0;
};

// G3 = R(D1, t1, 2 phi) R(D2, 2 t2, phi) R(D1, t1, 0)
inline CMat compose_g3(const BlockadeBasis& b, const PulseParams& p) {
    if (p.tau1 < 0 || p.tau2 < 0) throw std::invalid_argument("compose_g3: negative duration");
    return pulse_unitary(b, p.delta1, p.tau1, 2 * p.phi) *
           pulse_unitary(b, p.delta2, 2 * p.tau2, p.phi) *
           pulse_unitary(b, p.delta1, p.tau1, 0.0);
}

// --------------------------------------------------------------------------
// Nelder-Mead simplex (deterministic)
// --------------------------------------------------------------------------

struct SimplexResult {
    Eigen::VectorXd x;
    double value = 0;
    int evals = 0;
};

inline SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd x0, double scale, int max_evals = 4000,
                                 double ftol = 1e-14) {
    const int n = static_cast<int>(x0.size());
    std::vector<Eigen::VectorXd> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    int evals = 0;
    for (int k = 1; k <= n; ++k) xs[k](k - 1) += scale;
    for (int k = 0; k <= n; ++k) {
        fs[k] = f(xs[k]);
        ++evals;
    }
    auto order = [&] {
        std::vector<int> idx(n + 1);
        for (int k = 0; k <= n; ++k) idx[k] = k;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        std::vector<Eigen::VectorXd> x2(n + 1);
        std::vector<double> f2(n + 1);
        for (int k = 0; k <= n; ++k) {
            x2[k] = xs[idx[k]];
            f2[k] = fs[idx[k]];
        }
        xs.swap(x2);
        fs.swap(f2);
    };
    order();
    while (evals < max_evals && std::abs(fs[n] - fs[0]) > ftol * (std::abs(fs[0]) + 1e-30)) {
        Eigen::VectorXd cen = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < n; ++k) cen += xs[k];
        cen /= n;
        Eigen::VectorXd xr = cen + (cen - xs[n]);
        double fr = f(xr);
        ++evals;
        if (fr < fs[0]) {
            Eigen::VectorXd xe = cen + 2.0 * (cen - xs[n]);
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            Eigen::VectorXd xc = cen + 0.5 * (xs[n] - cen);
            double fc = f(xc);
            ++evals;
            if (fc < fs[n]) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (int k = 1; k <= n; ++k) {
                    xs[k] = xs[0] + 0.5 * (xs[k] - xs[0]);
                    fs[k] = f(xs[k]);
                    ++evals;
                }
            }
        }
        order();
    }
    return {xs[0], fs[0], evals};
}

// --------------------------------------------------------------------------
// Gate fidelity against exp(i theta ZZZ) with free single-atom Z frames
// --------------------------------------------------------------------------

struct GateFidelity {
    double fidelity = 0;
    double leakage = 0;
};

inline GateFidelity gate_fidelity(const BlockadeBasis& b, const CMat& u, double theta) {
    const int d = 1 << b.n_atoms;
    // qubit block: basis states with no Rydberg component, ordered by bits
    std::vector<int> qibs(d);
    for (int q = 0; q < d; ++q) {
        std::array<int, 3> s{0, 0, 0};
        for (int a = 0; a < b.n_atoms; ++a) s[a] = (q >> a) & 1;
        qibs[q] = b.index.at(b.code(s));
    }
    CMat m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m(r, c) = u(qibs[r], qibs[c]);
    double trace_mm = (m.adjoint() * m).trace().real();

    // w_q = conj(T_qq) M_qq; maximize |sum_q w_q e^{i sum_a alpha_a z_a(q)}|
    std::vector<std::complex<double>> w(d);
    for (int q = 0; q < d; ++q) {
        double z = (__builtin_popcount(static_cast<unsigned>(q)) % 2 == 0) ? 1.0 : -1.0;
        w[q] = std::conj(std::polar(1.0, theta * z)) * m(q, q);
    }
    auto neg_overlap = [&](const Eigen::VectorXd& al) {
        std::complex<double> acc = 0;
        for (int q = 0; q < d; ++q) {
            double ph = 0;
            for (int a = 0; a < b.n_atoms; ++a) ph += al(a) * (((q >> a) & 1) ? -1.0 : 1.0);
            acc += w[q] * std::polar(1.0, ph);
        }
        return -std::abs(acc);
    };
    // linear phase fit as the simplex seed
    Eigen::VectorXd a0 = Eigen::VectorXd::Zero(b.n_atoms);
    for (int a = 0; a < b.n_atoms; ++a) {
        std::complex<double> acc = 0;
        for (int q = 0; q < d; ++q) {
            int partner = q ^ (1 << a);
            if (q < partner) acc += w[partner] * std::conj(w[q]);
        }
        a0(a) = -0.5 * std::arg(acc);
    }
    SimplexResult best = nelder_mead(neg_overlap, a0, 0.3, 800);
    for (double s : {-1.0, 1.0}) {
        SimplexResult alt = nelder_mead(neg_overlap, Eigen::VectorXd::Constant(b.n_atoms, s), 0.5, 800);
        if (alt.value < best.value) best = alt;
    }
    double tr = -best.value;
    GateFidelity out;
    out.fidelity = (trace_mm + tr * tr) / (d * (d + 1));
    out.leakage = 1.0 - trace_mm / d;
    return out;
}

// --------------------------------------------------------------------------
// Pulse search
// --------------------------------------------------------------------------

struct PulseSolution {
    PulseParams params;
    double infidelity = 1;
    double leakage = 1;
};

inline PulseSolution evaluate_pulse(const BlockadeBasis& b, const PulseParams& p, double theta) {
    CMat u = compose_g3(b, p);
    GateFidelity gf = gate_fidelity(b, u, theta);
    return {p, 1.0 - gf.fidelity, gf.leakage};
}

inline PulseSolution refine_pulse(const BlockadeBasis& b, const PulseParams& seed, double theta,
                                  int max_evals = 6000) {
    auto pack = [](const PulseParams& p) {
        Eigen::VectorXd x(5);
        x << p.delta1, p.delta2, p.tau1, p.tau2, p.phi;
        return x;
    };
    auto unpack = [](const Eigen::VectorXd& x) {
        PulseParams p;
        p.delta1 = x(0);
        p.delta2 = x(1);
        p.tau1 = std::abs(x(2));
        p.tau2 = std::abs(x(3));
        p.phi = x(4);
        return p;
    };
    auto cost = [&](const Eigen::VectorXd& x) {
        return evaluate_pulse(b, unpack(x), theta).infidelity;
    };
    SimplexResult r = nelder_mead(cost, pack(seed), 0.08, max_evals);
    // a second pass with a tighter simplex polishes into the 1e-8 regime
    r = nelder_mead(cost, r.x, 0.002, max_evals / 2);
    return evaluate_pulse(b, unpack(r.x), theta);
}

// multi-seed search at a single theta
inline PulseSolution find_pulse(const BlockadeBasis& b, double theta, uint64_t rng_seed = 7,
                                int n_seeds = 12, const PulseParams* warm = nullptr) {
    if (theta <= 0 || theta > M_PI / 4 + 1e-12)
        throw std::invalid_argument("find_pulse: theta in (0, pi/4]");
    std::mt19937_64 rng(rng_seed);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };
    PulseSolution best;
    if (warm) best = refine_pulse(b, *warm, theta);
    for (int s = 0; s < n_seeds && best.infidelity > 1e-8; ++s) {
        PulseParams p;
        p.delta1 = uni(-1.5, 1.5);
        p.delta2 = uni(-1.5, 1.5);
        p.tau1 = uni(0.5, 1.6);
        p.tau2 = uni(0.5, 1.6);
        p.phi = uni(-M_PI, M_PI);
        PulseSolution cand = refine_pulse(b, p, theta);
        if (cand.infidelity < best.infidelity) best = cand;
    }
    return best;
}

}  // namespace floq
