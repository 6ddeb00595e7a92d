#include "cbjj/spectral.hpp"
#include "cbjj/constants.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cbjj {

namespace {

double inf_norm(const SparseCd& m) {
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseCd::InnerIterator it(m, k); it; ++it) rowsum[it.row()] += std::abs(it.value());
    return rowsum.maxCoeff();
}

double gershgorin_min(const SparseCd& m) {
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseCd::InnerIterator it(m, k); it; ++it) {
            if (it.row() == it.col())
                lo[it.row()] += it.value().real();
            else
                lo[it.row()] -= std::abs(it.value());
        }
    return lo.minCoeff();
}

// Deterministic start vector (xorshift), independent of any global RNG state.
Eigen::VectorXcd seed_vector(Eigen::Index n) {
    Eigen::VectorXcd v(n);
    uint64_t s = 0x9e3779b97f4a7c15ull;
    auto next = [&s]() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return static_cast<double>(s % 1000003ull) / 1000003.0 - 0.5;
    };
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(next(), next());
    v.normalize();
    return v;
}

std::vector<EigenPair> dense_lowest(const SparseCd& h, int n_states) {
    Eigen::MatrixXcd dense(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolve: dense diagonalization failed");
    const int m = std::min<int>(n_states, static_cast<int>(h.rows()));
    std::vector<EigenPair> out(m);
    for (int i = 0; i < m; ++i) {
        out[i].energy = es.eigenvalues()[i];
        out[i].state = es.eigenvectors().col(i);
    }
    return out;
}

struct LanczosResult {
    std::vector<double> evals;
    Eigen::MatrixXcd vecs;
    int iterations = 0;
};

// Shift-invert Lanczos with full reorthogonalization. Finds the n_states
// lowest eigenvalues of H (largest of (H - sigma)^-1).
LanczosResult shift_invert_lanczos(const SparseCd& h, int n_states, double sigma,
                                   int max_iter, double h_norm, double residual_tol) {
    const Eigen::Index n = h.rows();
    SparseCd shifted = h;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    shifted.makeCompressed();

    Eigen::SparseLU<SparseCd> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("eigensolve: sparse LU of shifted matrix failed");

    Eigen::MatrixXcd V(n, max_iter + 1);
    std::vector<double> alpha, beta;
    alpha.reserve(max_iter);
    beta.reserve(max_iter);

    V.col(0) = seed_vector(n);
    Eigen::VectorXcd w(n);

    auto full_reorth = [&](Eigen::VectorXcd& vec, int upto) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j <= upto; ++j) {
                const cplx c = V.col(j).dot(vec);
                vec -= c * V.col(j);
            }
        }
    };

    int m = 0;
    for (int k = 0; k < max_iter; ++k) {
        w = lu.solve(V.col(k));
        const double a = V.col(k).dot(w).real();
        alpha.push_back(a);
        w -= a * V.col(k);
        if (k > 0) w -= beta[k - 1] * V.col(k - 1);
        full_reorth(w, k);
        const double b = w.norm();
        m = k + 1;
        if (b < 1e-14) break; // invariant subspace exhausted
        beta.push_back(b);
        V.col(k + 1) = w / b;

        // periodically test convergence of the wanted Ritz pairs
        if (m >= std::max(2 * n_states, 30) && (m % 10 == 0 || m == max_iter)) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(T);
            // largest nu eigenvalues correspond to lowest H eigenvalues
            bool ok = m > n_states;
            for (int i = 0; ok && i < n_states; ++i) {
                const int idx = m - 1 - i;
                const double resid = std::abs(beta[m - 1] * tes.eigenvectors()(m - 1, idx));
                const double nu = tes.eigenvalues()[idx];
                // residual on H scale: ||H v - E v|| ~ |resid| * ||H - sigma|| / |nu|
                if (resid * (h_norm + std::abs(sigma)) / std::max(std::abs(nu), 1e-300) >
                    0.1 * residual_tol * h_norm)
                    ok = false;
            }
            if (ok) break;
        }
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(T);

    const int found = std::min(n_states, m);
    LanczosResult res;
    res.iterations = m;
    res.vecs.resize(n, found);
    res.evals.resize(found);
    for (int i = 0; i < found; ++i) {
        const int idx = m - 1 - i; // descending nu = ascending E
        const double nu = tes.eigenvalues()[idx];
        res.evals[i] = sigma + 1.0 / nu;
        res.vecs.col(i) = V.leftCols(m) * tes.eigenvectors().col(idx);
        res.vecs.col(i).normalize();
    }
    return res;
}

} // namespace

static std::vector<EigenPair> eigensolve_dense_path(const OperatorMatrix& H, int n_states,
                                                    const ProductBasis& basis);

std::vector<EigenPair> eigensolve(const OperatorMatrix& H, int n_states,
                                  const ProductBasis& basis, const EigensolveOptions& opts) {
    if (!H.hermitian) throw std::invalid_argument("eigensolve: operator must be Hermitian");
    if (n_states < 1) throw std::invalid_argument("eigensolve: n_states must be >= 1");
    const Eigen::Index dim = H.dim();
    n_states = std::min<int>(n_states, static_cast<int>(dim));

    const double h_norm = inf_norm(H.mat);
    std::vector<EigenPair> pairs;

    if (dim <= opts.dense_threshold) {
        pairs = dense_lowest(H.mat, n_states);
    } else {
        const double sigma = opts.sigma ? *opts.sigma : gershgorin_min(H.mat) - 1.0;
        const int max_iter =
            opts.max_lanczos > 0
                ? opts.max_lanczos
                : std::min<int>(static_cast<int>(dim), std::max(600, 8 * n_states));
        LanczosResult lr;
        try {
            lr = shift_invert_lanczos(H.mat, n_states, sigma, max_iter, h_norm,
                                      opts.residual_tol);
        } catch (const std::exception&) {
            if (dim < 4096) return eigensolve_dense_path(H, n_states, basis);
            throw;
        }
        // verify true residuals; fall back or report with diagnostics
        bool converged = static_cast<int>(lr.evals.size()) >= n_states;
        double worst = 0.0;
        if (converged) {
            for (int i = 0; i < n_states; ++i) {
                const double r =
                    (H.mat * lr.vecs.col(i) - lr.evals[i] * lr.vecs.col(i)).norm();
                worst = std::max(worst, r);
                if (r > opts.residual_tol * h_norm) converged = false;
            }
        }
        if (!converged) {
            if (dim < 4096) {
                pairs = dense_lowest(H.mat, n_states);
            } else {
                std::ostringstream msg;
                msg << "eigensolve: Lanczos did not converge (" << lr.iterations
                    << " iterations, worst residual " << worst << ", bound "
                    << opts.residual_tol * h_norm << ")";
                throw std::runtime_error(msg.str());
            }
        } else {
            pairs.resize(n_states);
            for (int i = 0; i < n_states; ++i) {
                pairs[i].energy = lr.evals[i];
                pairs[i].state = lr.vecs.col(i);
            }
        }
    }

    for (auto& p : pairs) {
        p.moments = field_moments(p.state, basis);
        p.mean_photon = p.moments.n_mean;
    }
    return pairs;
}

// out-of-line helper so the catch block above can reuse the dense path
static std::vector<EigenPair> eigensolve_dense_path(const OperatorMatrix& H, int n_states,
                                                    const ProductBasis& basis) {
    std::vector<EigenPair> pairs = dense_lowest(H.mat, n_states);
    for (auto& p : pairs) {
        p.moments = field_moments(p.state, basis);
        p.mean_photon = p.moments.n_mean;
    }
    return pairs;
}

std::vector<double> phase_distribution(const Eigen::VectorXcd& state, const ProductBasis& basis) {
    std::vector<double> p(basis.n_phi, 0.0);
    for (int k = 0; k < basis.n_phi; ++k) {
        double s = 0.0;
        for (int f = 0; f < basis.n_fock; ++f) s += std::norm(state[k * basis.n_fock + f]);
        p[k] = s / basis.d_phi;
    }
    return p;
}

FieldMoments field_moments(const Eigen::VectorXcd& state, const ProductBasis& basis) {
    FieldMoments m;
    const int nf = basis.n_fock;
    // diagonal moments
    for (int k = 0; k < basis.n_phi; ++k)
        for (int f = 0; f < nf; ++f) {
            const double w = std::norm(state[k * nf + f]);
            m.n_mean += w * f;
            m.n2_mean += w * f * (f - 1.0);
        }
    // <i(a - a+)> couples f, f+1: i(a - a+)_{f,f+1} = i sqrt(f+1),
    // contribution 2 Re(conj(c_f) * i sqrt(f+1) * c_{f+1})
    for (int k = 0; k < basis.n_phi; ++k)
        for (int f = 0; f + 1 < nf; ++f) {
            const cplx c0 = state[k * nf + f];
            const cplx c1 = state[k * nf + f + 1];
            m.w_mean += 2.0 * (std::conj(c0) * cplx(0.0, std::sqrt(f + 1.0)) * c1).real();
        }
    return m;
}

namespace {

struct BarrierInfo {
    int index = -1;       // grid index of dressed barrier maximum
    double top = 0;       // U_eff at the maximum
    bool exists = false;
};

BarrierInfo dressed_barrier(const ScaledCoefficients& coeffs, const FieldMoments& m,
                            const ProductBasis& basis, const std::vector<double>& grid) {
    const std::vector<double> ueff = effective_potential(coeffs, m, grid);
    // walk from the bare well position to the dressed local minimum, then on
    // to the local maximum (dressed barrier top)
    int i = basis.index_of(coeffs.phi_j);
    const int n = basis.n_phi;
    while (i + 1 < n && ueff[i + 1] < ueff[i]) ++i;
    while (i - 1 >= 0 && ueff[i - 1] < ueff[i]) --i;
    int b = i;
    while (b + 1 < n && ueff[b + 1] > ueff[b]) ++b;
    BarrierInfo info;
    if (b > i && b + 1 < n) {
        info.index = b;
        info.top = ueff[b];
        info.exists = true;
    }
    return info;
}

} // namespace

void classify_bound(std::vector<EigenPair>& pairs, const ScaledCoefficients& coeffs,
                    const ProductBasis& basis, double weight_threshold) {
    const std::vector<double> grid = basis.grid();
    for (auto& p : pairs) {
        const BarrierInfo bar = dressed_barrier(coeffs, p.moments, basis, grid);
        if (!bar.exists) {
            p.bound = false;
            p.in_well_weight = 0.0;
            p.barrier_top = 0.0;
            continue;
        }
        double weight = 0.0;
        for (int k = 0; k <= bar.index; ++k)
            for (int f = 0; f < basis.n_fock; ++f)
                weight += std::norm(p.state[k * basis.n_fock + f]);
        p.in_well_weight = weight;
        p.barrier_top = bar.top;
        p.bound = (weight >= weight_threshold) && (p.energy <= bar.top);
    }
}

CouplingResult coupling_weights(const ModeSolution& mode, const CircuitParams& params,
                                double omega_out_si) {
    CouplingResult r;
    r.omega_out = omega_out_si;
    const double det2 = 2.0 * (mode.C_c * mode.C_c - mode.C_E * mode.C_0);
    r.alpha = params.C_out * std::sqrt(hbar_SI * r.omega_out * r.omega_out * params.Z_out / 2.0);
    r.beta1 = two_e_SI * (mode.C_E - mode.C_c) / det2;
    r.beta2 = std::sqrt(hbar_SI / (2.0 * mode.L_E * mode.omega)) * (mode.C_0 - mode.C_c) / det2;
    return r;
}

CouplingResult external_coupling(const ModeSolution& mode, const CircuitParams& params,
                                 const std::vector<EigenPair>& pairs, const ProductBasis& basis,
                                 std::optional<double> omega_out_si) {
    std::vector<const EigenPair*> bound;
    for (const auto& p : pairs)
        if (p.bound) bound.push_back(&p);
    if (bound.size() < 2)
        throw std::runtime_error("external_coupling: need at least two bound states");
    std::sort(bound.begin(), bound.end(),
              [](const EigenPair* a, const EigenPair* b) { return a->energy < b->energy; });

    const EigenPair& s0 = *bound[0];
    const EigenPair& s1 = *bound[1];

    CouplingResult r = coupling_weights(
        mode, params, omega_out_si ? *omega_out_si : to_si_rate(s1.energy - s0.energy));

    // matrix elements of q_phi (x) Id and Id (x) (a+a+)
    const int nf = basis.n_fock;
    const int n = basis.n_phi;
    const double h = basis.d_phi;
    cplx me_q(0, 0), me_x(0, 0);
    constexpr double st[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};
    for (int k = 0; k < n; ++k) {
        for (int f = 0; f < nf; ++f) {
            const cplx c0 = std::conj(s0.state[k * nf + f]);
            // q_phi: -i * first derivative across the phi index
            cplx d(0, 0);
            for (int off = -2; off <= 2; ++off) {
                const int kk = k + off;
                if (kk < 0 || kk >= n || st[off + 2] == 0.0) continue;
                d += st[off + 2] / h * s1.state[kk * nf + f];
            }
            me_q += c0 * cplx(0.0, -1.0) * d;
            // a + a+
            if (f + 1 < nf)
                me_x += c0 * std::sqrt(f + 1.0) * s1.state[k * nf + f + 1];
            if (f - 1 >= 0)
                me_x += c0 * std::sqrt(static_cast<double>(f)) * s1.state[k * nf + f - 1];
        }
    }
    r.me_q = me_q;
    r.me_x = me_x;
    r.Omega = std::abs(r.alpha * (r.beta1 * me_q + r.beta2 * me_x)) / hbar_SI;
    return r;
}

ValidityResult single_mode_validity(const DerivedCircuit& derived, double I,
                                    const ProductBasis& basis, int n_states) {
    // mode a (j = 0) on the requested basis
    const ModeSolution mode_a = solve_mode(derived, I, 0);
    const ScaledCoefficients ca = to_internal(coefficients(mode_a, derived, I));
    OperatorMatrix ha = assemble_hamiltonian(ca, basis);
    auto pa = eigensolve(ha, n_states, basis);
    classify_bound(pa, ca, basis);
    std::vector<const EigenPair*> ba;
    for (const auto& p : pa)
        if (p.bound) ba.push_back(&p);
    if (ba.size() < 2)
        throw std::runtime_error("single_mode_validity: mode-a system has fewer than 2 bound states");

    // mode b (j = 1), same grid
    const ModeSolution mode_b = solve_mode(derived, I, 1);
    const ScaledCoefficients cb = to_internal(coefficients(mode_b, derived, I));
    OperatorMatrix hb = assemble_hamiltonian(cb, basis);
    auto pb = eigensolve(hb, n_states, basis);
    classify_bound(pb, cb, basis);
    const EigenPair* b_ground = nullptr;
    for (const auto& p : pb)
        if (p.bound) {
            b_ground = &p;
            break;
        }
    if (!b_ground)
        throw std::runtime_error("single_mode_validity: mode-b system has no bound state");

    // The excited ansatz state carries one quantum of mode b: pick the
    // eigenstate with the largest overlap with b+ applied to the mode-b
    // ground state.  (The literal second-lowest state is the same junction
    // excitation as Psi_1, nearly degenerate with it by construction.)
    const int nfb = basis.n_fock;
    Eigen::VectorXcd target = Eigen::VectorXcd::Zero(basis.dim());
    for (int k = 0; k < basis.n_phi; ++k)
        for (int f = 0; f + 1 < nfb; ++f)
            target[k * nfb + f + 1] = std::sqrt(f + 1.0) * b_ground->state[k * nfb + f];
    target.normalize();
    const EigenPair* b_photon = nullptr;
    double best_overlap = 0.0;
    for (const auto& p : pb) {
        if (p.in_well_weight < 0.5) continue;
        const double ov = std::abs(p.state.dot(target));
        if (ov > best_overlap) {
            best_overlap = ov;
            b_photon = &p;
        }
    }
    if (!b_photon)
        throw std::runtime_error("single_mode_validity: no single-photon mode-b state found");

    // bare junction ground state: same junction sector, single Fock level
    ProductBasis basis1(basis.n_phi, 1, basis.phi_min, basis.phi_max);
    OperatorMatrix hj = assemble_hamiltonian(ca, basis1);
    auto pj = eigensolve(hj, 32, basis1);
    classify_bound(pj, ca, basis1);
    const EigenPair* jj0 = nullptr;
    for (const auto& p : pj)
        if (p.bound) {
            jj0 = &p;
            break;
        }
    if (!jj0) throw std::runtime_error("single_mode_validity: no bound bare-junction state");

    const int nf = basis.n_fock;
    auto embed_vacuum = [&](const Eigen::VectorXcd& phi_profile) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis.dim());
        for (int k = 0; k < basis.n_phi; ++k) v[k * nf + 0] = phi_profile[k];
        return v;
    };

    // vacuum-of-a slice of Psi_1^a, as a phi profile
    Eigen::VectorXcd slice_a1(basis.n_phi), slice_jj(basis.n_phi);
    for (int k = 0; k < basis.n_phi; ++k) {
        slice_a1[k] = ba[1]->state[k * nf + 0];
        slice_jj[k] = jj0->state[k]; // basis1 has n_fock = 1
    }

    const Eigen::VectorXcd psi1_emb = embed_vacuum(slice_a1);
    const Eigen::VectorXcd psi0_emb = embed_vacuum(slice_jj);
    const Eigen::VectorXcd& tilde1 = b_photon->state;

    // only the mode-b coupling terms enter g, not the shared junction part
    const OperatorMatrix hbjj = assemble_mode_coupling(cb, basis);
    const cplx g1 = tilde1.dot(hbjj.mat * psi1_emb);
    const cplx g0 = tilde1.dot(hbjj.mat * psi0_emb);

    ValidityResult v;
    v.g_1a1b = std::abs(g1);
    v.g_01b = std::abs(g0);
    v.delta_1a1b = ba[1]->energy - b_photon->energy;
    v.delta_01b = ba[0]->energy - b_photon->energy;
    v.ratio_1a1b = v.g_1a1b / std::abs(v.delta_1a1b);
    v.ratio_01b = v.g_01b / std::abs(v.delta_01b);
    v.est_population = v.ratio_1a1b * v.ratio_1a1b;
    v.omega_b = mode_b.omega;
    return v;
}

} // namespace cbjj
