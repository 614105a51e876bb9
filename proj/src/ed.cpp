#include "lke/ed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace lke::ed {

namespace {

constexpr double kPi = 3.14159265358979323846;

int popcount(int b) { return std::popcount(static_cast<unsigned>(b)); }

// Parity of the Jordan-Wigner string below site l (1-based).
int string_sign(int b, int l) {
    int below = b & ((1 << (l - 1)) - 1);
    return (popcount(below) & 1) ? -1 : 1;
}

double sz_site_sum(int b, int N) { return popcount(b) - 0.5 * N; }

// Average over sites of S^z_l S^z_{l+m} in the bitstring b.
double czz_diag(int b, int N, int m) {
    double s = 0.0;
    for (int l = 0; l < N; ++l) {
        double a = (b >> l & 1) ? 0.5 : -0.5;
        double c = (b >> ((l + m) % N) & 1) ? 0.5 : -0.5;
        s += a * c;
    }
    return s / N;
}

void check_dense_size(int N, int limit, const char* what) {
    if (N > limit)
        throw std::invalid_argument(std::string(what) + ": N exceeds the dense-size guard");
}

// Diagonal of the long-range zz coupling for one bitstring.
double pert_diag(const Model& model, int b) {
    const int N = model.params.N;
    double s = 0.0;
    for (int m = 2; m <= N - 2; ++m) {
        double w = std::pow(static_cast<double>(std::min(m, N - m)), -model.params.alpha);
        double acc = 0.0;
        for (int l = 0; l < N; ++l) {
            double a = (b >> l & 1) ? 0.5 : -0.5;
            double c = (b >> ((l + m) % N) & 1) ? 0.5 : -0.5;
            acc += a * c;
        }
        s += w * acc;
    }
    return 0.5 * model.params.Jz * s;
}

struct EvenBlock {
    std::vector<int> states;
    std::vector<int> pos;  // bitstring -> block index, -1 outside
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
};

EvenBlock diagonalize_even_block(const Model& model) {
    EvenBlock blk;
    blk.states = parity_block_states(model.params.N, 0);
    blk.pos.assign(1 << model.params.N, -1);
    for (std::size_t i = 0; i < blk.states.size(); ++i)
        blk.pos[static_cast<std::size_t>(blk.states[i])] = static_cast<int>(i);
    Eigen::MatrixXd H = spin_hamiltonian_block(model, blk.states);
    blk.eig.compute(H);
    if (blk.eig.info() != Eigen::Success)
        throw std::runtime_error("ed: eigendecomposition failed");
    return blk;
}

}  // namespace

std::vector<int> parity_block_states(int N, int parity) {
    std::vector<int> out;
    out.reserve(1u << (N - 1));
    for (int b = 0; b < (1 << N); ++b)
        if ((popcount(b) & 1) == parity) out.push_back(b);
    return out;
}

Eigen::MatrixXd spin_hamiltonian_block(const Model& model, const std::vector<int>& states) {
    const int N = model.params.N;
    check_dense_size(N, 14, "spin_hamiltonian_block");
    std::vector<int> pos(1u << N, -1);
    for (std::size_t i = 0; i < states.size(); ++i) pos[static_cast<std::size_t>(states[i])] = static_cast<int>(i);
    const int dim = static_cast<int>(states.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        int b = states[static_cast<std::size_t>(i)];
        H(i, i) = model.params.h * sz_site_sum(b, N) + pert_diag(model, b);
        for (int l = 0; l < N; ++l) {
            int mask = (1 << l) | (1 << ((l + 1) % N));
            int j = pos[static_cast<std::size_t>(b ^ mask)];
            if (j >= 0) H(j, i) += 0.25 * model.params.Jx;
        }
    }
    return H;
}

Eigen::MatrixXd spin_hamiltonian_full(const Model& model) {
    const int N = model.params.N;
    check_dense_size(N, 12, "spin_hamiltonian_full");
    std::vector<int> all(1u << N);
    for (int b = 0; b < (1 << N); ++b) all[static_cast<std::size_t>(b)] = b;
    return spin_hamiltonian_block(model, all);
}

Eigen::VectorXcd apply_mu(int N, int l, bool dagger, const Eigen::VectorXcd& in) {
    const int dim = 1 << N;
    const int bit = 1 << (l - 1);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    for (int b = 0; b < dim; ++b) {
        if (in[b] == cd{0.0, 0.0}) continue;
        bool occupied = b & bit;
        if (dagger == occupied) continue;
        out[b ^ bit] += static_cast<double>(string_sign(b, l)) * in[b];
    }
    return out;
}

Eigen::VectorXcd apply_mu_tilde(const Model& model, int q, bool dagger, const Eigen::VectorXcd& in) {
    const int N = model.params.N;
    const double k = model.bog.k[static_cast<std::size_t>(q)];
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(in.size());
    const double norm = 1.0 / std::sqrt(static_cast<double>(N));
    for (int l = 1; l <= N; ++l) {
        cd phase = std::exp(cd{0.0, (dagger ? 1.0 : -1.0) * k * l}) * norm;
        out += phase * apply_mu(N, l, dagger, in);
    }
    return out;
}

Eigen::VectorXcd apply_eta(const Model& model, int q, bool dagger, const Eigen::VectorXcd& in) {
    const double u = model.bog.u[static_cast<std::size_t>(q)];
    const double v = model.bog.v[static_cast<std::size_t>(q)];
    const int nq = model.bog.neg(q);
    if (!dagger)
        return u * apply_mu_tilde(model, q, false, in) +
               cd{0.0, v} * apply_mu_tilde(model, nq, true, in);
    return u * apply_mu_tilde(model, q, true, in) -
           cd{0.0, v} * apply_mu_tilde(model, nq, false, in);
}

Eigen::VectorXcd apply_monomial(const Model& model, const MonoKey& key, const Eigen::VectorXcd& in) {
    Eigen::VectorXcd v = in;
    for (int i = key.na; i-- > 0;) v = apply_eta(model, key.annihilator(i), false, v);
    for (int i = key.nc; i-- > 0;) v = apply_eta(model, key.creator(i), true, v);
    return v;
}

Eigen::VectorXcd apply_polynomial(const Model& model, const Polynomial& op,
                                  const Eigen::VectorXcd& in) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(in.size());
    for (const auto& [key, coeff] : op) out += coeff * apply_monomial(model, key, in);
    return out;
}

cd expectation(const Model& model, const Polynomial& op, const Eigen::VectorXcd& state) {
    cd s{0.0, 0.0};
    for (const auto& [key, coeff] : op) s += coeff * state.dot(apply_monomial(model, key, state));
    return s;
}

Eigen::MatrixXcd eta_matrix(const Model& model, int q, bool dagger) {
    check_dense_size(model.params.N, 10, "eta_matrix");
    const int dim = 1 << model.params.N;
    Eigen::MatrixXcd M(dim, dim);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
    for (int b = 0; b < dim; ++b) {
        e[b] = 1.0;
        M.col(b) = apply_eta(model, q, dagger, e);
        e[b] = 0.0;
    }
    return M;
}

Eigen::MatrixXcd monomial_matrix(const Model& model, const MonoKey& key) {
    check_dense_size(model.params.N, 10, "monomial_matrix");
    const int dim = 1 << model.params.N;
    Eigen::MatrixXcd M(dim, dim);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
    for (int b = 0; b < dim; ++b) {
        e[b] = 1.0;
        M.col(b) = apply_monomial(model, key, e);
        e[b] = 0.0;
    }
    return M;
}

Eigen::MatrixXcd polynomial_matrix(const Model& model, const Polynomial& op) {
    check_dense_size(model.params.N, 10, "polynomial_matrix");
    const int dim = 1 << model.params.N;
    Eigen::MatrixXcd M(dim, dim);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
    for (int b = 0; b < dim; ++b) {
        e[b] = 1.0;
        M.col(b) = apply_polynomial(model, op, e);
        e[b] = 0.0;
    }
    return M;
}

Eigen::MatrixXcd fermion_hamiltonian_full(const Model& model) {
    check_dense_size(model.params.N, 10, "fermion_hamiltonian_full");
    const int N = model.params.N;
    const int dim = 1 << N;
    Eigen::MatrixXcd H(dim, dim);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
    for (int b = 0; b < dim; ++b) {
        e[b] = 1.0;
        Eigen::VectorXcd col = Eigen::VectorXcd::Zero(dim);
        for (int l = 1; l <= N; ++l) {
            // Antiperiodic boundary of the even-parity sector: mu_{N+1} = -mu_1.
            double bsign = (l == N) ? -1.0 : 1.0;
            int lp = (l == N) ? 1 : l + 1;
            Eigen::VectorXcd right_dag = apply_mu(N, lp, true, e);
            Eigen::VectorXcd right = apply_mu(N, lp, false, e);
            col += (0.25 * model.params.Jx * bsign) *
                   (apply_mu(N, l, true, right_dag) + apply_mu(N, l, true, right) -
                    apply_mu(N, l, false, right_dag) - apply_mu(N, l, false, right));
        }
        double diag = pert_diag(model, b);
        diag += model.params.h * sz_site_sum(b, N);
        col[b] += diag;
        H.col(b) = col;
        e[b] = 0.0;
    }
    return H;
}

Eigen::VectorXcd bogoliubov_vacuum(const Model& model) {
    check_dense_size(model.params.N, 14, "bogoliubov_vacuum");
    const int N = model.params.N;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1 << N);
    v[0] = 1.0;
    for (int q = model.bog.half_begin(); q < N; ++q) {
        Eigen::VectorXcd pair = apply_mu_tilde(model, q, true, v);
        pair = apply_mu_tilde(model, model.bog.neg(q), true, pair);
        // Applied as mutilde+_{-k} mutilde+_{k}: swap order sign folded below.
        v = model.bog.u[static_cast<std::size_t>(q)] * v +
            cd{0.0, model.bog.v[static_cast<std::size_t>(q)]} * pair;
    }
    return v;
}

Eigen::VectorXcd psi_state_fock(const Model& model, int n) {
    const int N = model.params.N;
    if (n < 0 || n > N / 2) throw std::invalid_argument("psi_state_fock: n outside [0, N/2]");
    Eigen::VectorXcd vac = bogoliubov_vacuum(model);
    Eigen::VectorXcd out = vac;
    const int hb = N / 2;
    for (int mask = 1; mask < (1 << hb); ++mask) {
        if (popcount(mask) > n) continue;
        Eigen::VectorXcd w = vac;
        cd amp{1.0, 0.0};
        for (int i = 0; i < hb; ++i) {
            if (!(mask >> i & 1)) continue;
            int q = model.bog.half_begin() + i;
            amp *= cd{0.0, -1.0} * (model.bog.v[static_cast<std::size_t>(q)] /
                                    model.bog.u[static_cast<std::size_t>(q)]);
            w = apply_eta(model, q, true, w);
            w = apply_eta(model, model.bog.neg(q), true, w);
        }
        out += amp * w;
    }
    out.normalize();
    return out;
}

Eigen::VectorXcd particle_hole_apply(const Eigen::VectorXcd& in) {
    const int dim = static_cast<int>(in.size());
    const int mask = dim - 1;
    Eigen::VectorXcd out(dim);
    for (int b = 0; b < dim; ++b) {
        int odd_positions = popcount(b & 0xAAAAAAAA);
        out[(~b) & mask] = (odd_positions & 1) ? -in[b] : in[b];
    }
    return out;
}

Eigen::VectorXcd chi_state_fock(const Model& model, int n) {
    return particle_hole_apply(psi_state_fock(model, n));
}

TimeSeries ed_evolve(const Model& model, const Eigen::VectorXcd& init,
                     const std::vector<double>& times, const EdObservables& obs) {
    const int N = model.params.N;
    check_dense_size(N, 12, "ed_evolve");
    EvenBlock blk = diagonalize_even_block(model);
    const int dim = static_cast<int>(blk.states.size());

    Eigen::VectorXcd psi0(dim);
    double dropped = 0.0;
    {
        double inside = 0.0;
        for (int b = 0; b < (1 << N); ++b) {
            int i = blk.pos[static_cast<std::size_t>(b)];
            if (i >= 0) {
                psi0[i] = init[b];
                inside += std::norm(init[b]);
            } else {
                dropped += std::norm(init[b]);
            }
        }
        if (dropped > 1e-10 * (inside + dropped))
            throw std::invalid_argument("ed_evolve: initial state is not even-parity");
    }
    Eigen::VectorXcd alpha(dim);
    alpha.real() = blk.eig.eigenvectors().transpose() * psi0.real();
    alpha.imag() = blk.eig.eigenvectors().transpose() * psi0.imag();

    TimeSeries out;
    out.t = times;
    if (obs.spin_z) {
        out.names.push_back("Sz");
        out.cols.emplace_back();
    }
    for (int m : obs.czm) {
        out.names.push_back("Czm_" + std::to_string(m));
        out.cols.emplace_back();
    }
    if (obs.cx1) {
        out.names.push_back("Cx1");
        out.cols.emplace_back();
    }
    if (obs.energy) {
        out.names.push_back("energy");
        out.cols.emplace_back();
    }

    Eigen::VectorXd sz_diag(dim);
    std::vector<Eigen::VectorXd> czz_diags;
    for (int i = 0; i < dim; ++i)
        sz_diag[i] = sz_site_sum(blk.states[static_cast<std::size_t>(i)], N) / N;
    for (int m : obs.czm) {
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d[i] = czz_diag(blk.states[static_cast<std::size_t>(i)], N, m);
        czz_diags.push_back(std::move(d));
    }
    const double energy = alpha.cwiseAbs2().dot(blk.eig.eigenvalues());

    for (double t : times) {
        Eigen::VectorXcd phase(dim);
        for (int i = 0; i < dim; ++i)
            phase[i] = std::exp(cd{0.0, -blk.eig.eigenvalues()[i] * t}) * alpha[i];
        Eigen::VectorXcd psi(dim);
        psi.real() = blk.eig.eigenvectors() * phase.real();
        psi.imag() = blk.eig.eigenvectors() * phase.imag();
        Eigen::VectorXd prob = psi.cwiseAbs2();
        std::size_t cidx = 0;
        double sz = prob.dot(sz_diag);
        if (obs.spin_z) out.cols[cidx++].push_back(sz);
        for (std::size_t mi = 0; mi < obs.czm.size(); ++mi)
            out.cols[cidx++].push_back(prob.dot(czz_diags[mi]) - sz * sz);
        if (obs.cx1) {
            double acc = 0.0;
            for (int i = 0; i < dim; ++i) {
                int b = blk.states[static_cast<std::size_t>(i)];
                for (int l = 0; l < N; ++l) {
                    int mask = (1 << l) | (1 << ((l + 1) % N));
                    int j = blk.pos[static_cast<std::size_t>(b ^ mask)];
                    if (j >= 0) acc += 0.25 * std::real(std::conj(psi[j]) * psi[i]);
                }
            }
            out.cols[cidx++].push_back(acc / N);
        }
        if (obs.energy) out.cols[cidx++].push_back(energy / N);
    }
    return out;
}

TimeSeries quadratic_pair_oracle(const Model& model, int n, const std::vector<double>& times) {
    const int N = model.params.N;
    const int hb = N / 2;
    if (hb > 16) throw std::invalid_argument("quadratic_pair_oracle: half-zone too large");
    if (n < 0 || n > hb) throw std::invalid_argument("quadratic_pair_oracle: n outside [0, N/2]");
    const int dim = 1 << hb;
    const auto& bog = model.bog;
    const auto& co = model.coeffs;

    // H restricted to quadratics, in the pair-occupation basis: diagonal
    // counts 2*A_II per occupied pair; A_I / A_III create or destroy pairs.
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
    for (int T = 0; T < dim; ++T) {
        double diag = co.H0;
        for (int i = 0; i < hb; ++i) {
            int q = bog.half_begin() + i;
            if (T >> i & 1) diag += 2.0 * co.A_II[static_cast<std::size_t>(q)];
        }
        H(T, T) = diag;
        for (int i = 0; i < hb; ++i) {
            if (T >> i & 1) continue;
            int q = bog.half_begin() + i;
            H(T | (1 << i), T) += 2.0 * co.A_I[static_cast<std::size_t>(q)];
            H(T, T | (1 << i)) -= 2.0 * co.A_I[static_cast<std::size_t>(q)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("quadratic_pair_oracle: eigendecomposition failed");

    Eigen::VectorXcd c0 = Eigen::VectorXcd::Zero(dim);
    double w2 = 0.0;
    for (int T = 0; T < dim; ++T) {
        if (popcount(T) > n) continue;
        cd amp{1.0, 0.0};
        for (int i = 0; i < hb; ++i) {
            if (!(T >> i & 1)) continue;
            int q = bog.half_begin() + i;
            amp *= cd{0.0, -1.0} *
                   (bog.v[static_cast<std::size_t>(q)] / bog.u[static_cast<std::size_t>(q)]);
        }
        c0[T] = amp;
        w2 += std::norm(amp);
    }
    c0 /= std::sqrt(w2);
    Eigen::VectorXcd alpha = eig.eigenvectors().adjoint() * c0;

    TimeSeries out;
    out.t = times;
    out.names = {"Sz"};
    out.cols.emplace_back();
    for (double t : times) {
        Eigen::VectorXcd phase(dim);
        for (int i = 0; i < dim; ++i)
            phase[i] = std::exp(cd{0.0, -eig.eigenvalues()[i] * t}) * alpha[i];
        Eigen::VectorXcd c = eig.eigenvectors() * phase;
        double sz = co.Gamma;
        for (int i = 0; i < hb; ++i) {
            int q = bog.half_begin() + i;
            double u = bog.u[static_cast<std::size_t>(q)], v = bog.v[static_cast<std::size_t>(q)];
            double X = u * u - v * v, Y = u * v;
            double occ = 0.0;
            cd pair_down{0.0, 0.0};  // <eta_{-k} eta_k>
            for (int T = 0; T < dim; ++T) {
                if (!(T >> i & 1)) continue;
                occ += std::norm(c[T]);
                pair_down -= std::conj(c[T & ~(1 << i)]) * c[T];
            }
            // i Y (<eta_{-k}eta_k> - <eta+_k eta+_{-k}>) = -2 Y Im<eta_{-k}eta_k>
            sz += (2.0 * X * occ - 4.0 * Y * std::imag(pair_down)) / N;
        }
        out.cols[0].push_back(sz);
    }
    return out;
}

ThermalEd thermal_build(const Model& model, bool with_spin_z) {
    const int N = model.params.N;
    check_dense_size(N, 12, "thermal_build");
    if (with_spin_z) check_dense_size(N, 10, "thermal_build with spin observable");
    ThermalEd th;
    th.N = N;
    std::vector<double> evals, szs;
    for (int parity = 0; parity < 2; ++parity) {
        std::vector<int> states = parity_block_states(N, parity);
        Eigen::MatrixXd H = spin_hamiltonian_block(model, states);
        if (with_spin_z) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
            Eigen::VectorXd sz_diag(static_cast<int>(states.size()));
            for (std::size_t i = 0; i < states.size(); ++i)
                sz_diag[static_cast<int>(i)] = sz_site_sum(states[i], N) / N;
            for (int i = 0; i < eig.eigenvalues().size(); ++i) {
                evals.push_back(eig.eigenvalues()[i]);
                szs.push_back(eig.eigenvectors().col(i).cwiseAbs2().dot(sz_diag));
            }
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
            for (int i = 0; i < eig.eigenvalues().size(); ++i)
                evals.push_back(eig.eigenvalues()[i]);
        }
    }
    th.evals = Eigen::Map<Eigen::VectorXd>(evals.data(), static_cast<long>(evals.size()));
    if (with_spin_z)
        th.sz_eigenbasis = Eigen::Map<Eigen::VectorXd>(szs.data(), static_cast<long>(szs.size()));
    return th;
}

namespace {
// Boltzmann weights with the spectrum shifted so the largest weight is 1.
Eigen::VectorXd boltzmann(const Eigen::VectorXd& evals, double beta) {
    double ref = beta >= 0.0 ? evals.minCoeff() : evals.maxCoeff();
    return (-beta * (evals.array() - ref)).exp();
}
}  // namespace

double thermal_energy_density(const ThermalEd& th, double beta) {
    Eigen::VectorXd w = boltzmann(th.evals, beta);
    return th.evals.dot(w) / (w.sum() * th.N);
}

double thermal_spin_z(const ThermalEd& th, double beta) {
    if (th.sz_eigenbasis.size() == 0)
        throw std::invalid_argument("thermal_spin_z: built without the spin observable");
    Eigen::VectorXd w = boltzmann(th.evals, beta);
    return th.sz_eigenbasis.dot(w) / w.sum();
}

double match_beta(const ThermalEd& th, double target) {
    const double blim = 200.0;
    double lo = -blim, hi = blim;
    double nu_lo = thermal_energy_density(th, lo);   // close to E_max / N
    double nu_hi = thermal_energy_density(th, hi);   // close to E_min / N
    if (target > nu_lo || target < nu_hi)
        throw std::invalid_argument("match_beta: target outside the spectral range");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double nu = thermal_energy_density(th, mid);
        if (std::abs(nu - target) < 1e-8) return mid;
        if (nu > target)
            lo = mid;  // energy density decreases with beta
        else
            hi = mid;
    }
    throw std::runtime_error("match_beta: bisection did not converge");
}

double extrapolate_beta(const std::vector<std::pair<int, double>>& samples) {
    if (samples.size() < 2) throw std::invalid_argument("extrapolate_beta: need >= 2 samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(samples.size());
    for (auto [N, beta] : samples) {
        double x = 1.0 / N;
        sx += x;
        sy += beta;
        sxx += x * x;
        sxy += x * beta;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return (sy - slope * sx) / n;
}

std::vector<double> accuracy_metric(const std::vector<double>& t, const std::vector<double>& lke,
                                    const std::vector<double>& ed) {
    if (t.size() != lke.size() || t.size() != ed.size())
        throw std::invalid_argument("accuracy_metric: series length mismatch");
    std::vector<double> out(t.size(), 0.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        double dt = t[i] - t[i - 1];
        double d0 = lke[i - 1] - ed[i - 1], d1 = lke[i] - ed[i];
        num += 0.5 * dt * (d0 * d0 + d1 * d1);
        den += 0.5 * dt * (ed[i - 1] * ed[i - 1] + ed[i] * ed[i]);
        out[i] = std::sqrt(num / (1.0 + den));
    }
    return out;
}

}  // namespace lke::ed
