#include "lke/observables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lke/kinetics.hpp"

namespace lke {

namespace {

void check_state_size(const Eigen::VectorXcd& X, const Truncation& trunc,
                      const char* who) {
  if (X.size() != static_cast<Eigen::Index>(trunc.size()))
    throw std::invalid_argument(std::string(who) +
                                ": state vector does not match the truncation");
}

}  // namespace

cd QuadraticIndices::pair_ann(const Eigen::VectorXcd& X, int q, int N) const {
  const int hb = N / 2;
  if (q >= hb) return X[ann[static_cast<std::size_t>(q - hb)]];
  return -X[ann[static_cast<std::size_t>(N - 1 - q - hb)]];
}

cd QuadraticIndices::pair_cre(const Eigen::VectorXcd& X, int q, int N) const {
  const int hb = N / 2;
  if (q >= hb) return -X[cre[static_cast<std::size_t>(q - hb)]];
  return X[cre[static_cast<std::size_t>(N - 1 - q - hb)]];
}

QuadraticIndices quadratic_indices(const Truncation& trunc) {
  const int N = trunc.N;
  const int hb = N / 2;
  QuadraticIndices qi;
  qi.number.resize(static_cast<std::size_t>(N));
  qi.ann.resize(static_cast<std::size_t>(hb));
  qi.cre.resize(static_cast<std::size_t>(hb));
  // The factor lists below are already in canonical order, so the sign
  // returned by signed_index is +1.
  auto need = [&trunc](std::vector<Factor> f) {
    auto [idx, sign] = signed_index(trunc, f);
    (void)sign;
    if (idx < 0)
      throw std::invalid_argument(
          "observables: truncation lacks a quadratic operator");
    return idx;
  };
  for (int q = 0; q < N; ++q) {
    auto uq = static_cast<std::uint16_t>(q);
    qi.number[static_cast<std::size_t>(q)] = need({{true, uq}, {false, uq}});
  }
  for (int r = hb; r < N; ++r) {
    auto ur = static_cast<std::uint16_t>(r);
    auto un = static_cast<std::uint16_t>(N - 1 - r);
    qi.ann[static_cast<std::size_t>(r - hb)] = need({{false, un}, {false, ur}});
    qi.cre[static_cast<std::size_t>(r - hb)] = need({{true, un}, {true, ur}});
  }
  return qi;
}

CorrelatorCoeffs correlator_coeffs(const Model& model, int m) {
  const int N = model.params.N;
  if (m < -N / 2 || m > N / 2)
    throw std::invalid_argument("correlator_coeffs: separation out of range");
  CorrelatorCoeffs cc;
  cc.model = &model;
  cc.m = m;
  const CouplingKernel& ker = model.kernel;
  detail::CoeffBuilder cb{&model.bog, 2.0 / N, 1.0, model.coeffs.Gamma,
                          [&ker, m](int i, int j) { return ker.gamma(i, j, m); }};
  cc.C0 = cb.h0(false);
  cc.R_I.resize(static_cast<std::size_t>(N));
  cc.R_II.resize(static_cast<std::size_t>(N));
  for (int q = 0; q < N; ++q) {
    cc.R_I[static_cast<std::size_t>(q)] = cb.a1(q);
    cc.R_II[static_cast<std::size_t>(q)] = cb.a2(q, false);
  }
  return cc;
}

cd CorrelatorCoeffs::S(QuarticType t, int q1, int q2, int q3, int q4) const {
  const int N = model->params.N;
  detail::QuarticKernel qk{&model->bog, 1.0 / (static_cast<double>(N) * N)};
  double c12 = model->kernel.gamma(q1, q2, m);
  double c1m3 = model->kernel.gamma(q1, model->bog.neg(q3), m);
  return qk.eval(t, q1, q2, q3, q4, c12, c1m3);
}

Eigen::Vector2d CorrelatorCoeffs::p(int q) const {
  double k = model->bog.k[static_cast<std::size_t>(q)];
  return {std::cos(k), std::sin(k)};
}

Eigen::Vector2d CorrelatorCoeffs::q0(int q) const {
  double u = model->bog.u[static_cast<std::size_t>(q)];
  double v = model->bog.v[static_cast<std::size_t>(q)];
  return {v * v, -u * v};
}

Eigen::Vector2d CorrelatorCoeffs::q_I(int q) const {
  double u = model->bog.u[static_cast<std::size_t>(q)];
  double v = model->bog.v[static_cast<std::size_t>(q)];
  return {u * v, -(u * u - v * v) / 2.0};
}

Eigen::Vector2d CorrelatorCoeffs::q_II(int q) const {
  double u = model->bog.u[static_cast<std::size_t>(q)];
  double v = model->bog.v[static_cast<std::size_t>(q)];
  return {u * u - v * v, 2.0 * u * v};
}

double spin_z(const Eigen::VectorXcd& X, const Truncation& trunc,
              const Model& model, double* imag_residue) {
  check_state_size(X, trunc, "spin_z");
  const int N = model.params.N;
  QuadraticIndices qi = quadratic_indices(trunc);
  const auto& u = model.bog.u;
  const auto& v = model.bog.v;
  std::vector<cd> terms(static_cast<std::size_t>(N));
  for (int q = 0; q < N; ++q) {
    double Xkk = u[q] * u[q] - v[q] * v[q];
    double Ykk = u[q] * v[q];
    terms[static_cast<std::size_t>(q)] =
        Xkk * X[qi.number[static_cast<std::size_t>(q)]] +
        cd(0.0, Ykk) * (qi.pair_ann(X, q, N) - qi.pair_cre(X, q, N));
  }
  cd acc = pairwise_sum(terms) / static_cast<double>(N);
  if (imag_residue) *imag_residue = std::abs(acc.imag());
  return model.coeffs.Gamma + acc.real();
}

double spin_z_psi1_closed_form(const Model& model) {
  const auto& bog = model.bog;
  const int N = bog.N;
  const int hb = bog.half_begin();
  std::vector<double> w2(static_cast<std::size_t>(N - hb));
  std::vector<double> corr(static_cast<std::size_t>(N - hb));
  for (int q = hb; q < N; ++q) {
    double t = bog.v[q] / bog.u[q];
    double Xkk = bog.u[q] * bog.u[q] - bog.v[q] * bog.v[q];
    double Ykk = bog.u[q] * bog.v[q];
    w2[static_cast<std::size_t>(q - hb)] = t * t;
    corr[static_cast<std::size_t>(q - hb)] = t * (2.0 * Ykk - t * Xkk);
  }
  double W2 = 1.0 + pairwise_sum(w2);
  return model.coeffs.Gamma - 2.0 / (W2 * N) * pairwise_sum(corr);
}

namespace {

// One quartic term of the zz correlator: S_lambda(k, m) times the
// expectation of the slot product, looked up through its canonical
// representative in the basis.
struct QuarticAccumulator {
  const CorrelatorCoeffs& cc;
  const Truncation& trunc;
  const Eigen::VectorXcd& X;
  std::vector<cd> terms;

  void add(int type, const std::array<int, 4>& g) {
    const int N = cc.model->params.N;
    std::vector<Factor> f(4);
    int q[4];
    for (int s = 0; s < 4; ++s) {
      f[static_cast<std::size_t>(s)] = {
          detail::kSlotCreation[type][s],
          static_cast<std::uint16_t>(g[static_cast<std::size_t>(s)])};
      q[s] = detail::kSlotNeg[type][s] ? N - 1 - g[static_cast<std::size_t>(s)]
                                       : g[static_cast<std::size_t>(s)];
    }
    auto [idx, sign] = signed_index(trunc, f);
    if (idx < 0)
      throw std::invalid_argument(
          "corr_zz: truncation lacks a degree-4 operator");
    terms.push_back(cc.S(static_cast<QuarticType>(type), q[0], q[1], q[2], q[3]) *
                    (sign * X[idx]));
  }
};

}  // namespace

double corr_zz(const Eigen::VectorXcd& X, const Truncation& trunc,
               const Model& model, int m) {
  check_state_size(X, trunc, "corr_zz");
  const int N = model.params.N;
  const int hb = N / 2;
  CorrelatorCoeffs cc = correlator_coeffs(model, m);
  QuadraticIndices qi = quadratic_indices(trunc);

  std::vector<cd> quad(static_cast<std::size_t>(N));
  for (int q = 0; q < N; ++q)
    quad[static_cast<std::size_t>(q)] =
        cc.R_I[static_cast<std::size_t>(q)] * qi.pair_ann(X, q, N) +
        cc.R_II[static_cast<std::size_t>(q)] * X[qi.number[static_cast<std::size_t>(q)]] +
        cc.R_III(q) * qi.pair_cre(X, q, N);

  // Only slot products that reduce to paired operators can have nonzero
  // expectation values in the momentum-pair sector the kinetic state lives
  // in, so the tuple sums run over those arrangements alone.
  QuarticAccumulator qa{cc, trunc, X, {}};
  // Shapes I (all annihilators) and V (all creators): the slot momenta are
  // the 24 arrangements of two opposite-momentum pairs {r, -r, s, -s}.
  for (int type : {0, 4}) {
    for (int r = hb; r < N; ++r) {
      for (int s = r + 1; s < N; ++s) {
        std::array<int, 4> g{N - 1 - s, N - 1 - r, r, s};  // ascending
        do {
          qa.add(type, g);
        } while (std::next_permutation(g.begin(), g.end()));
      }
    }
  }
  // Shapes II and IV: a number contraction at g0 plus an opposite-momentum
  // pair {r, -r}; the three same-type slots take all six arrangements.
  for (int g0 = 0; g0 < N; ++g0) {
    for (int r = hb; r < N; ++r) {
      if (r == g0 || N - 1 - r == g0) continue;
      std::array<int, 3> rest{g0, N - 1 - r, r};
      std::sort(rest.begin(), rest.end());
      do {
        qa.add(1, {g0, rest[0], rest[1], rest[2]});
        qa.add(3, {rest[0], rest[1], rest[2], g0});
      } while (std::next_permutation(rest.begin(), rest.end()));
    }
  }
  // Shape III, pair-pair: creators {r, -r}, annihilators {s, -s}.
  for (int r = hb; r < N; ++r) {
    for (int s = hb; s < N; ++s) {
      const std::array<std::array<int, 2>, 2> cr{{{N - 1 - r, r}, {r, N - 1 - r}}};
      const std::array<std::array<int, 2>, 2> an{{{N - 1 - s, s}, {s, N - 1 - s}}};
      for (const auto& c2 : cr)
        for (const auto& a2 : an) qa.add(2, {c2[0], c2[1], a2[0], a2[1]});
    }
  }
  // Shape III, number-number: creators and annihilators share the same two
  // distinct, non-opposite momenta {g1, g2}.
  for (int g1 = 0; g1 < N; ++g1) {
    for (int g2 = g1 + 1; g2 < N; ++g2) {
      if (g2 == N - 1 - g1) continue;
      for (int ci = 0; ci < 2; ++ci)
        for (int ai = 0; ai < 2; ++ai) {
          int c0 = ci ? g2 : g1, c1 = ci ? g1 : g2;
          int a0 = ai ? g2 : g1, a1 = ai ? g1 : g2;
          qa.add(2, {c0, c1, a0, a1});
        }
    }
  }

  cd acc = cc.C0 + pairwise_sum(quad) + pairwise_sum(qa.terms);
  double sz = spin_z(X, trunc, model);
  return acc.real() - sz * sz;
}

double corr_xx_nn(const Eigen::VectorXcd& X, const Truncation& trunc,
                  const Model& model, double* imag_residue) {
  check_state_size(X, trunc, "corr_xx_nn");
  const int N = model.params.N;
  QuadraticIndices qi = quadratic_indices(trunc);
  const auto& bog = model.bog;
  std::vector<cd> terms(static_cast<std::size_t>(N));
  for (int q = 0; q < N; ++q) {
    double u = bog.u[q], v = bog.v[q];
    double Xkk = u * u - v * v, Ykk = u * v;
    double ck = std::cos(bog.k[q]), sk = std::sin(bog.k[q]);
    cd a = qi.pair_ann(X, q, N);
    cd n = X[qi.number[static_cast<std::size_t>(q)]];
    cd c = qi.pair_cre(X, q, N);
    cd row0 = v * v + cd(0.0, Ykk) * a + Xkk * n - cd(0.0, Ykk) * c;
    cd row1 = -Ykk + cd(0.0, -Xkk / 2.0) * a + 2.0 * Ykk * n -
              cd(0.0, -Xkk / 2.0) * c;
    terms[static_cast<std::size_t>(q)] = ck * row0 + sk * row1;
  }
  cd acc = pairwise_sum(terms) / (2.0 * N);
  if (imag_residue) *imag_residue = std::abs(acc.imag());
  return acc.real();
}

Eigen::VectorXcd hamiltonian_projection(const Model& model,
                                        const Truncation& trunc,
                                        bool quadratic_only,
                                        long long* dropped) {
  Polynomial H = hamiltonian_polynomial(model, quadratic_only);
  Eigen::VectorXcd w =
      Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(trunc.size()));
  long long miss = 0;
  for (const auto& [key, coeff] : H) {
    int idx = trunc.find(key);
    if (idx < 0) {
      ++miss;
      continue;
    }
    w[idx] += coeff;
  }
  if (dropped) *dropped = miss;
  return w;
}

ThermalExpansion thermal_expansion(const Model& model) {
  const ModelParams& p = model.params;
  const int N = p.N;
  ThermalExpansion th;
  th.h = p.h;
  th.Jz_zeta = p.Jz * model.kernel.zeta;
  th.K1 = p.h * p.h / 4.0 + p.Jx * p.Jx / 16.0 +
          p.Jz * p.Jz * zeta_sum(N, 2.0 * p.alpha) / 32.0;

  std::vector<double> outer;
  outer.reserve(static_cast<std::size_t>(std::max(0, N - 3)));
  std::vector<double> inner;
  for (int m = 2; m <= N - 2; ++m) {
    inner.clear();
    for (int n = 2; n <= N - 2; ++n) {
      if (n == N - 1 - m || n == N - m || n == N + 1 - m) continue;
      int qsum = (m + n) % N;
      double dq = std::min(qsum, N - qsum);
      double dn = std::min(n, N - n);
      inner.push_back(std::pow(dn, -p.alpha) * std::pow(dq, -p.alpha));
    }
    double dm = std::min(m, N - m);
    outer.push_back(std::pow(dm, -p.alpha) * pairwise_sum(inner));
  }
  th.K2 = -3.0 / 32.0 * p.h * p.h * p.Jz * model.kernel.zeta -
          p.Jz * p.Jz * p.Jz / 128.0 * pairwise_sum(outer);
  return th;
}

Timescales timescales(const Model& model) {
  std::vector<double> abs_eps(model.bog.eps.size());
  for (std::size_t i = 0; i < abs_eps.size(); ++i)
    abs_eps[i] = std::abs(model.bog.eps[i]);
  Timescales ts;
  ts.tau = model.params.N / pairwise_sum(abs_eps);
  ts.tau_trav = model.params.N / std::abs(model.params.Jx);
  return ts;
}

}  // namespace lke
