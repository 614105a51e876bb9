#include "lke/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lke {

namespace {
constexpr double kPi = std::numbers::pi;

void validate(const ModelParams& p) {
  if (p.N < 4 || p.N % 2 != 0)
    throw std::invalid_argument("model: N must be even and >= 4");
  if (!(p.alpha > 0.0))
    throw std::invalid_argument("model: alpha must be positive");
  if (!std::isfinite(p.h) || !std::isfinite(p.Jx) || !std::isfinite(p.Jz) ||
      !std::isfinite(p.alpha))
    throw std::invalid_argument("model: parameters must be finite");
}
}  // namespace

double zeta_sum(int N, double alpha) {
  if (N < 4) return 0.0;
  std::vector<double> terms;
  terms.reserve(N - 3);
  for (int m = 2; m <= N - 2; ++m) {
    double d = std::min(m, N - m);
    terms.push_back(std::pow(d, -alpha));
  }
  return pairwise_sum(terms);
}

double dispersion(const ModelParams& p, double k) {
  double a = p.h + 0.5 * p.Jx * std::cos(k);
  double b = 0.5 * p.Jx * std::sin(k);
  return sgn_pos(a) * std::hypot(a, b);
}

ModelParams mirror_params(const ModelParams& p) {
  ModelParams m = p;
  m.h = -p.h;
  m.Jx = -p.Jx;
  return m;
}

Model build_model(const ModelParams& p) {
  validate(p);
  const int N = p.N;

  Model model;
  model.params = p;

  BogoliubovTable& bog = model.bog;
  bog.N = N;
  bog.k.resize(N);
  bog.a.resize(N);
  bog.b.resize(N);
  bog.x.resize(N);
  bog.u.resize(N);
  bog.v.resize(N);
  bog.eps.resize(N);
  for (int q = 0; q < N; ++q) {
    double k = 2.0 * kPi * (q + 0.5) / N - kPi;
    double a = p.h + 0.5 * p.Jx * std::cos(k);
    double b = 0.5 * p.Jx * std::sin(k);
    // atan(b/a) rather than atan2: the angle stays in (-pi/4, pi/4] so the
    // rotation never exchanges the quasiparticle branches; the branch choice
    // is carried by the sign of eps instead.
    double x = (a == 0.0) ? (b >= 0.0 ? kPi / 4.0 : -kPi / 4.0)
                          : 0.5 * std::atan(b / a);
    bog.k[q] = k;
    bog.a[q] = a;
    bog.b[q] = b;
    bog.x[q] = x;
    bog.u[q] = std::cos(x);
    bog.v[q] = std::sin(x);
    bog.eps[q] = sgn_pos(a) * std::hypot(a, b);
  }

  CouplingKernel& ker = model.kernel;
  ker.N = N;
  ker.alpha = p.alpha;
  ker.zeta = zeta_sum(N, p.alpha);
  ker.cos_table.resize(N);
  // Filled symmetrically so that lookups at j and N - j agree bitwise.
  for (int j = 0; j <= N / 2; ++j) ker.cos_table[j] = std::cos(2.0 * kPi * j / N);
  for (int j = N / 2 + 1; j < N; ++j) ker.cos_table[j] = ker.cos_table[N - j];
  ker.c_diff.resize(N);
  {
    std::vector<double> terms(std::max(0, N - 3));
    for (int d = 0; d < N; ++d) {
      for (int m = 2; m <= N - 2; ++m) {
        double dist = std::min(m, N - m);
        long long idx = (static_cast<long long>(m) * d) % N;
        terms[m - 2] = ker.cos_table[idx] * std::pow(dist, -p.alpha);
      }
      ker.c_diff[d] = pairwise_sum(terms);
    }
  }

  HamiltonianCoeffs& co = model.coeffs;
  {
    std::vector<double> v2(N);
    for (int q = 0; q < N; ++q) v2[q] = bog.v[q] * bog.v[q];
    co.Gamma = -0.5 + pairwise_sum(v2) / N;
  }

  detail::CoeffBuilder cb{&bog, p.Jz, ker.zeta, co.Gamma,
                          [&ker](int i, int j) { return ker.c(i, j); }};
  co.H0 = cb.h0(true);
  co.A_I.resize(N);
  co.A_II.resize(N);
  co.A_III.resize(N);
  for (int q = 0; q < N; ++q) {
    co.A_I[q] = cb.a1(q);
    co.A_III[q] = std::conj(co.A_I[q]);
    co.A_II[q] = cb.a2(q, true);
  }

  return model;
}

namespace detail {

double CoeffBuilder::h0(bool with_dispersion) const {
  const int N = bog->N;
  const auto& u = bog->u;
  const auto& v = bog->v;
  auto Y = [&](int i, int j) { return u[i] * v[j]; };

  std::vector<double> quad(static_cast<std::size_t>(N) * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      quad[static_cast<std::size_t>(i) * N + j] =
          kern(i, j) * Y(j, i) * (Y(i, j) + Y(j, i));
  double out = 0.5 * N * coupling * zeta * Gamma * Gamma +
               coupling / (2.0 * N) * pairwise_sum(quad);
  if (with_dispersion) {
    std::vector<double> eps_terms(bog->eps);
    out -= 0.5 * pairwise_sum(eps_terms);
  }
  return out;
}

cd CoeffBuilder::a1(int q) const {
  const int N = bog->N;
  const auto& u = bog->u;
  const auto& v = bog->v;
  auto X = [&](int i, int j) { return u[i] * u[j] - v[i] * v[j]; };
  auto Y = [&](int i, int j) { return u[i] * v[j]; };

  std::vector<double> acc(N);
  for (int j = 0; j < N; ++j)
    acc[j] = kern(q, j) * X(q, j) * (Y(q, j) + Y(j, q));
  double ai = coupling * zeta * Y(q, q) * Gamma +
              coupling / (2.0 * N) * pairwise_sum(acc);
  return cd(0.0, ai);
}

double CoeffBuilder::a2(int q, bool with_dispersion) const {
  const int N = bog->N;
  const auto& u = bog->u;
  const auto& v = bog->v;
  auto X = [&](int i, int j) { return u[i] * u[j] - v[i] * v[j]; };
  auto Y = [&](int i, int j) { return u[i] * v[j]; };

  std::vector<double> acc(N);
  for (int j = 0; j < N; ++j) {
    double yy = Y(q, j) + Y(j, q);
    acc[j] = kern(q, j) * (X(q, j) * X(q, j) - yy * yy);
  }
  double out = coupling * zeta * X(q, q) * Gamma +
               coupling / (2.0 * N) * pairwise_sum(acc);
  if (with_dispersion) out += bog->eps[q];
  return out;
}

cd QuarticKernel::eval(QuarticType t, int q1, int q2, int q3, int q4,
                       double c12, double c1m3) const {
  const auto& u = bog->u;
  const auto& v = bog->v;
  auto X = [&](int i, int j) { return u[i] * u[j] - v[i] * v[j]; };
  auto Y = [&](int i, int j) { return u[i] * v[j]; };
  // (Z + Z')_{ij} = u_i u_j + v_i v_j
  auto ZZp = [&](int i, int j) { return u[i] * u[j] + v[i] * v[j]; };

  switch (t) {
    case QuarticType::I:
      return cd(-prefactor * c12 * Y(q2, q1) * Y(q4, q3), 0.0);
    case QuarticType::II:
      return cd(0.0, 2.0 * prefactor * c12 * X(q1, q2) * Y(q4, q3));
    case QuarticType::III:
      return cd(prefactor * (2.0 * c12 * Y(q1, q2) * Y(q4, q3) -
                             c1m3 * ZZp(q1, q3) * ZZp(q2, q4)),
                0.0);
    case QuarticType::IV:
      return cd(0.0, -2.0 * prefactor * c12 * X(q3, q4) * Y(q1, q2));
    case QuarticType::V:
      return cd(-prefactor * c12 * Y(q1, q2) * Y(q3, q4), 0.0);
  }
  return cd(0.0, 0.0);
}

}  // namespace detail

cd Model::b_coeff(QuarticType t, int q1, int q2, int q3, int q4) const {
  detail::QuarticKernel qk{&bog, params.Jz / (2.0 * params.N)};
  double c12 = kernel.c(q1, q2);
  // kernel argument k1 + k3: grid difference between q1 and neg(q3)
  int d = (q1 + q3 + 1) % params.N;
  if (d < 0) d += params.N;
  double c1m3 = kernel.c_diff[d];
  return qk.eval(t, q1, q2, q3, q4, c12, c1m3);
}

}  // namespace lke
