#pragma once

// The vorticity integral equation w = 2 A_mu D[f](w) + F[f] on mean-zero
// functions: forcing assembly, the singular integral operator D[f] by
// principal-value quadrature, the matrix-free Neumann-series solver and an
// independent dense collocation oracle.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/geometry.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/spectral.hpp"

namespace muskat {

// Mean-zero vorticity amplitude on the interface.
struct VorticityField {
  SpectralFunction omega;

  explicit VorticityField(SpectralFunction w) : omega(project_mean_zero(w)) {}
  explicit VorticityField(int n_max) : omega(n_max) {}
};

struct SolveOptions {
  double tol = 1e-12;      // Neumann increment cutoff in F^{0,1}
  std::size_t m = 0;       // quadrature size, 0 = fft_size(4 * n_max)
  int max_terms = 400;
  bool warm_start = false;                      // Picard iteration seeded below
  const SpectralFunction* initial_guess = nullptr;
};

// Quadrature tables for the interface operators at a fixed f. Kernels are
// stored rotated so that applying them is a contiguous dot product against
// samples on the shifted grid (index l encodes the argument a_i - b_j).
class InterfaceKernels {
 public:
  static constexpr int kD = 1;         // vorticity operator kernel
  static constexpr int kVelocity = 2;  // normal-velocity kernels (I2, I3)

  InterfaceKernels(const SpectralFunction& f, std::size_t m, int parts = kD | kVelocity)
      : f_(f), m_(m), rule_(QuadratureRule::midpoint(m)) {
    f_int_ = to_grid(f, m);
    f_shift_ = to_grid_offset(f, m, shifted_grid_offset(m));
    fp_int_ = to_grid(derivative(f, 1), m);
    if (parts & kD) kd_.assign(m * m, 0.0);
    if (parts & kVelocity) {
      ki2_.assign(m * m, 0.0);
      ki3_.assign(m * m, 0.0);
    }

    const bool has_d = !kd_.empty();
    const bool has_vel = !ki2_.empty();
    std::vector<double> sin_half(m), cos_half(m), inv_2sin(m);
    for (std::size_t j = 0; j < m; ++j) {
      sin_half[j] = std::sin(rule_.nodes[j] / 2.0);
      cos_half[j] = std::cos(rule_.nodes[j] / 2.0);
      inv_2sin[j] = 1.0 / (2.0 * sin_half[j]);
    }
    std::atomic<bool> denominator_failure{false};
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
      const double fi = f_int_[static_cast<std::size_t>(i)];
      const double fpi = fp_int_[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < m; ++j) {
        const double sb = sin_half[j];
        const double cb = cos_half[j];
        const double inv2s = inv_2sin[j];
        const std::size_t l = (static_cast<std::size_t>(i) + m - j) % m;
        const double fs = f_shift_[l];
        // slope factor (f(a) - f(a-b)) / (2 sin(b/2)); this orientation makes
        // the kernels reproduce the raw Birkhoff-Rott geometry
        const double delta = (fi - fs) * inv2s;
        const double denom = delta * delta + (1.0 + fi) * (1.0 + fs);
        if (denom < 1e-8) {
          denominator_failure.store(true, std::memory_order_relaxed);
          continue;
        }
        const std::size_t at = static_cast<std::size_t>(i) * m + l;
        if (has_d) {
          kd_[at] = ((1.0 + fi) * (1.0 + fs) * sb + (1.0 + fi) * delta - fpi * (1.0 + fs) * cb) /
                    denom * inv2s;
        }
        if (has_vel) {
          ki2_[at] = (fpi * delta + (1.0 + fi) * (1.0 + fs) * cb) / denom * inv2s;
          ki3_[at] = fpi * (1.0 + fs) / denom;
        }
      }
    }
    if (denominator_failure.load()) {
      throw SolverError("InterfaceKernels: kernel denominator below floor 1e-8 (curve too deformed)");
    }
  }

  std::size_t m() const noexcept { return m_; }
  const SpectralFunction& f() const noexcept { return f_; }
  const std::vector<double>& f_samples() const noexcept { return f_int_; }

  // D[f] g by quadrature, projected onto mean zero.
  SpectralFunction apply_D(const SpectralFunction& g) const {
    if (kd_.empty()) throw std::logic_error("InterfaceKernels: D kernel not built");
    const auto g_shift = to_grid_offset(g, m_, shifted_grid_offset(m_));
    std::vector<double> out(m_);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m_); ++i) {
      const double* row = kd_.data() + static_cast<std::size_t>(i) * m_;
      double acc = 0.0;
      for (std::size_t l = 0; l < m_; ++l) acc += row[l] * g_shift[l];
      out[static_cast<std::size_t>(i)] = acc / double(m_);
    }
    return project_mean_zero(from_grid(out, g.n_max()));
  }

  // Normal-velocity contributions I2 + I3 applied to the vorticity, as grid
  // samples; the division by (1+f) happens here, before any transform.
  std::vector<double> velocity_samples(const SpectralFunction& omega) const {
    if (ki2_.empty()) throw std::logic_error("InterfaceKernels: velocity kernels not built");
    const auto w_shift = to_grid_offset(omega, m_, shifted_grid_offset(m_));
    std::vector<double> out(m_);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m_); ++i) {
      const double* r2 = ki2_.data() + static_cast<std::size_t>(i) * m_;
      const double* r3 = ki3_.data() + static_cast<std::size_t>(i) * m_;
      double a2 = 0.0, a3 = 0.0;
      for (std::size_t l = 0; l < m_; ++l) {
        a2 += r2[l] * w_shift[l];
        a3 += r3[l] * w_shift[l];
      }
      const double mi = double(m_);
      out[static_cast<std::size_t>(i)] =
          -(a2 / mi + a3 / (2.0 * mi)) / (1.0 + f_int_[static_cast<std::size_t>(i)]);
    }
    return out;
  }

 private:
  SpectralFunction f_;
  std::size_t m_;
  QuadratureRule rule_;
  std::vector<double> f_int_, f_shift_, fp_int_;
  std::vector<double> kd_, ki2_, ki3_;
};

inline std::size_t solver_grid(const SpectralFunction& f, const SolveOptions& opts) {
  return opts.m != 0 ? opts.m : default_grid(f.n_max());
}

// Forcing F[f] = 2 ∂a K(f) - 2 A_rhosigma ∂a((1+f) sin a); exact-derivative
// form, hence mean zero.
inline VorticityField forcing_F(const SpectralFunction& f, const PhysicalParams& params,
                                std::size_t m = 0) {
  params.validate();
  const SpectralFunction K = curvature(f, m);
  SpectralFunction g = mul_by_sin(f);
  g.add_to_coef(1, Complex{0.0, -0.5});  // + sin(a)
  SpectralFunction F = 2.0 * derivative(K, 1) - (2.0 * params.A_rhosigma) * derivative(g, 1);
  return VorticityField(F.resized(f.n_max()));
}

inline VorticityField apply_D(const SpectralFunction& f, const VorticityField& g,
                              std::size_t m = 0) {
  if (m == 0) m = default_grid(f.n_max());
  InterfaceKernels K(f, m, InterfaceKernels::kD);
  return VorticityField(K.apply_D(g.omega));
}

// First-order kernel of D in f, with the same slope-factor orientation as
// the full kernel:
//   D1[f](g) = (1/2π) pv ∫ ((f(a)-f(a-b))/(2 sin(b/2)) - f'(a) cos(b/2)) g(a-b) / (2 sin(b/2)) db.
inline VorticityField d1_apply(const SpectralFunction& f, const SpectralFunction& g,
                               std::size_t m = 0) {
  if (m == 0) m = default_grid(std::max(f.n_max(), g.n_max()));
  const auto rule = QuadratureRule::midpoint(m);
  const double x0 = shifted_grid_offset(m);
  const auto f_int = to_grid(f, m);
  const auto fp_int = to_grid(derivative(f, 1), m);
  const auto f_shift = to_grid_offset(f, m, x0);
  const auto g_shift = to_grid_offset(g, m, x0);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double b = rule.nodes[j];
      const double sb = std::sin(b / 2.0);
      const std::size_t l = (i + m - j) % m;
      const double delta = (f_int[i] - f_shift[l]) / (2.0 * sb);
      acc += (delta - fp_int[i] * std::cos(b / 2.0)) * g_shift[l] / (2.0 * sb);
    }
    out[i] = acc / double(m);
  }
  return VorticityField(from_grid(out, g.n_max()));
}

struct VorticitySolution {
  VorticityField omega;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

inline double residual_norm(const InterfaceKernels& K, const SpectralFunction& omega,
                            const SpectralFunction& F, double two_a_mu) {
  SpectralFunction r = omega - F;
  if (two_a_mu != 0.0) {
    r = r - two_a_mu * K.apply_D(omega);
  }
  return norm_f01(r);
}

inline VorticitySolution neumann_solve(const InterfaceKernels& K, const SpectralFunction& F,
                                       const PhysicalParams& params, const SolveOptions& opts) {
  const double two_a_mu = 2.0 * params.A_mu;
  VorticitySolution sol{VorticityField(F), 0.0, 1};
  if (two_a_mu == 0.0) {
    sol.residual = residual_norm(K, sol.omega.omega, F, two_a_mu);
    return sol;
  }

  if (opts.warm_start && opts.initial_guess != nullptr) {
    // Picard form of the same fixed point, seeded with a previous field.
    SpectralFunction w = *opts.initial_guess;
    for (int it = 1; it <= opts.max_terms; ++it) {
      SpectralFunction next = two_a_mu * K.apply_D(w) + F;
      const double inc = norm_f01(next - w);
      w = next;
      if (inc < opts.tol) {
        sol.omega = VorticityField(w);
        sol.iterations = it;
        sol.residual = residual_norm(K, sol.omega.omega, F, two_a_mu);
        return sol;
      }
    }
    throw SolverError("solve_vorticity: warm-start iteration did not converge");
  }

  SpectralFunction omega = F;
  SpectralFunction term = F;
  double prev = norm_f01(F);
  int growth_streak = 0;
  for (int n = 1; n <= opts.max_terms; ++n) {
    term = two_a_mu * K.apply_D(term);
    omega += term;
    const double tn = norm_f01(term);
    sol.iterations = n + 1;
    if (tn < opts.tol) {
      sol.omega = VorticityField(omega);
      sol.residual = residual_norm(K, sol.omega.omega, F, two_a_mu);
      return sol;
    }
    if (tn > prev) {
      if (++growth_streak >= 3) {
        throw SolverError(
            "solve_vorticity: Neumann series diverging (outside the contraction regime)");
      }
    } else {
      growth_streak = 0;
    }
    prev = tn;
  }
  throw SolverError("solve_vorticity: Neumann series did not reach tolerance");
}

}  // namespace detail

// Conservative admissibility gate for the contraction 2|A_mu| ||D[f]|| < 1,
// with ||D[f]|| estimated by ||f||_{F^{1,1}} up to a constant.
inline void require_contraction_gate(const SpectralFunction& f, const PhysicalParams& params) {
  const double gate = norm_f11(f) * 2.0 * std::abs(params.A_mu);
  if (gate > 0.1 * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "solve_vorticity: contraction gate failed, 2|A_mu| ||f||_F11 = " << gate << " > 0.1";
    throw SolverError(msg.str());
  }
}

inline VorticitySolution solve_vorticity(const InterfaceKernels& K, const PhysicalParams& params,
                                         const SolveOptions& opts = {}) {
  params.validate();
  require_contraction_gate(K.f(), params);
  const VorticityField F = forcing_F(K.f(), params, K.m());
  return detail::neumann_solve(K, F.omega, params, opts);
}

inline VorticitySolution solve_vorticity(const SpectralFunction& f, const PhysicalParams& params,
                                         double tol) {
  SolveOptions opts;
  opts.tol = tol;
  InterfaceKernels K(f, solver_grid(f, opts), InterfaceKernels::kD);
  return solve_vorticity(K, params, opts);
}

inline VorticitySolution solve_vorticity(const SpectralFunction& f, const PhysicalParams& params,
                                         const SolveOptions& opts = {}) {
  InterfaceKernels K(f, solver_grid(f, opts), InterfaceKernels::kD);
  return solve_vorticity(K, params, opts);
}

struct DenseSolveResult {
  VorticityField omega;
  double residual = 0.0;
  double rcond = 0.0;
};

// Independent verification path: assembles the collocation matrix of
// I - 2 A_mu D[f] column by column (cos/sin basis) and solves densely.
inline DenseSolveResult dense_solve_oracle(const SpectralFunction& f,
                                           const PhysicalParams& params, std::size_t m = 0) {
  params.validate();
  const int n = f.n_max();
  if (n > 128) throw std::invalid_argument("dense_solve_oracle: n_max > 128 not supported");
  if (m == 0) m = default_grid(n);
  InterfaceKernels K(f, m, InterfaceKernels::kD);
  const VorticityField F = forcing_F(f, params, m);

  const int dim = 2 * n;
  auto coords_of = [n](const SpectralFunction& g) {
    Eigen::VectorXd x(2 * n);
    for (int k = 1; k <= n; ++k) {
      x(k - 1) = g.coef(k).real();
      x(n + k - 1) = g.coef(k).imag();
    }
    return x;
  };

  Eigen::MatrixXd D(dim, dim);
  for (int k = 1; k <= n; ++k) {
    // basis with unit real part at mode k: 2 cos(k a); unit imaginary: -2 sin(k a)
    D.col(k - 1) = coords_of(K.apply_D(harmonic(k, 2.0, 0.0, n)));
    D.col(n + k - 1) = coords_of(K.apply_D(harmonic(k, 0.0, -2.0, n)));
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(dim, dim) - 2.0 * params.A_mu * D;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 1e-13)) {
    std::ostringstream msg;
    msg << "dense_solve_oracle: collocation matrix near-singular, rcond = " << rc;
    throw SolverError(msg.str());
  }
  const Eigen::VectorXd x = lu.solve(coords_of(F.omega));

  SpectralFunction w(n);
  for (int k = 1; k <= n; ++k) {
    w.set_coef(k, Complex{x(k - 1), x(n + k - 1)});
  }
  DenseSolveResult out{VorticityField(w), 0.0, rc};
  out.residual = detail::residual_norm(K, out.omega.omega, F.omega, 2.0 * params.A_mu);
  return out;
}

// Linearization of the vorticity around the circle:
//   w1(f) = 2 A_mu A_rhosigma (∂a(f sin a) - |∂a|(f cos a)) - 2(∂a^3 f + ∂a f)
//           - 2 A_rhosigma ∂a(f sin a).
inline VorticityField linear_vorticity(const SpectralFunction& f, const PhysicalParams& params) {
  params.validate();
  const SpectralFunction dfs = derivative(mul_by_sin(f), 1);
  const SpectralFunction lfc = lambda_op(mul_by_cos(f));
  SpectralFunction w = (2.0 * params.A_mu * params.A_rhosigma) * (dfs - lfc);
  w = w - 2.0 * (derivative(f, 3) + derivative(f, 1));
  w = w - (2.0 * params.A_rhosigma) * dfs;
  return VorticityField(w.resized(f.n_max()));
}

}  // namespace muskat
