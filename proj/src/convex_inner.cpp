#include "curlvar/convex_inner.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "curlvar/energy.hpp"
#include "curlvar/errors.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/spectral.hpp"
#include "node_multigrid.hpp"

namespace curlvar {
namespace {

// Point of the search space: a potential plus spectral coordinates.
struct Point {
  ScalarField xi;
  Eigen::VectorXd z;
};

void axpy(Point& y, double a, const Point& x) {
  y.xi.axpy(a, x.xi);
  y.z += a * x.z;
}

double dot(const Point& a, const Point& b) { return inner(a.xi, b.xi) + a.z.dot(b.z); }

constexpr double kWeightFloor = 1e-8;

// Edge weights of the preconditioner: the diagonal of the nonlinear Hessian
// in the edge basis plus |lambda|, floored relative to the largest weight.
VectorField preconditioner_weights(const CornerSamples& cells, double lambda) {
  CornerSamples d = cells;
  auto& [x, y, z] = d.comp;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double m2 = x[n] * x[n] + y[n] * y[n] + z[n] * z[n];
    const double m4 = 0.125 * m2 * m2;
    x[n] = m4 + 0.5 * m2 * x[n] * x[n];
    y[n] = m4 + 0.5 * m2 * y[n] * y[n];
    z[n] = m4 + 0.5 * m2 * z[n] * z[n];
  }
  VectorField w = to_corners_adjoint(d);
  double peak = 0.0;
  for (int c = 0; c < 3; ++c)
    for (double& v : w[c].span()) {
      v += std::abs(lambda);
      peak = std::max(peak, v);
    }
  const double floor = std::max(kWeightFloor * peak, 1e-300);
  for (int c = 0; c < 3; ++c)
    for (double& v : w[c].span()) v = std::max(v, floor);
  return w;
}

class InnerProblem {
public:
  InnerProblem(const VectorField& u0, double lambda, const SpectralSubspace& sub)
      : u0_(u0), lambda_(lambda), sub_(sub), k_(sub.dim()) {
    const VectorField cu0 = curl(u0);
    std::vector<VectorField> ce;
    for (const EigenPair& p : sub.pairs) ce.push_back(curl(p.e_k));
    b_ = Eigen::VectorXd(k_);
    K_ = Eigen::MatrixXd(k_, k_);
    for (int i = 0; i < k_; ++i) {
      b_(i) = inner(cu0, ce[i]);
      for (int j = 0; j <= i; ++j) K_(i, j) = K_(j, i) = inner(ce[i], ce[j]);
    }
  }

  int dim() const { return k_; }

  VectorField field(const Point& p) const {
    VectorField u = u0_ + correction(p);
    return u;
  }

  VectorField correction(const Point& p) const {
    VectorField w = grad(p.xi);
    for (int k = 0; k < k_; ++k) w.axpy(p.z(k), sub_.pairs[k].e_k);
    return w;
  }

  // Objective minus the constant 1/2 |curl u0|^2 shift, and int F separately.
  double objective(const Point& p, const VectorField& u, double* f_value = nullptr) const {
    const double f = l6_pow6(u) / 6.0 - 0.5 * lambda_ * norm_sq(u);
    if (f_value) *f_value = f;
    return f - p.z.dot(b_) - 0.5 * p.z.dot(K_ * p.z);
  }

  // r = |u|^4 u - lambda u: edge representative of the derivative of int F.
  VectorField force(const VectorField& u) const {
    VectorField r = nonlinear_gradient(u);
    r.axpy(-lambda_, u);
    return r;
  }

  Point gradient(const Point& p, const VectorField& r) const {
    Point g{div(r), Eigen::VectorXd(k_)};
    g.xi *= -1.0;
    for (int k = 0; k < k_; ++k) g.z(k) = inner(r, sub_.pairs[k].e_k);
    g.z -= b_ + K_ * p.z;
    return g;
  }

  Point hessian(const CornerSamples& cells, const Point& d) const {
    const VectorField du = correction(d);
    VectorField hdu = nonlinear_hessian_apply(cells, du);
    hdu.axpy(-lambda_, du);
    Point out{div(hdu), Eigen::VectorXd(k_)};
    out.xi *= -1.0;
    for (int k = 0; k < k_; ++k) out.z(k) = inner(hdu, sub_.pairs[k].e_k);
    out.z -= K_ * d.z;
    return out;
  }

  // Diagonal of the z block of the Hessian.
  Eigen::VectorXd z_diagonal(const CornerSamples& cells) const {
    Eigen::VectorXd diag(k_);
    for (int k = 0; k < k_; ++k) {
      const VectorField& e = sub_.pairs[k].e_k;
      VectorField he = nonlinear_hessian_apply(cells, e);
      he.axpy(-lambda_, e);
      diag(k) = std::max(inner(he, e) - K_(k, k), 1e-12 * (1.0 + std::abs(lambda_)));
    }
    return diag;
  }

  const SpectralSubspace& subspace() const { return sub_; }

private:
  const VectorField& u0_;
  double lambda_;
  const SpectralSubspace& sub_;
  int k_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd K_;
};

struct TestDirection {
  VectorField zeta;
  double l6;
};

InnerSolution solve(const VectorField& u0, const NonlinearitySpec& spec, const SpectralSubspace& sub,
                    const InnerOptions& options) {
  if (u0.location() != Location::edge) throw InvalidField("inner minimization expects an edge field");
  if (!u0.all_finite()) throw InvalidField("field has non-finite entries");
  if (spec.lambda > 0.0) throw DomainError("the nonlinearity needs lambda <= 0");
  if (!(options.tol > 0.0)) throw DomainError("inner tolerance must be positive");
  for (const EigenPair& p : sub.pairs)
    if (!(p.e_k.grid() == u0.grid())) throw InvalidField("spectral subspace lives on another grid");

  const GridSpec& g = u0.grid();
  InnerProblem problem(u0, spec.lambda, sub);
  const int k = problem.dim();

  Point x{ScalarField(g, Location::node), Eigen::VectorXd::Zero(k)};
  if (options.initial_xi) {
    if (!(options.initial_xi->grid() == g)) throw InvalidField("initial potential lives on another grid");
    x.xi = *options.initial_xi;
    x.xi.enforce_boundary();
  }
  if (!options.initial_z.empty()) {
    if (static_cast<int>(options.initial_z.size()) != k)
      throw ContractViolation("initial spectral coordinates do not match the subspace");
    for (int i = 0; i < k; ++i) x.z(i) = options.initial_z[i];
  }

  std::vector<TestDirection> tests;
  for (int t = 0; t < options.random_tests; ++t) {
    VectorField zeta = grad(random_potential(g, options.test_seed + 104729 * t));
    const double l6 = lp_norm(zeta, 6.0);
    tests.push_back({std::move(zeta), l6});
  }
  for (const EigenPair& p : sub.pairs) tests.push_back({p.e_k, lp_norm(p.e_k, 6.0)});

  VectorField u = problem.field(x);
  double f_value = 0.0;
  double phi = problem.objective(x, u, &f_value);
  if (!std::isfinite(phi)) throw NumericalFailure("inner objective is not finite");

  InnerSolution out;
  out.history.push_back(phi);

  const double area = std::abs(spec.lambda) * std::pow(g.volume(), 2.0 / 3.0);
  auto force_scale = [&](const VectorField& f) {
    const double l6f = lp_norm(f, 6.0);
    return std::pow(l6f, 5) + area * l6f;
  };
  // Floor relative to the input so a near-total cancellation stays measurable.
  const double scale_floor = std::max(1e-3 * force_scale(u0), 1e-300);

  auto residual_of = [&](const Point& grad_point, const VectorField& r) {
    const double scale = std::max(force_scale(u), scale_floor);
    double worst = 0.0;
    // Steepest direction in the potential metric.
    ScalarField s = solve_dirichlet_poisson(grad_point.xi);
    VectorField steep = grad(s);
    const double l6 = lp_norm(steep, 6.0);
    if (l6 > 0.0) worst = std::abs(inner(r, steep)) / l6;
    for (int t = 0; t < options.random_tests; ++t)
      worst = std::max(worst, std::abs(inner(r, tests[t].zeta)) / tests[t].l6);
    for (int i = 0; i < k; ++i)
      worst = std::max(worst, std::abs(grad_point.z(i)) / tests[options.random_tests + i].l6);
    return worst / scale;
  };

  VectorField r = problem.force(u);
  Point gpt = problem.gradient(x, r);
  double res = residual_of(gpt, r);
  int polish = 0;
  int it = 0;
  while (true) {
    if (res <= options.tol) {
      if (polish >= options.polish_steps || res == 0.0) break;
      ++polish;
    }
    if (it >= options.max_iter) {
      throw SolverFailure("inner convex minimization hit its iteration cap", res, it);
    }
    ++it;

    // Newton direction by preconditioned CG on H d = -g.
    const CornerSamples cells = to_corners(u);
    const Eigen::VectorXd zdiag = problem.z_diagonal(cells);
    auto apply_h = [&](const Point& d) { return problem.hessian(cells, d); };
    double sigma = 1.0;
    const detail::NodeMultigrid mg(preconditioner_weights(cells, spec.lambda));
    auto scaled_poisson = [&](const ScalarField& q) { return mg.apply(q); };
    auto precondition = [&](const Point& q) {
      Point z{scaled_poisson(q.xi), q.z.cwiseQuotient(zdiag)};
      z.xi *= sigma;
      return z;
    };
    {
      // Scale the potential block by the Hessian's Rayleigh quotient along the
      // preconditioned gradient so both blocks are comparably weighted.
      Point probe{scaled_poisson(gpt.xi), Eigen::VectorXd::Zero(k)};
      const double pp = dot(probe, apply_h(probe));
      const double gg = inner(probe.xi, gpt.xi);
      if (pp > 0.0 && gg > 0.0) sigma = gg / pp;
    }

    Point d{ScalarField(g, Location::node), Eigen::VectorXd::Zero(k)};
    Point rr = gpt;
    rr.xi *= -1.0;
    rr.z *= -1.0;
    Point zz = precondition(rr);
    Point pp = zz;
    double rz = dot(rr, zz);
    const double rz0 = rz;
    const double forcing = std::min(0.25, std::sqrt(res));
    for (int cg = 0; cg < options.max_cg && rz > 0.0; ++cg) {
      const Point hp = apply_h(pp);
      const double curv = dot(pp, hp);
      ++out.cg_iterations;
      if (!(curv > 0.0)) {
        if (cg == 0) d = zz;
        break;
      }
      const double alpha = rz / curv;
      axpy(d, alpha, pp);
      axpy(rr, -alpha, hp);
      zz = precondition(rr);
      const double rz_new = dot(rr, zz);
      if (rz_new <= forcing * forcing * rz0 || rz_new <= 1e-30 * rz0) break;
      pp.xi *= rz_new / rz;
      pp.z *= rz_new / rz;
      axpy(pp, 1.0, zz);
      rz = rz_new;
    }

    // Armijo backtracking with expansion for flat (degenerate) directions.
    const double slope = dot(gpt, d);
    if (!(slope < 0.0)) {
      if (res <= options.tol) break;
      throw SolverFailure("inner Newton direction is not a descent direction", res, it);
    }
    auto trial = [&](double step, VectorField& u_out, Point& x_out) {
      x_out = x;
      axpy(x_out, step, d);
      u_out = problem.field(x_out);
      const double value = problem.objective(x_out, u_out);
      if (!std::isfinite(value)) throw NumericalFailure("inner line search produced a non-finite value");
      return value;
    };
    double step = 1.0;
    Point x_new;
    VectorField u_new;
    double phi_new = trial(step, u_new, x_new);
    const bool at_rounding = std::abs(slope) <= 1e-14 * std::max(std::abs(phi), 1e-300);
    if (!at_rounding) {
      if (phi_new <= phi + 1e-4 * step * slope) {
        while (step < 64.0) {
          Point x2;
          VectorField u2;
          const double phi2 = trial(2.0 * step, u2, x2);
          if (!(phi2 < phi_new)) break;
          step *= 2.0;
          phi_new = phi2;
          x_new = std::move(x2);
          u_new = std::move(u2);
        }
      } else {
        while (!(phi_new <= phi + 1e-4 * step * slope)) {
          step *= 0.5;
          if (step < 1e-12) {
            if (res <= options.tol) goto done;
            throw SolverFailure("inner line search stalled", res, it);
          }
          phi_new = trial(step, u_new, x_new);
        }
      }
    }
    x = std::move(x_new);
    u = std::move(u_new);
    phi = problem.objective(x, u, &f_value);
    out.history.push_back(phi);
    r = problem.force(u);
    gpt = problem.gradient(x, r);
    res = residual_of(gpt, r);
  }
done:
  out.iterations = it;
  out.optimality_residual = res;
  out.objective = phi;
  out.F_value = f_value;
  out.w_tilde = problem.correction(x);
  out.xi = std::move(x.xi);
  out.z.assign(x.z.data(), x.z.data() + k);
  return out;
}

}  // namespace

InnerSolution minimize_w(const VectorField& u, const NonlinearitySpec& spec, const InnerOptions& options) {
  static const SpectralSubspace empty;
  return solve(u, spec, empty, options);
}

InnerSolution minimize_w_tilde(const VectorField& v_plus, const NonlinearitySpec& spec,
                               const SpectralSubspace& Vtilde, const InnerOptions& options) {
  return solve(v_plus, spec, Vtilde, options);
}

}  // namespace curlvar
