#include "curlvar/groundstate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "curlvar/energy.hpp"
#include "curlvar/errors.hpp"
#include "curlvar/helmholtz.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/parallel.hpp"
#include "curlvar/reduce.hpp"
#include "curlvar/rescale.hpp"
#include "curlvar/spectral.hpp"

namespace curlvar {
namespace {

double curl_norm(const VectorField& v) { return std::sqrt(norm_sq(curl(v))); }

VectorField normalized(VectorField v) {
  const double n = curl_norm(v);
  if (!(n > 0.0)) throw DegenerateInput("field has no curl");
  v *= 1.0 / n;
  return v;
}

double shortest_edge(const GridSpec& g) { return std::min({g.lengths[0], g.lengths[1], g.lengths[2]}); }

std::array<double, 3> cell_center(const GridSpec& g, int i, int j, int k) {
  return {g.origin[0] + (i + 0.5) * g.spacing(0), g.origin[1] + (j + 0.5) * g.spacing(1),
          g.origin[2] + (k + 0.5) * g.spacing(2)};
}

double distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

// Energy-weighted centroid of the cell curl energy (absolute coordinates).
std::array<double, 3> centroid(const GridSpec& g, const std::vector<double>& e) {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  double total = 0.0;
  const auto& n = g.cells;
  std::size_t idx = 0;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j)
      for (int k = 0; k < n[2]; ++k, ++idx) {
        const auto x = cell_center(g, i, j, k);
        for (int d = 0; d < 3; ++d) c[d] += e[idx] * x[d];
        total += e[idx];
      }
  if (!(total > 0.0)) return g.center();
  for (double& x : c) x /= total;
  return c;
}

double smoothstep_cutoff(double r, double R) {
  if (r <= 0.5 * R) return 1.0;
  if (r >= R) return 0.0;
  const double s = (r - 0.5 * R) / (0.5 * R);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

}  // namespace

std::vector<double> cell_curl_energy(const VectorField& u) {
  const VectorField b = curl(u);
  const GridSpec& g = u.grid();
  const auto& n = g.cells;
  const double dv = g.cell_volume();
  std::vector<double> e(static_cast<std::size_t>(n[0]) * n[1] * n[2], 0.0);
  auto cell = [&](int i, int j, int k) -> double& { return e[(static_cast<std::size_t>(i) * n[1] + j) * n[2] + k]; };
  for (int c = 0; c < 3; ++c) {
    const Array3& a = b[c];
    const auto d = a.dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k) {
          const double m = a(i, j, k) * a(i, j, k) * dv;
          if (m == 0.0) continue;
          std::array<int, 3> hi{i, j, k};
          std::array<int, 3> lo{i, j, k};
          lo[c] -= 1;
          const bool has_lo = lo[c] >= 0, has_hi = hi[c] < n[c];
          if (has_lo && has_hi) {
            cell(lo[0], lo[1], lo[2]) += 0.5 * m;
            cell(hi[0], hi[1], hi[2]) += 0.5 * m;
          } else if (has_lo) {
            cell(lo[0], lo[1], lo[2]) += m;
          } else {
            cell(hi[0], hi[1], hi[2]) += m;
          }
        }
  }
  return e;
}

namespace {

// Metric of the descent: Q(a, b) = <curl a, curl b> + lambda <a, b>, positive
// definite on V+. For lambda = 0 it is the curl inner product.
double metric(const VectorField& a, const VectorField& b, double lambda) {
  double m = inner(curl(a), curl(b));
  if (lambda != 0.0) m += lambda * inner(a, b);
  return m;
}

// Riesz gradient of Psi_lambda at v in the metric Q, given its Nehari point,
// projected to the sphere tangent space of V+. With u = t v + w_tilde the
// derivative is h -> t^2 Q(v, h) - t <|u|^4 u, h> on V+.
VectorField sphere_gradient(const VectorField& v, const NehariPoint& p, double lambda, const SpectralSubspace& sub) {
  const double t = p.t;
  VectorField q;
  if (lambda == 0.0 && sub.dim() == 0) {
    q = project_V(solve_hodge(nonlinear_gradient(p.u)), 1e-12);
  } else {
    VectorField n = remove_subspace(project_V(nonlinear_gradient(p.u), 1e-12), sub);
    q = remove_subspace(project_V(solve_hodge(n, lambda), 1e-12), sub);
  }
  VectorField g = (t * t) * v;
  g.axpy(-t, q);
  g.axpy(-metric(g, v, lambda) / metric(v, v, lambda), v);
  return g;
}

}  // namespace

SphereEvaluation evaluate_sphere(const VectorField& v, const NehariOptions& options) {
  static const SpectralSubspace empty;
  SphereEvaluation out;
  out.point = project_nehari(v, options);
  out.psi = out.point.J_value;
  out.gradient = sphere_gradient(v, out.point, 0.0, empty);
  out.gradient_norm = curl_norm(out.gradient);
  return out;
}

SphereEvaluation evaluate_sphere(const VectorField& v, double lambda, const SpectralSubspace& Vtilde,
                                 const NehariOptions& options) {
  if (lambda == 0.0 && Vtilde.dim() == 0) return evaluate_sphere(v, options);
  SphereEvaluation out;
  out.point = project_nehari_lambda(v, lambda, Vtilde, options);
  out.psi = out.point.J_value;
  out.gradient = sphere_gradient(v, out.point, lambda, Vtilde);
  out.gradient_norm = std::sqrt(metric(out.gradient, out.gradient, lambda));
  return out;
}

double sphere_objective(const VectorField& v, const NehariOptions& options) {
  return project_nehari(v, options).J_value;
}

VectorField initial_field(const GridSpec& grid, const GroundStateConfig& config) {
  grid.validate();
  if (config.initial) {
    if (!(config.initial->grid() == grid)) throw InvalidField("initial field lives on another grid");
    return normalized(project_V(*config.initial));
  }
  const auto c = grid.center();
  const double sigma = config.ansatz_width * shortest_edge(grid);
  // curl(e_z G) for a Gaussian G: a swirl about the z axis.
  const VectorField swirl = VectorField::sample(grid, Location::edge, [&](double x, double y, double z) {
    const double dx = x - c[0], dy = y - c[1], dz = z - c[2];
    const double gauss = std::exp(-(dx * dx + dy * dy + dz * dz) / (2.0 * sigma * sigma));
    return std::array<double, 3>{dy * gauss, -dx * gauss, 0.0};
  });
  VectorField v = normalized(project_V(swirl));
  if (config.noise > 0.0) {
    const VectorField smooth = project_V(solve_hodge(solve_hodge(random_edge_field(grid, config.seed))));
    v.axpy(config.noise, normalized(smooth));
  }
  return normalized(v);
}

namespace {

// Weighted face sums of |curl v|^2 with weights 1, x_i - x0_i and |x - x0|^2.
template <typename Visit>
void for_each_face(const VectorField& b, Visit&& visit) {
  const GridSpec& g = b.grid();
  const auto x0 = g.center();
  for (int c = 0; c < 3; ++c) {
    const auto off = component_offset(Location::face, c);
    const auto d = b[c].dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k) {
          const std::array<double, 3> x{g.origin[0] + (i + off[0]) * g.spacing(0) - x0[0],
                                        g.origin[1] + (j + off[1]) * g.spacing(1) - x0[1],
                                        g.origin[2] + (k + off[2]) * g.spacing(2) - x0[2]};
          visit(c, i, j, k, x);
        }
  }
}

}  // namespace

std::array<double, 4> curl_moments(const VectorField& v) {
  const VectorField b = curl(v);
  std::array<std::vector<double>, 5> terms;
  for_each_face(b, [&](int c, int i, int j, int k, const std::array<double, 3>& x) {
    const double e = b[c](i, j, k) * b[c](i, j, k);
    terms[0].push_back(e);
    for (int a = 0; a < 3; ++a) terms[1 + a].push_back(x[a] * e);
    terms[4].push_back((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * e);
  });
  const double total = pairwise_sum(terms[0]);
  if (!(total > 0.0)) throw DegenerateInput("curl_moments needs a field with curl");
  return {pairwise_sum(terms[1]) / total, pairwise_sum(terms[2]) / total, pairwise_sum(terms[3]) / total,
          pairwise_sum(terms[4]) / total};
}

std::array<VectorField, 4> curl_moment_gradients(const VectorField& v) {
  const VectorField b = curl(v);
  const double total = norm_sq(b);
  if (!(total > 0.0)) throw DegenerateInput("curl_moment_gradients needs a field with curl");
  const std::array<double, 4> m = curl_moments(v);
  std::array<VectorField, 4> weighted{VectorField(b.grid(), Location::face), VectorField(b.grid(), Location::face),
                                      VectorField(b.grid(), Location::face), VectorField(b.grid(), Location::face)};
  for_each_face(b, [&](int c, int i, int j, int k, const std::array<double, 3>& x) {
    const double f = b[c](i, j, k);
    for (int a = 0; a < 3; ++a) weighted[a][c](i, j, k) = x[a] * f;
    weighted[3][c](i, j, k) = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * f;
  });
  // d(A/E)[h] = 2 (<rho b, curl h> - (A/E) <b, curl h>) / E
  std::array<VectorField, 4> out{VectorField(v.grid()), VectorField(v.grid()), VectorField(v.grid()),
                                 VectorField(v.grid())};
  for (int q = 0; q < 4; ++q) {
    VectorField g = project_V(solve_hodge(curl_adjoint(weighted[q])), 1e-12);
    g.axpy(-m[q], v);
    g *= 2.0 / total;
    out[q] = std::move(g);
  }
  return out;
}

GroundStateResult descend_sphere(const VectorField& v0, double lambda, const SpectralSubspace& Vtilde,
                                 const GroundStateConfig& config) {
  if (!(config.tol > 0.0) || !(config.inner_tol > 0.0)) throw DomainError("tolerances must be positive");
  const GridSpec& grid = v0.grid();
  const bool scale_free = lambda == 0.0 && Vtilde.dim() == 0;
  const bool use_slice = scale_free && config.quotient_symmetries;
  const int recenter_every = scale_free ? config.recenter_every : 0;

  std::vector<double> radii = config.concentration_radii;
  if (radii.empty()) {
    const double h = std::min({grid.spacing(0), grid.spacing(1), grid.spacing(2)});
    radii = {2.0 * h, 4.0 * h, 8.0 * h};
  }

  auto to_sphere = [&](const VectorField& x) {
    VectorField y = project_V(x);
    if (Vtilde.dim() > 0) y = remove_subspace(y, Vtilde);
    return normalized(y);
  };

  GroundStateResult out;
  out.grid = grid;
  out.seed = config.seed;
  VectorField v = to_sphere(v0);

  // Inner tolerance follows the outer gradient, down to config.inner_tol.
  auto inner_tol_for = [&](double gradient_rel) {
    return std::clamp(1e-2 * gradient_rel, config.inner_tol, std::max(config.inner_tol, 1e-5));
  };
  auto eval_at = [&](const VectorField& x, const NehariPoint* warm, double tol) {
    NehariOptions o;
    o.tol = tol;
    o.inner.tol = tol;
    if (warm) {
      if (scale_free) {
        o.inner.initial_xi = warm->xi;
      } else {
        ScalarField xi = warm->xi;
        xi *= warm->t;
        o.inner.initial_xi = std::move(xi);
        std::vector<double> z = warm->z;
        for (double& zk : z) zk *= warm->t;
        o.inner.initial_z = std::move(z);
        o.t_guess = warm->t;
      }
    }
    SphereEvaluation e = evaluate_sphere(x, lambda, Vtilde, o);
    return e;
  };

  // Slice: centroid at the box center, second moment fixed.
  std::array<double, 4> target{0.0, 0.0, 0.0, use_slice ? curl_moments(v)[3] : 0.0};
  std::vector<VectorField> normals;  // curl-orthonormal, tangent to the sphere at v
  auto update_normals = [&]() {
    normals.clear();
    if (!use_slice) return;
    const VectorField cv = curl(v);
    for (VectorField& x : curl_moment_gradients(v)) {
      x.axpy(-inner(curl(x), cv), v);
      const double before = curl_norm(x);
      for (int pass = 0; pass < 2; ++pass)
        for (const VectorField& q : normals) x.axpy(-inner(curl(x), curl(q)), q);
      const double after = curl_norm(x);
      if (!(after > 1e-8 * before)) continue;
      x *= 1.0 / after;
      normals.push_back(std::move(x));
    }
  };
  auto slice = [&](VectorField x) {
    for (const VectorField& q : normals) x.axpy(-inner(curl(x), curl(q)), q);
    return x;
  };
  // Newton corrections back onto the slice (least squares in the curl metric).
  auto onto_slice = [&](VectorField x) {
    if (!use_slice) return x;
    for (int pass = 0; pass < 2; ++pass) {
      const std::array<double, 4> m = curl_moments(x);
      const std::array<VectorField, 4> grads = curl_moment_gradients(x);
      Eigen::Matrix4d gram;
      Eigen::Vector4d rhs;
      for (int a = 0; a < 4; ++a) {
        rhs(a) = m[a] - target[a];
        for (int b = 0; b < 4; ++b) gram(a, b) = inner(curl(grads[a]), curl(grads[b]));
      }
      const Eigen::Vector4d coef = gram.ldlt().solve(rhs);
      for (int a = 0; a < 4; ++a) x.axpy(-coef(a), grads[a]);
      x = to_sphere(x);
    }
    return x;
  };
  // Gradient restricted to the slice; returns its relative norm.
  auto restrict = [&](SphereEvaluation& e) {
    if (use_slice) {
      update_normals();
      e.gradient = slice(std::move(e.gradient));
      e.gradient_norm = curl_norm(e.gradient);
    }
    return e.gradient_norm / std::abs(e.psi);
  };

  if (use_slice) v = onto_slice(std::move(v));

  double tol_now = std::max(config.inner_tol, 1e-5);
  SphereEvaluation cur = eval_at(v, nullptr, tol_now);
  double grad_rel = restrict(cur);
  out.history.push_back({cur.psi, grad_rel, false});
  VectorField d = cur.gradient;
  double tau = 0.05;  // Q length of the trial step
  int since_recenter = 0;

  int it = 0;
  for (; it < config.max_iter; ++it) {
    const double wanted = inner_tol_for(grad_rel);
    if (wanted < 0.5 * tol_now || (grad_rel <= config.tol && tol_now > config.inner_tol)) {
      // Tighten the inner solves before trusting small gradients.
      tol_now = grad_rel <= config.tol ? config.inner_tol : wanted;
      cur = eval_at(v, &cur.point, tol_now);
      grad_rel = restrict(cur);
      d = cur.gradient;
    }
    if (grad_rel <= config.tol && tol_now <= config.inner_tol) {
      out.converged = true;
      break;
    }

    bool want_recenter = recenter_every > 0 && since_recenter >= recenter_every;
    if (!want_recenter && recenter_every > 0 && since_recenter > 0) {
      const ConcentrationReport cr = concentration_report({v, v}, {radii.front()}, config.concentration_fraction);
      want_recenter = cr.flagged;
    }
    if (want_recenter) {
      since_recenter = 0;
      const RecenterResult rc = recenter(v, config.recenter_target);
      Recenter record{rc.s, rc.y, it, cur.psi, cur.psi, false};
      try {
        VectorField moved = to_sphere(rc.u);
        SphereEvaluation trial = eval_at(moved, &cur.point, tol_now);
        record.J_after = trial.psi;
        if (trial.psi <= cur.psi * (1.0 + config.recenter_tolerance)) {
          record.accepted = true;
          v = std::move(moved);
          if (use_slice) target = {0.0, 0.0, 0.0, curl_moments(v)[3]};
          cur = std::move(trial);
          grad_rel = restrict(cur);
          d = cur.gradient;
          out.history.push_back({cur.psi, grad_rel, true});
        }
      } catch (const DegenerateInput&) {
        record.J_after = std::numeric_limits<double>::infinity();
      }
      out.recenters.push_back(record);
      if (record.accepted) continue;
    }

    double slope = metric(cur.gradient, d, lambda);
    if (!(slope > 0.0)) {
      d = cur.gradient;
      slope = cur.gradient_norm * cur.gradient_norm;
    }

    bool accepted = false;
    SphereEvaluation next;
    VectorField v_next;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const double d_norm = std::sqrt(metric(d, d, lambda));
      double step = tau / d_norm;
      for (int bt = 0; bt < 30; ++bt) {
        VectorField trial = v;
        trial.axpy(-step, d);
        try {
          trial = onto_slice(to_sphere(trial));
          SphereEvaluation e = eval_at(trial, &cur.point, tol_now);
          if (e.psi <= cur.psi - 1e-4 * step * slope) {
            accepted = true;
            next = std::move(e);
            v_next = std::move(trial);
            tau = std::min(0.5, 2.0 * step * d_norm);
            break;
          }
        } catch (const DegenerateInput&) {
        }
        step *= 0.5;
      }
      if (!accepted) {
        // Retry once along the plain gradient.
        const bool was_gradient = std::abs(slope - cur.gradient_norm * cur.gradient_norm) <= 1e-14 * slope;
        if (attempt == 0 && !was_gradient) {
          d = cur.gradient;
          slope = cur.gradient_norm * cur.gradient_norm;
          tau = 0.05;
        } else {
          break;
        }
      }
    }
    if (!accepted) break;  // stalled: reported as not converged

    // Polak-Ribiere+ with transport by tangent (and slice) projection.
    v = std::move(v_next);
    const double vv = metric(v, v, lambda);
    const double old_norm_sq = cur.gradient_norm * cur.gradient_norm;
    const VectorField g_old = cur.gradient;
    cur = std::move(next);
    grad_rel = restrict(cur);
    auto transport = [&](VectorField x) {
      x.axpy(-metric(x, v, lambda) / vv, v);
      return use_slice ? slice(std::move(x)) : x;
    };
    const VectorField g_prev = transport(g_old);
    const VectorField d_prev = transport(d);
    double beta = metric(cur.gradient, cur.gradient - g_prev, lambda) / old_norm_sq;
    beta = std::max(0.0, beta);
    d = cur.gradient;
    d.axpy(beta, d_prev);
    out.history.push_back({cur.psi, grad_rel, false});
    ++since_recenter;
  }
  if (!out.converged && grad_rel <= config.tol && tol_now <= config.inner_tol) out.converged = true;

  out.iterations = it;
  out.gradient_norm = grad_rel;
  out.point = std::move(cur.point);
  out.v = std::move(v);
  if (scale_free) {
    out.S_estimate = std::pow(3.0 * out.point.J_value, 2.0 / 3.0);
    const double ratio = out.point.curl_sq / std::pow(out.point.l6_6, 1.0 / 3.0);
    out.chain_residual = std::abs(out.S_estimate - ratio) / out.S_estimate;
  }
  return out;
}

GroundStateResult minimize_sphere(const GridSpec& grid, const GroundStateConfig& config) {
  static const SpectralSubspace empty;
  VectorField v = initial_field(grid, config);
  if (config.recenter_every > 0 && !config.initial) v = recenter(v, config.recenter_target).u;
  return descend_sphere(v, 0.0, empty, config);
}

std::vector<GroundStateResult> minimize_sphere_seeds(const GridSpec& grid, const GroundStateConfig& config,
                                                     const std::vector<std::uint64_t>& seeds) {
  std::vector<GroundStateResult> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    GroundStateConfig c = config;
    c.seed = seeds[i];
    out[i] = minimize_sphere(grid, c);
  });
  return out;
}

double sobolev_oracle(const GridSpec& grid, double eps) {
  grid.validate();
  if (!(eps > 0.0)) throw DomainError("sobolev_oracle needs eps > 0");
  const auto c = grid.center();
  const double R = 0.9 * 0.5 * shortest_edge(grid);
  const double amp = std::pow(3.0, 0.25);
  ScalarField U = ScalarField::sample(grid, Location::node, [&](double x, double y, double z) {
    const double r = std::sqrt((x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) + (z - c[2]) * (z - c[2]));
    return amp / std::sqrt(eps * eps + r * r) * smoothstep_cutoff(r, R);
  });
  U.enforce_boundary();
  const double dirichlet = norm_sq(grad(U));
  std::vector<double> p6(U.values().span().begin(), U.values().span().end());
  for (double& x : p6) x = x * x * x * x * x * x;
  const double l6_6 = grid.cell_volume() * pairwise_sum(p6);
  return dirichlet / std::cbrt(l6_6);
}

ConcentrationReport concentration_report(const std::vector<VectorField>& iterates, const std::vector<double>& radii,
                                         double fraction) {
  if (iterates.size() < 2) throw ContractViolation("concentration_report needs at least two iterates");
  if (radii.empty()) throw ContractViolation("concentration_report needs at least one radius");
  ConcentrationReport out;
  out.ball_radii = radii;
  std::sort(out.ball_radii.begin(), out.ball_radii.end());
  for (const VectorField& u : iterates) {
    const GridSpec& g = u.grid();
    const std::vector<double> e = cell_curl_energy(u);
    const double total = pairwise_sum(e);
    const std::size_t peak = std::max_element(e.begin(), e.end()) - e.begin();
    const auto& n = g.cells;
    const int pi = static_cast<int>(peak / (static_cast<std::size_t>(n[1]) * n[2]));
    const int pj = static_cast<int>((peak / n[2]) % n[1]);
    const int pk = static_cast<int>(peak % n[2]);
    const auto center = cell_center(g, pi, pj, pk);
    std::vector<double> mass(out.ball_radii.size(), 0.0);
    std::size_t idx = 0;
    for (int i = 0; i < n[0]; ++i)
      for (int j = 0; j < n[1]; ++j)
        for (int k = 0; k < n[2]; ++k, ++idx) {
          const double r = distance(cell_center(g, i, j, k), center);
          for (std::size_t q = 0; q < mass.size(); ++q)
            if (r <= out.ball_radii[q]) mass[q] += e[idx];
        }
    for (double& m : mass) m = std::min(m, total);
    if (total > 0.0 && mass.front() >= fraction * total && !out.flagged) {
      out.flagged = true;
      out.location = center;
    }
    out.local_curl_mass.push_back(std::move(mass));
    out.total_curl_mass.push_back(total);
  }
  return out;
}

RecenterResult recenter(const VectorField& u, double target_fraction) {
  if (!(target_fraction > 0.0)) throw DomainError("recenter needs a positive target");
  const GridSpec& g = u.grid();
  const std::vector<double> e = cell_curl_energy(u);
  const auto c = centroid(g, e);
  const auto box_center = g.center();
  RecenterResult out;
  for (int d = 0; d < 3; ++d) out.y[d] = c[d] - box_center[d];

  std::vector<std::pair<double, double>> shells;
  shells.reserve(e.size());
  const auto& n = g.cells;
  std::size_t idx = 0;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j)
      for (int k = 0; k < n[2]; ++k, ++idx)
        if (e[idx] > 0.0) shells.emplace_back(distance(cell_center(g, i, j, k), c), e[idx]);
  std::sort(shells.begin(), shells.end());
  double total = 0.0;
  for (const auto& s : shells) total += s.second;
  double r25 = 0.0, r75 = 0.0, acc = 0.0;
  bool got25 = false;
  for (const auto& s : shells) {
    acc += s.second;
    if (!got25 && acc >= 0.25 * total) {
      r25 = s.first;
      got25 = true;
    }
    if (acc >= 0.75 * total) {
      r75 = s.first;
      break;
    }
  }
  const double spread = r75 - r25;
  out.s = spread > 0.0 ? spread / (target_fraction * shortest_edge(g)) : 1.0;
  out.u = rescale(u, out.s, out.y);
  return out;
}

double radial_fraction(const VectorField& u) {
  if (u.location() != Location::edge) throw InvalidField("radial_fraction expects an edge field");
  const GridSpec& g = u.grid();
  const double total = l6_pow6(u);
  if (!(total > 0.0)) return 0.0;
  const auto c = centroid(g, cell_curl_energy(u));
  const double h = std::min({g.spacing(0), g.spacing(1), g.spacing(2)});
  const double r_max = std::sqrt(g.lengths[0] * g.lengths[0] + g.lengths[1] * g.lengths[1] +
                                 g.lengths[2] * g.lengths[2]);
  const std::size_t bins = static_cast<std::size_t>(r_max / h) + 2;
  std::vector<double> num(bins, 0.0), den(bins, 0.0);

  auto visit = [&](auto&& body) {
    for (int comp = 0; comp < 3; ++comp) {
      const auto off = component_offset(Location::edge, comp);
      const auto d = u[comp].dims();
      for (int i = 0; i < d[0]; ++i)
        for (int j = 0; j < d[1]; ++j)
          for (int k = 0; k < d[2]; ++k) {
            const std::array<double, 3> x{g.origin[0] + (i + off[0]) * g.spacing(0) - c[0],
                                          g.origin[1] + (j + off[1]) * g.spacing(1) - c[1],
                                          g.origin[2] + (k + off[2]) * g.spacing(2) - c[2]};
            const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            const double dir = r > 0.0 ? x[comp] / r : 0.0;
            body(comp, i, j, k, static_cast<std::size_t>(r / h), dir);
          }
    }
  };
  visit([&](int comp, int i, int j, int k, std::size_t bin, double dir) {
    num[bin] += u[comp](i, j, k) * dir;
    den[bin] += dir * dir;
  });
  VectorField fit(g, Location::edge);
  visit([&](int comp, int i, int j, int k, std::size_t bin, double dir) {
    if (den[bin] > 0.0) fit[comp](i, j, k) = num[bin] / den[bin] * dir;
  });
  fit.enforce_boundary();
  return l6_pow6(fit) / total;
}

}  // namespace curlvar
