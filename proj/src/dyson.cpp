#include "wtlab/dyson.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wtlab/io.hpp"
#include "wtlab/linalg.hpp"

namespace wtlab {

namespace {

CVec vde_map(const EnsembleSpec& e, const CVec& z, const CVec& m, Exec exec) {
  return m.cwiseInverse() + z - e.a.cast<cplx>() + e.apply_S(m, exec);
}

double inf_norm(const CVec& v) { return v.cwiseAbs().maxCoeff(); }

bool upper_half(const CVec& m) { return (m.imag().array() > 0).all(); }

class UpperSolver {
 public:
  UpperSolver(const EnsembleSpec& e, const CVec& z, double tol, const DysonOptions& opt)
      : e_(e), z_(z), tol_(tol), opt_(opt) {}

  DysonSolution run() {
    const int n = e_.n;
    CVec m = CVec::Constant(n, I_unit);
    if (opt_.warm_start && opt_.warm_start->size() == n && upper_half(*opt_.warm_start) &&
        opt_.warm_start->allFinite())
      m = *opt_.warm_start;
    double res = inf_norm(vde_map(e_, z_, m, opt_.exec));
    long it = 0;
    int newton = 0, slow = 0, cooldown = 0;
    double d = 1.0, dmin = 1.0;
    while (!(res <= tol_)) {
      if (it >= opt_.max_iterations) {
        std::ostringstream msg;
        msg << "vector Dyson equation did not converge within " << opt_.max_iterations
            << " iterations (residual " << res << ")";
        throw NumericalError(msg.str());
      }
      if (opt_.allow_newton && cooldown == 0 && (res < 1e-3 || slow >= 8)) {
        ++it;
        if (newton_step(m, res)) {
          ++newton;
          slow = 0;
          continue;
        }
        cooldown = 50;
      }
      if (cooldown > 0) --cooldown;
      const CVec target = -(z_ - e_.a.cast<cplx>() + e_.apply_S(m, opt_.exec)).cwiseInverse();
      const CVec cand = (1.0 - d) * m + d * target;
      const double cres = inf_norm(vde_map(e_, z_, cand, opt_.exec));
      ++it;
      if (cres < res || d <= opt_.min_damping) {
        slow = (cres > 0.9 * res) ? slow + 1 : 0;
        m = cand;
        res = cres;
      } else {
        d = std::max(opt_.min_damping, 0.5 * d);
        dmin = std::min(dmin, d);
      }
    }
    DysonSolution s;
    s.z = z_;
    s.m = std::move(m);
    s.residual = res;
    s.iterations = it;
    s.damping_used = dmin;
    s.newton_steps = newton;
    return s;
  }

 private:
  // Newton on F(m) = 1/m + z - a + S m: (1 - M^2 S) delta = m^2 F, m <- m + lambda delta.
  bool newton_step(CVec& m, double& res) {
    const CVec f = vde_map(e_, z_, m, opt_.exec);
    const CVec m2 = m.cwiseProduct(m);
    const CVec rhs = m2.cwiseProduct(f);
    CVec delta;
    const int n = e_.n;
    if (n <= 64) {
      CMat b = CMat::Identity(n, n) - m2.asDiagonal() * e_.s.cast<cplx>();
      delta = b.partialPivLu().solve(rhs);
    } else {
      auto op = [&](const CVec& v) -> CVec {
        return v - m2.cwiseProduct(e_.apply_S(v, opt_.exec));
      };
      GmresResult g = gmres(op, rhs, 1e-13, 60, 600);
      if (!g.converged && n <= 2048) {
        CMat b = CMat::Identity(n, n) - m2.asDiagonal() * e_.s.cast<cplx>();
        delta = b.partialPivLu().solve(rhs);
      } else {
        delta = g.x;
      }
    }
    if (!delta.allFinite()) return false;
    double lambda = 1.0;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      CVec cand = m + lambda * delta;
      if (!upper_half(cand)) continue;
      const double cres = inf_norm(vde_map(e_, z_, cand, opt_.exec));
      if (cres < res) {
        m = std::move(cand);
        res = cres;
        return true;
      }
    }
    return false;
  }

  const EnsembleSpec& e_;
  const CVec& z_;
  double tol_;
  DysonOptions opt_;
};

}  // namespace

double vde_residual(const EnsembleSpec& e, const CVec& z, const CVec& m) {
  return inf_norm(vde_map(e, z, m, Exec::Serial));
}

DysonSolution solve_vde(const EnsembleSpec& e, const CVec& z, double tol, const DysonOptions& opt) {
  if (!(tol > 0)) throw ValidationError("solve_vde: tolerance must be positive");
  if (z.size() != e.n) throw ValidationError("solve_vde: spectral parameter has wrong length");
  const bool up = (z.imag().array() > 0).all();
  const bool down = (z.imag().array() < 0).all();
  if (!up && !down)
    throw ValidationError("solve_vde: Im z must be nonzero and of one sign in every entry");
  if (up) {
    UpperSolver solver(e, z, tol, opt);
    DysonSolution s = solver.run();
    s.scalar = false;
    return s;
  }
  const CVec zc = z.conjugate();
  DysonOptions o = opt;
  CVec warm;
  if (opt.warm_start) {
    warm = opt.warm_start->conjugate();
    o.warm_start = &warm;
  }
  UpperSolver solver(e, zc, tol, o);
  DysonSolution s = solver.run();
  s.z = z;
  s.m = s.m.conjugate();
  s.scalar = false;
  return s;
}

DysonSolution solve_vde(const EnsembleSpec& e, cplx z, double tol, const DysonOptions& opt) {
  DysonSolution s = solve_vde(e, CVec(CVec::Constant(e.n, z)), tol, opt);
  s.scalar = true;
  return s;
}

std::vector<DysonSolution> continue_vde(const EnsembleSpec& e, const std::vector<cplx>& targets,
                                        double tol, const DysonOptions& opt) {
  if (targets.empty()) return {};
  const int sign = sign_of(targets.front().imag());
  for (cplx z : targets)
    if (sign_of(z.imag()) != sign || sign == 0)
      throw ValidationError("continue_vde: targets must share the sign of Im z");
  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(targets[i].imag()) > std::abs(targets[j].imag());
  });
  std::vector<DysonSolution> out(targets.size());
  CVec warm;
  bool have_warm = false;
  for (std::size_t idx : order) {
    DysonOptions o = opt;
    if (have_warm) o.warm_start = &warm;
    try {
      out[idx] = solve_vde(e, targets[idx], tol, o);
    } catch (const NumericalError& err) {
      std::ostringstream msg;
      msg << "continuation failed at z = " << targets[idx] << ": " << err.what();
      throw NumericalError(msg.str());
    }
    warm = out[idx].m;
    have_warm = true;
  }
  return out;
}

CVec m_on_axis(const EnsembleSpec& e, double energy, double eta_floor, double tol, const CVec* warm,
               CVec* warm_out) {
  DysonOptions o;
  o.warm_start = warm;
  const DysonSolution s2 = solve_vde(e, cplx(energy, 2 * eta_floor), tol, o);
  o.warm_start = &s2.m;
  const DysonSolution s1 = solve_vde(e, cplx(energy, eta_floor), tol, o);
  if (warm_out) *warm_out = s1.m;
  return 2.0 * s1.m - s2.m;
}

double DensityProfile::rho_at(double energy) const {
  if (energies.empty() || energy < energies.front() || energy > energies.back()) return 0.0;
  auto it = std::upper_bound(energies.begin(), energies.end(), energy);
  if (it == energies.end()) return rho.back();
  const std::size_t i = static_cast<std::size_t>(it - energies.begin());
  if (i == 0) return rho.front();
  const double w = (energy - energies[i - 1]) / (energies[i] - energies[i - 1]);
  return (1 - w) * rho[i - 1] + w * rho[i];
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw ValidationError("uniform_grid: need hi > lo and >= 2 points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

DensityProfile density(const EnsembleSpec& e, const std::vector<double>& grid, double eta_floor,
                       double tol) {
  if (!(eta_floor > 0)) throw ValidationError("density: eta_floor must be positive");
  if (grid.size() < 2) throw ValidationError("density: grid needs at least two energies");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ValidationError("density: grid must be increasing");
  DensityProfile d;
  d.energies = grid;
  d.eta_used = eta_floor;
  d.rho.resize(grid.size());
  CVec warm;
  bool have = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CVec next;
    const CVec m0 = m_on_axis(e, grid[i], eta_floor, tol, have ? &warm : nullptr, &next);
    warm = next;
    have = true;
    d.rho[i] = std::max(0.0, avg(CVec(m0)).imag() / M_PI);
  }
  std::vector<double> cum(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (d.rho[i] + d.rho[i - 1]) * (grid[i] - grid[i - 1]);
  d.total_mass = cum.back();
  if (d.total_mass <= 0) throw NumericalError("density: zero total mass on the grid");

  const int n = e.n;
  MonotoneCubic cdf(grid, cum);
  d.quantiles.resize(n);
  for (int j = 1; j < n; ++j) d.quantiles[j - 1] = cdf.inverse(d.total_mass * j / n);
  // The extrapolated density keeps a tiny tail past the upper edge; stop gamma_N at the edge.
  d.quantiles[n - 1] = cdf.inverse(d.total_mass * (1 - 1e-6));

  double max_rho = *std::max_element(d.rho.begin(), d.rho.end());
  double max_step = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) max_step = std::max(max_step, grid[i] - grid[i - 1]);
  if (max_rho > 0 && max_step > 1.0 / (n * max_rho))
    d.warnings.push_back("energy grid is coarser than the typical quantile spacing");
  if (std::abs(d.total_mass - 1.0) > 1e-3)
    d.warnings.push_back("total mass deviates from 1 by more than 1e-3; grid may not cover the support");
  return d;
}

std::vector<int> bulk_indices(const DensityProfile& d, const SpectralDomain& dom) {
  std::vector<int> out;
  for (std::size_t i = 0; i < d.quantiles.size(); ++i)
    if (dom.rho_star <= 0 || d.rho_at(d.quantiles[i]) >= dom.rho_star)
      out.push_back(static_cast<int>(i));
  return out;
}

void write_density_csv(const DensityProfile& d, const std::string& path) {
  CsvWriter w(path, {"E", "rho"});
  for (std::size_t i = 0; i < d.energies.size(); ++i) w.row({d.energies[i], d.rho[i]});
}

void write_quantiles_csv(const DensityProfile& d, const std::string& path) {
  CsvWriter w(path, {"j", "gamma_j"});
  for (std::size_t i = 0; i < d.quantiles.size(); ++i)
    w.row({static_cast<double>(i + 1), d.quantiles[i]});
}

}  // namespace wtlab
