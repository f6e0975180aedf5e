#pragma once

#include <optional>
#include <string>

#include "wtlab/ensemble.hpp"

namespace wtlab {

struct DysonSolution {
  CVec z;              // spectral parameter per entry (constant for scalar z)
  bool scalar = true;  // whether z was given as a scalar
  CVec m;
  double residual = 0.0;
  long iterations = 0;
  double damping_used = 1.0;  // smallest damping used by the fixed-point phase
  int newton_steps = 0;
};

struct DysonOptions {
  long max_iterations = 100000;
  double min_damping = 0.05;
  const CVec* warm_start = nullptr;
  bool allow_newton = true;
  Exec exec = Exec::Serial;
};

// Residual ||1/m + z - a + S m||_inf.
double vde_residual(const EnsembleSpec& e, const CVec& z, const CVec& m);

DysonSolution solve_vde(const EnsembleSpec& e, cplx z, double tol, const DysonOptions& opt = {});
DysonSolution solve_vde(const EnsembleSpec& e, const CVec& z, double tol,
                        const DysonOptions& opt = {});

// Solves at every target, visiting them by decreasing |Im z| and warm-starting each solve
// from the previous one. Results are returned in the order of `targets`.
std::vector<DysonSolution> continue_vde(const EnsembleSpec& e, const std::vector<cplx>& targets,
                                        double tol, const DysonOptions& opt = {});

// m(E + i0) via Richardson extrapolation from eta_floor and 2 eta_floor.
CVec m_on_axis(const EnsembleSpec& e, double energy, double eta_floor, double tol,
               const CVec* warm = nullptr, CVec* warm_out = nullptr);

struct DensityProfile {
  std::vector<double> energies;
  std::vector<double> rho;
  double eta_used = 0.0;
  std::vector<double> quantiles;  // gamma_1 .. gamma_N
  double total_mass = 0.0;
  std::vector<std::string> warnings;

  // Linear interpolation of rho; zero outside the grid.
  double rho_at(double energy) const;
};

struct SpectralDomain {
  double rho_star = 0.2;
  double eta_star = 1.0;
  double eps = 0.1;
};

DensityProfile density(const EnsembleSpec& e, const std::vector<double>& grid, double eta_floor,
                       double tol);

std::vector<double> uniform_grid(double lo, double hi, int points);

// Indices (0-based; index i stands for gamma_{i+1}) with rho(gamma) >= rho_star.
std::vector<int> bulk_indices(const DensityProfile& d, const SpectralDomain& dom);

void write_density_csv(const DensityProfile& d, const std::string& path);
void write_quantiles_csv(const DensityProfile& d, const std::string& path);

}  // namespace wtlab
