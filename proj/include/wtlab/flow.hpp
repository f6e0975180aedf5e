#pragma once

#include <string>

#include "wtlab/dyson.hpp"
#include "wtlab/quadrature.hpp"

namespace wtlab {

// z_t = e^{(T-t)/2} z + (1 - e^{(T-t)/2}) a + 2 sinh((T-t)/2) S m(z)
CVec flow_map(const EnsembleSpec& e, cplx z, double t, double T, double tol = 1e-13);
CVec flow_map_from_m(const EnsembleSpec& e, cplx z, const CVec& m_z, double t, double T);

// || m(z_t) - e^{(t-T)/2} m(z) ||_inf, with m(z_t) from the vector-parameter solver.
double verify_m_scaling(const EnsembleSpec& e, cplx z, double t, double T, double tol);

struct CharTrajectory {
  std::vector<double> t;
  std::vector<CVec> z_of_t;
  std::vector<double> eta_of_t;
  cplx terminal_z = 0.0;
  double T = 1.0;
  double max_comparability = 1.0;  // max over t of max_j / min_j of sign(Im z) Im z_{j,t}
  double min_eta_ratio = 1.0;      // range of eta_t / (|Im z| + (T - t))
  double max_eta_ratio = 1.0;
};

CharTrajectory eta_profile(const EnsembleSpec& e, cplx z, double T, int samples,
                           double tol = 1e-13);
void write_trajectory_csv(const CharTrajectory& tr, const std::string& path);

struct ConeChart {
  cplx vertex = I_unit;
  double aperture = 0.25;  // gamma in (0, 1/4]
  double tilt = 0.0;       // omega in [-pi gamma / 2, pi gamma / 2]
  double xi = 1e-8;
};

void validate_chart(const ConeChart& c);

// psi(u) = z + e^{i omega} (-i xi + e^{i pi (1 - gamma)/2} u^gamma), log cut along the negative
// imaginary axis.
cplx psi(const ConeChart& c, cplx u);

// Membership of zeta in the shifted cone (z - i xi e^{i omega}) + V_z, up to tol.
bool in_shifted_cone(const ConeChart& c, cplx zeta, double tol = 1e-12);

// G(h, w) = (h - diag w)^{-1}
CMat generalized_resolvent(const CMat& h, const CVec& w);

struct IntegralRepr {
  CMat reconstruction;
  CMat direct;
  double max_discrepancy = 0.0;
  QuadratureInfo quad;
};

// Reconstructs G(h, f^t(z)) from Im G along the boundary image psi(R) of the chart
// (vertex z), i.e. (1/pi) int Im G(h, f^t(psi(x))) / (x - i xi^{1/gamma}) dx.
IntegralRepr resolvent_integral_repr(const CMat& h, const EnsembleSpec& e, double t, double T,
                                     const ConeChart& chart, const QuadratureOptions& quad = {});

// Same reconstruction from the horizontal line Im w = Im z - xi.
IntegralRepr stieltjes_line_repr(const CMat& h, const EnsembleSpec& e, double t, double T, cplx z,
                                 double xi, const QuadratureOptions& quad = {});

// Most negative eigenvalue of ||(Im z)^{-1}||_inf s Im G - G G^*, with s = sign(Im z).
double ward_inequality_check(const CMat& g, const CVec& z);

}  // namespace wtlab
