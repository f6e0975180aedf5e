#pragma once

#include <string>

#include "wtlab/stability.hpp"

namespace wtlab {

class DegenerateDataError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct HarnessOptions {
  Exec exec = Exec::Parallel;
  EntryLaw law = EntryLaw::Gaussian;
  double dyson_tol = 1e-13;
  double eta_floor = 1e-4;
  double domain_eps = 0.1;  // sweeps refuse eta < N^{-1+eps}
  double eta_star = 1.0;
  int density_points = 2001;
};

// Observable family generated from a fixed profile on [0,1] sampled at j/N.
struct ObservableSpec {
  enum class Kind { Sign, Identity, Cosine, Point, Zero } kind = Kind::Sign;
  double x0 = 0.5;  // location for Point
};

ObservableSpec parse_observable(const std::string& name);
std::string observable_name(const ObservableSpec& spec);
CMat make_observable(const ObservableSpec& spec, int n);

CMat resolvent(const CMat& h, cplx z);
CMat resolvent(const CMat& h, const CVec& z);
double resolvent_residual(const CMat& h, const CVec& z, const CMat& g);

struct Spectrum {
  RVec lambda;
  CMat u;
};

Spectrum spectrum(const CMat& h, Symmetry sym);

// U^* A U, using the diagonal shortcut when A is diagonal.
CMat to_eigenbasis(const Spectrum& sp, const CMat& a);

struct LocalLawStats {
  std::vector<double> phi1, phi2_hs, phi2_op, phi11;
  std::vector<double> raw2;  // |<(G1 A1 G2 - M) A2>|
  std::vector<double> raw1;  // |<(G1 - M1) A1>|
  int n = 0;
  cplx z1, z2;
  double regularity_a1 = 0.0, regularity_a2 = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};

LocalLawStats phi_stats(const EnsembleSpec& e, cplx z1, cplx z2, const CMat& a1, const CMat& a2,
                        int samples, std::uint64_t seed, const HarnessOptions& opt = {});

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;
  double r_squared = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% Student-t interval for the exponent
  std::vector<std::pair<double, double>> points;  // (log x, log y)
};

ScalingFit fit_exponent(const std::vector<std::pair<double, double>>& xy);

struct OverlapRow {
  int n = 0;
  int bulk_size = 0;
  double median_deviation = 0.0;
  double median_scaled = 0.0;            // sqrt(N) D / <|B|^2>^{1/2}
  double median_rigidity = 0.0;          // max_bulk N |lambda_j - gamma_j|
  double max_rigidity = 0.0;
  double median_deviation_lambda = 0.0;  // diagnostic: centering at lambda_j
  double centering_spread = 0.0;         // max_j |c_j - <B>|
  std::vector<double> deviations, rigidity;
};

struct OverlapReport {
  std::vector<OverlapRow> per_n;
  ScalingFit fit;
};

OverlapReport eth_overlaps(const ProfileSpec& family, const ObservableSpec& b_spec,
                           const std::vector<int>& n_list, int samples, double rho_min,
                           std::uint64_t seed, const HarnessOptions& opt = {});

// ETH centering <Im M(gamma_j) B> / (pi rho(gamma_j)) for every index in bulk (others 0).
RVec eth_centering(const EnsembleSpec& e, const DensityProfile& d, const std::vector<int>& bulk,
                   const CMat& b, const HarnessOptions& opt = {});

DensityProfile default_density(const EnsembleSpec& e, const HarnessOptions& opt = {});

struct SizeSweep {
  ScalingFit fit;
  std::vector<int> n_list;
  std::vector<double> medians;
};

SizeSweep single_resolvent_law(const ProfileSpec& family, cplx z, const ObservableSpec& a_spec,
                               bool regularize_observable, const std::vector<int>& n_list,
                               int samples, std::uint64_t seed, const HarnessOptions& opt = {});

struct ObservablePair {
  ObservableSpec a1, a2;
  bool regularize = true;
};

struct EtaSweep {
  std::vector<double> etas;
  std::vector<ScalingFit> fits;                 // one per observable pair
  std::vector<std::vector<double>> medians;     // [pair][eta]
  std::vector<std::vector<double>> residuals;   // regularity residuals of A1, per eta
};

// One eigendecomposition per sample, reused across all eta and all observable pairs.
EtaSweep eta_sweep(const EnsembleSpec& e, double e1, double e2,
                   const std::vector<ObservablePair>& pairs, const std::vector<double>& eta_list,
                   int samples, std::uint64_t seed, const HarnessOptions& opt = {});

ScalingFit eta_scaling_law(const EnsembleSpec& e, double e1, double e2, const ObservableSpec& a1,
                           const ObservableSpec& a2, bool regularize,
                           const std::vector<double>& eta_list, int samples, std::uint64_t seed,
                           const HarnessOptions& opt = {});

double median(std::vector<double> v);

}  // namespace wtlab
