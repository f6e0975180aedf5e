#pragma once

#include <optional>
#include <string>

#include "wtlab/common.hpp"

namespace wtlab {

struct ProfileSpec {
  int k = 1;
  std::vector<double> a_blocks{0.0};
  RMat s_blocks = RMat::Ones(1, 1);
  CMat t_blocks = CMat::Zero(1, 1);
  Symmetry symmetry = Symmetry::ComplexHermitian;
};

ProfileSpec flat_profile(Symmetry sym = Symmetry::ComplexHermitian);
void validate_profile(const ProfileSpec& p);

// Piecewise-constant layout remembered from build_ensemble so that S x costs O(N + k^2).
struct BlockLayout {
  std::vector<int> offsets;  // k+1 entries, offsets[b]..offsets[b+1] is block b
  RMat values;               // S_jk = values(block(j), block(k))
};

struct EnsembleSpec {
  int n = 0;
  RVec a;
  RMat s;
  CMat t;
  Symmetry symmetry = Symmetry::ComplexHermitian;
  double c_sup = 0.0;  // N * max S_jk
  double c_a = 0.0;    // max |a_j|
  std::optional<BlockLayout> blocks;

  CVec apply_S(const CVec& x, Exec exec = Exec::Serial) const;
  RVec apply_S(const RVec& x) const;
};

// Generic constructor from explicit (a, S, T); validates the EnsembleSpec invariants.
EnsembleSpec make_ensemble(const RVec& a, const RMat& s, const CMat& t, Symmetry sym);
EnsembleSpec build_ensemble(const ProfileSpec& profile, int n);
void validate_ensemble(const EnsembleSpec& e);

struct AssumptionReport {
  double flat_upper = 0.0;
  std::optional<int> primitivity_order;
  double primitivity_floor = 0.0;
  double m_sup = 0.0;
};

inline constexpr int kPrimitivityCap = 8;

// Smallest L <= 8 with S^L entrywise positive, together with N * min(S^L).
std::pair<std::optional<int>, double> primitivity(const RMat& s);
AssumptionReport check_assumptions(const EnsembleSpec& e, const std::vector<cplx>& probe_grid);

enum class EntryLaw { Gaussian, Rademacher };

// Derives an independent 64-bit stream seed from (seed, n, index).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t n, std::uint64_t index);

CMat sample_matrix(const EnsembleSpec& e, std::uint64_t seed, EntryLaw law = EntryLaw::Gaussian);

// Centered part of sample_matrix (mean zero, covariance (S, T)).
CMat sample_noise(const EnsembleSpec& e, std::uint64_t seed, EntryLaw law = EntryLaw::Gaussian);

enum class OuNoise { Gaussian, Zero };

CMat ou_step(const CMat& h, const EnsembleSpec& e, double dt, std::uint64_t seed,
             OuNoise noise = OuNoise::Gaussian);

CMat apply_S_diag(const EnsembleSpec& e, const CMat& b);
CMat apply_T_offdiag(const EnsembleSpec& e, const CMat& b);

// Binary matrix files: header is two little-endian uint32 (N, flag), followed by
// row-major little-endian float64 data. flag 0: real symmetric (N^2 doubles);
// flag 1: complex Hermitian, flag 2: general complex (N^2 interleaved re,im pairs).
enum class MatrixFlag : std::uint32_t { RealSymmetric = 0, ComplexHermitian = 1, General = 2 };

void write_matrix(const std::string& path, const CMat& m, MatrixFlag flag);
CMat read_matrix(const std::string& path, MatrixFlag* flag = nullptr);

}  // namespace wtlab
