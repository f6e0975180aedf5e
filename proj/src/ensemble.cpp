#include "wtlab/ensemble.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "wtlab/dyson.hpp"
#include "wtlab/kernels.hpp"

namespace wtlab {

std::string symmetry_name(Symmetry s) {
  return s == Symmetry::RealSymmetric ? "real-symmetric" : "complex-hermitian";
}

Symmetry parse_symmetry(const std::string& s) {
  if (s == "real-symmetric") return Symmetry::RealSymmetric;
  if (s == "complex-hermitian") return Symmetry::ComplexHermitian;
  throw ValidationError("unknown symmetry class '" + s + "'");
}

ProfileSpec flat_profile(Symmetry sym) {
  ProfileSpec p;
  p.symmetry = sym;
  return p;
}

void validate_profile(const ProfileSpec& p) {
  if (p.k < 1) throw ValidationError("profile: k must be positive");
  if (static_cast<int>(p.a_blocks.size()) != p.k)
    throw ValidationError("profile: a_blocks must have k entries");
  if (p.s_blocks.rows() != p.k || p.s_blocks.cols() != p.k)
    throw ValidationError("profile: s_blocks must be k x k");
  if (p.t_blocks.rows() != p.k || p.t_blocks.cols() != p.k)
    throw ValidationError("profile: t_blocks must be k x k");
  for (double v : p.a_blocks)
    if (!std::isfinite(v)) throw ValidationError("profile: a_blocks not finite");
  for (int i = 0; i < p.k; ++i) {
    for (int j = 0; j < p.k; ++j) {
      const double s = p.s_blocks(i, j);
      const cplx t = p.t_blocks(i, j);
      if (!std::isfinite(s) || !std::isfinite(t.real()) || !std::isfinite(t.imag()))
        throw ValidationError("profile: block values not finite");
      if (s < 0) throw ValidationError("profile: s_blocks must be nonnegative");
      if (s != p.s_blocks(j, i)) throw ValidationError("profile: s_blocks not symmetric");
      if (p.symmetry == Symmetry::ComplexHermitian) {
        if (std::abs(t) > s * (1 + 1e-12))
          throw ValidationError("profile: |t_blocks| exceeds s_blocks");
        if (std::abs(t - std::conj(p.t_blocks(j, i))) > 1e-14 * (1 + std::abs(t)))
          throw ValidationError("profile: t_blocks must be Hermitian");
      }
    }
  }
}

CVec EnsembleSpec::apply_S(const CVec& x, Exec exec) const {
  if (blocks) {
    const auto& off = blocks->offsets;
    const int k = static_cast<int>(off.size()) - 1;
    CVec sums = CVec::Zero(k);
    for (int b = 0; b < k; ++b)
      for (int j = off[b]; j < off[b + 1]; ++j) sums[b] += x[j];
    const CVec per_block = blocks->values.cast<cplx>() * sums;
    CVec y(n);
    for (int b = 0; b < k; ++b)
      for (int j = off[b]; j < off[b + 1]; ++j) y[j] = per_block[b];
    return y;
  }
  CVec y;
  kernels::variance_matvec(s, x, y, exec);
  return y;
}

RVec EnsembleSpec::apply_S(const RVec& x) const {
  return apply_S(CVec(x.cast<cplx>())).real();
}

void validate_ensemble(const EnsembleSpec& e) {
  const int n = e.n;
  if (n < 1) throw ValidationError("ensemble: n must be positive");
  if (e.a.size() != n || e.s.rows() != n || e.s.cols() != n || e.t.rows() != n || e.t.cols() != n)
    throw ValidationError("ensemble: dimension mismatch");
  if (!e.a.allFinite() || !e.s.allFinite() || !e.t.allFinite())
    throw ValidationError("ensemble: non-finite entries");
  for (int j = 0; j < n; ++j) {
    if (e.t(j, j) != cplx(0.0)) throw ValidationError("ensemble: T must vanish on the diagonal");
    for (int k = 0; k < n; ++k) {
      const double s = e.s(j, k);
      if (s < 0) throw ValidationError("ensemble: S must be nonnegative");
      if (s != e.s(k, j)) throw ValidationError("ensemble: S not symmetric");
      if (j != k && std::abs(e.t(j, k)) > s * (1 + 1e-12))
        throw ValidationError("ensemble: |T_jk| exceeds S_jk");
    }
  }
  if (e.symmetry == Symmetry::RealSymmetric) {
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (j != k && e.t(j, k) != cplx(e.s(j, k)))
          throw ValidationError("ensemble: real-symmetric class requires T = S off the diagonal");
  }
}

EnsembleSpec make_ensemble(const RVec& a, const RMat& s, const CMat& t, Symmetry sym) {
  EnsembleSpec e;
  e.n = static_cast<int>(a.size());
  e.a = a;
  e.s = s;
  e.t = t;
  e.symmetry = sym;
  validate_ensemble(e);
  e.c_sup = e.n * e.s.maxCoeff();
  e.c_a = e.a.cwiseAbs().maxCoeff();
  return e;
}

EnsembleSpec build_ensemble(const ProfileSpec& p, int n) {
  validate_profile(p);
  if (n < p.k) throw ValidationError("build_ensemble: n must be at least k");
  const int width = n / p.k;
  BlockLayout layout;
  layout.offsets.resize(p.k + 1);
  for (int b = 0; b < p.k; ++b) layout.offsets[b] = b * width;
  layout.offsets[p.k] = n;  // last block absorbs the remainder
  layout.values = p.s_blocks / static_cast<double>(n);

  std::vector<int> block(n);
  for (int b = 0; b < p.k; ++b)
    for (int j = layout.offsets[b]; j < layout.offsets[b + 1]; ++j) block[j] = b;

  RVec a(n);
  RMat s(n, n);
  CMat t = CMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    a[j] = p.a_blocks[block[j]];
    for (int k = 0; k < n; ++k) {
      s(j, k) = p.s_blocks(block[j], block[k]) / n;
      if (j == k) continue;
      t(j, k) = p.symmetry == Symmetry::RealSymmetric ? cplx(s(j, k))
                                                       : p.t_blocks(block[j], block[k]) / double(n);
    }
  }
  EnsembleSpec e = make_ensemble(a, s, t, p.symmetry);
  e.blocks = std::move(layout);
  return e;
}

std::pair<std::optional<int>, double> primitivity(const RMat& s) {
  const double n = static_cast<double>(s.rows());
  RMat power = s;
  for (int l = 1; l <= kPrimitivityCap; ++l) {
    if ((power.array() > 0.0).all()) return {l, n * power.minCoeff()};
    if (l < kPrimitivityCap) power = power * s;
  }
  return {std::nullopt, 0.0};
}

namespace {

// S^L restricted to block representatives: (V D)^{L-1} V with D = diag(block sizes).
std::pair<std::optional<int>, double> block_primitivity(const BlockLayout& layout, int n) {
  const int k = static_cast<int>(layout.offsets.size()) - 1;
  RVec sizes(k);
  for (int b = 0; b < k; ++b) sizes[b] = layout.offsets[b + 1] - layout.offsets[b];
  RMat power = layout.values;
  for (int l = 1; l <= kPrimitivityCap; ++l) {
    if ((power.array() > 0.0).all()) return {l, n * power.minCoeff()};
    power = layout.values * sizes.asDiagonal() * power;
  }
  return {std::nullopt, 0.0};
}

}  // namespace

AssumptionReport check_assumptions(const EnsembleSpec& e, const std::vector<cplx>& probe_grid) {
  if (probe_grid.empty()) throw ValidationError("check_assumptions: empty probe grid");
  for (cplx z : probe_grid)
    if (z.imag() == 0.0) throw ValidationError("check_assumptions: probe point on the real axis");
  AssumptionReport r;
  r.flat_upper = e.n * e.s.maxCoeff();
  auto [order, floor] = e.blocks ? block_primitivity(*e.blocks, e.n) : primitivity(e.s);
  r.primitivity_order = order;
  r.primitivity_floor = floor;
  for (cplx z : probe_grid) {
    DysonSolution sol = solve_vde(e, z, 1e-12);
    r.m_sup = std::max(r.m_sup, sol.m.cwiseAbs().maxCoeff());
  }
  return r;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t n, std::uint64_t index) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(mix(seed) ^ n) ^ index);
}

CMat sample_noise(const EnsembleSpec& e, std::uint64_t seed, EntryLaw law) {
  const int n = e.n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  auto sign = [&] { return coin(rng) ? 1.0 : -1.0; };
  const bool real = e.symmetry == Symmetry::RealSymmetric;
  if (law == EntryLaw::Rademacher && !real && e.t.cwiseAbs().maxCoeff() > 0)
    throw ValidationError("Rademacher entries support only T = 0 in the complex class");

  CMat h = CMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double sd = std::sqrt(e.s(j, j));
    h(j, j) = (law == EntryLaw::Gaussian ? gauss(rng) : sign()) * sd;
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const double s = e.s(j, k);
      cplx x;
      if (real) {
        x = (law == EntryLaw::Gaussian ? gauss(rng) : sign()) * std::sqrt(s);
      } else if (law == EntryLaw::Rademacher) {
        x = std::sqrt(s / 2) * cplx(sign(), sign());
      } else {
        // (Re, Im) Gaussian with E|x|^2 = S, E x^2 = T.
        const cplx t = e.t(j, k);
        const double vx = std::max(0.0, (s + t.real()) / 2);
        const double vy = std::max(0.0, (s - t.real()) / 2);
        const double cxy = t.imag() / 2;
        const double g1 = gauss(rng), g2 = gauss(rng);
        const double sx = std::sqrt(vx);
        double re = sx * g1, im;
        if (sx > 0) {
          const double c = cxy / sx;
          im = c * g1 + std::sqrt(std::max(0.0, vy - c * c)) * g2;
        } else {
          im = std::sqrt(vy) * g2;
        }
        x = cplx(re, im);
      }
      h(j, k) = x;
      h(k, j) = std::conj(x);
    }
  }
  return h;
}

CMat sample_matrix(const EnsembleSpec& e, std::uint64_t seed, EntryLaw law) {
  CMat h = sample_noise(e, seed, law);
  for (int j = 0; j < e.n; ++j) h(j, j) += e.a[j];
  return h;
}

CMat ou_step(const CMat& h, const EnsembleSpec& e, double dt, std::uint64_t seed, OuNoise noise) {
  if (dt < 0) throw ValidationError("ou_step: dt must be nonnegative");
  if (h.rows() != e.n || h.cols() != e.n) throw ValidationError("ou_step: dimension mismatch");
  if (dt == 0) return h;
  CMat centered = h;
  for (int j = 0; j < e.n; ++j) centered(j, j) -= e.a[j];
  CMat out = h - (0.5 * dt) * centered;
  if (noise == OuNoise::Gaussian) out += std::sqrt(dt) * sample_noise(e, seed);
  return out;
}

CMat apply_S_diag(const EnsembleSpec& e, const CMat& b) {
  if (b.rows() != e.n || b.cols() != e.n) throw ValidationError("apply_S_diag: dimension mismatch");
  const CVec d = b.diagonal();
  return e.apply_S(d).asDiagonal();
}

CMat apply_T_offdiag(const EnsembleSpec& e, const CMat& b) {
  if (b.rows() != e.n || b.cols() != e.n)
    throw ValidationError("apply_T_offdiag: dimension mismatch");
  CMat out = e.t.cwiseProduct(b.transpose());
  out.diagonal().setZero();
  return out;
}

static_assert(std::endian::native == std::endian::little, "binary matrix IO assumes little-endian");

void write_matrix(const std::string& path, const CMat& m, MatrixFlag flag) {
  if (m.rows() != m.cols()) throw ValidationError("write_matrix: square matrix required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("write_matrix: cannot open " + path);
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(m.rows()),
                                   static_cast<std::uint32_t>(flag)};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const double re = m(j, k).real(), im = m(j, k).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      if (flag != MatrixFlag::RealSymmetric) out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  }
  if (!out) throw ValidationError("write_matrix: write failed for " + path);
}

CMat read_matrix(const std::string& path, MatrixFlag* flag_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("read_matrix: cannot open " + path);
  std::uint32_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || header[1] > 2) throw ValidationError("read_matrix: bad header in " + path);
  const auto n = static_cast<Eigen::Index>(header[0]);
  const auto flag = static_cast<MatrixFlag>(header[1]);
  CMat m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), sizeof re);
      if (flag != MatrixFlag::RealSymmetric) in.read(reinterpret_cast<char*>(&im), sizeof im);
      m(j, k) = cplx(re, im);
    }
  }
  if (!in) throw ValidationError("read_matrix: truncated file " + path);
  if (flag_out) *flag_out = flag;
  return m;
}

}  // namespace wtlab
