#include "wtlab/quadrature.hpp"

#include <cmath>
#include <queue>

namespace wtlab {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b;
  CMat value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const MatrixIntegrand& f, double a, double b, int& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  CMat fc = f(c);
  CMat kron = kWgk[7] * fc;
  CMat gauss = kWg[3] * fc;
  evals += 1;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[i];
    CMat f1 = f(c - dx);
    CMat f2 = f(c + dx);
    evals += 2;
    kron += kWgk[i] * (f1 + f2);
    if (i % 2 == 1) gauss += kWg[i / 2] * (f1 + f2);
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, (kron - gauss).cwiseAbs().maxCoeff()};
}

}  // namespace

CMat integrate_panels(const MatrixIntegrand& f, const std::vector<double>& breakpoints,
                      const QuadratureOptions& opt, QuadratureInfo* info) {
  if (breakpoints.size() < 2) throw ValidationError("integrate_panels: need at least one panel");
  int evals = 0;
  std::priority_queue<Piece> heap;
  CMat total;
  double err = 0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i]))
      throw ValidationError("integrate_panels: breakpoints must increase");
    Piece p = gk15(f, breakpoints[i], breakpoints[i + 1], evals);
    total = total.size() ? CMat(total + p.value) : p.value;
    err += p.error;
    heap.push(std::move(p));
  }
  int intervals = static_cast<int>(heap.size());
  auto done = [&] {
    const double scale = total.cwiseAbs().maxCoeff();
    return err <= std::max(opt.abs_tol, opt.rel_tol * scale);
  };
  while (!done() && intervals < opt.max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(std::move(worst));  // cannot split further
      break;
    }
    Piece left = gk15(f, worst.a, mid, evals);
    Piece right = gk15(f, mid, worst.b, evals);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++intervals;
  }
  // Recompute from pieces to shed accumulated cancellation in the running sums.
  CMat sum = CMat::Zero(total.rows(), total.cols());
  double esum = 0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  if (info) {
    info->error_estimate = esum;
    info->evaluations = evals;
    info->intervals = intervals;
    info->converged = esum <= std::max(opt.abs_tol, opt.rel_tol * sum.cwiseAbs().maxCoeff());
  }
  return sum;
}

}  // namespace wtlab
