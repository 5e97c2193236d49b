#include "walklab/quadrature.hpp"

#include <cmath>
#include <vector>

#include "walklab/errors.hpp"

namespace walklab {

namespace {

struct SimpsonState {
  const std::function<double(double)>* f;
  std::size_t evals = 0;
  std::size_t max_evals = 0;

  double eval(double x) {
    if (++evals > max_evals)
      throw QuadratureFailure("evaluation budget exhausted");
    return (*f)(x);
  }
};

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(SimpsonState& st, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = st.eval(lm), frm = st.eval(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth > 60) return left + right + delta / 15.0;
  if (std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adapt(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         adapt(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opt) {
  if (a == b) return 0.0;
  SimpsonState st{&f, 0, opt.max_evals};
  const std::size_t panels = opt.initial_panels ? opt.initial_panels : 1;
  const double h = (b - a) / static_cast<double>(panels);
  const double tol_per_panel = opt.abs_tol / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double x0 = a + h * static_cast<double>(i);
    const double x1 = (i + 1 == panels) ? b : x0 + h;
    const double xm = 0.5 * (x0 + x1);
    const double f0 = st.eval(x0), fm = st.eval(xm), f1 = st.eval(x1);
    const double whole = simpson(f0, fm, f1, x0, x1);
    total += adapt(st, x0, x1, f0, fm, f1, whole, tol_per_panel, 0);
  }
  return total;
}

double gauss32(const std::function<double(double)>& f, double a, double b) {
  // Abscissae/weights for n=32 on [-1,1], positive half.
  static const double x[16] = {
      0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745,
      0.3318686022821276497, 0.4213512761306353453, 0.5068999089322293900,
      0.5877157572407623290, 0.6630442669302152009, 0.7321821187402896804,
      0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
      0.9349060759377396891, 0.9647622555875064308, 0.9856115115452683354,
      0.9972638618494815635};
  static const double w[16] = {
      0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654,
      0.0911738786957638847, 0.0876520930044038111, 0.0833119242269467552,
      0.0781938957870703065, 0.0723457941088485062, 0.0658222227763618468,
      0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
      0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706,
      0.0070186100094700966};
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 16; ++i)
    s += w[i] * (f(c + hw * x[i]) + f(c - hw * x[i]));
  return s * hw;
}

}  // namespace walklab
