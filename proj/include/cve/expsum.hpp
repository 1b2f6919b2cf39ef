#pragma once
#include <complex>
#include <vector>

namespace cve {

using cplx = std::complex<double>;

// amp * exp(rate * s)
struct ExpTerm {
  cplx amp;
  cplx rate;
};

// Finite sum of complex exponentials, used for every kernel on the half-line s >= 0.
using ExpSum = std::vector<ExpTerm>;

cplx eval(const ExpSum& f, double s);
double eval_real(const ExpSum& f, double s);
ExpSum scaled(const ExpSum& f, cplx k);
ExpSum derivative(const ExpSum& f);
ExpSum sum(const ExpSum& a, const ExpSum& b);
// a * f + b * g
ExpSum combine(cplx a, const ExpSum& f, cplx b, const ExpSum& g);
// term-wise product
ExpSum product(const ExpSum& a, const ExpSum& b);

// int_0^inf f(s) h(s) ds; all combined rates need negative real part
cplx half_line(const ExpSum& f, const ExpSum& h);
// int_0^inf ds f(s) int_0^s ds' h(s') K(s - s')
cplx causal_double(const ExpSum& f, const ExpSum& h, const ExpSum& k);

// phi1(z) = (e^z - 1)/z, with series near 0
cplx phi1(cplx z);
// int_0^L e^{mu u} du
cplx window_integral(cplx mu, double len);
// int_0^L du e^{a u} int_0^u dv e^{b v}
cplx triangle_integral(cplx a, cplx b, double len);

}  // namespace cve
